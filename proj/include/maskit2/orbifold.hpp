#pragma once

// Marked genus-2 quotient orbifolds: six order-two cone points on a
// hyperbolic sphere, encoded by six half-turn generators with
// R1...R6 = +-I, built from pants-and-fold coordinates.

#include "maskit2/hyperbolic.hpp"

#include <array>
#include <string>
#include <utility>

namespace maskit2 {

struct InvalidParams : Error { using Error::Error; };
struct InvalidNecklace : Error { using Error::Error; };
struct ConstructionFailure : Error { using Error::Error; };

struct ParseError : Error {
    int line;
    ParseError(const std::string& msg, int line_)
        : Error(msg + " (line " + std::to_string(line_) + ")"), line(line_) {}
};

// Lengths of the necklace arcs gamma_1, gamma_3, gamma_5 plus fold
// offsets along the corresponding pants boundaries. Twists are periodic
// with period 2*a_i and are reduced into [0, 2*a_i) on construction.
struct PantsFoldParams {
    double a1 = 1.0, a3 = 1.0, a5 = 1.0;
    double t1 = 0.0, t3 = 0.0, t5 = 0.0;
};

inline constexpr double kAMin = 0.3;
inline constexpr double kAMax = 2.5;

// A marked point of Teichmueller space: half-turns R_i about cone-point
// lifts w_i, with R1...R6 = +-I and an embedded vertex hexagon w1..w6.
// orientation = +1 when the vertex cycle is positively oriented in the
// Klein disk (component H is then the hexagon interior).
struct Holonomy {
    std::array<Isometry, 6> R;
    std::array<Point, 6> w;
    int orientation = +1;
};

// Throws InvalidNecklace / Error if any Holonomy invariant fails.
void validate(const Holonomy& h, double tol = kMetricTol);

// l(gamma_i) = d(w_i, w_{i+1}), i in 1..6.
double necklace_length(const Holonomy& h, int i);

Holonomy build(const PantsFoldParams& params);

// build() without the canonical fold window: twists are taken as given
// on the whole real line. Markings differing by full 2a twists share
// the arc-length table but are distinct markings; restoring a reduced
// marking exactly needs this finer chart.
Holonomy build_unwrapped(const PantsFoldParams& params);

// The octahedral orbifold: all twelve octahedron-edge arcs of equal
// length acosh(1 + sqrt 2).
std::pair<PantsFoldParams, Holonomy> oct();

// The exceptional orbifold with conformal symmetry Z2 x Z2, pinned by
// its equality pattern among the 27 compared lengths.
std::pair<PantsFoldParams, Holonomy> exceptional();

// Orientation-reversed marking: conjugate by the x2-flip, orientation
// flag negated. Arc lengths for barred and unbarred labels swap.
Holonomy mirror(const Holonomy& h);

// Conjugate the whole marking by g (an isometric remarking).
Holonomy conjugated(const Holonomy& h, const Isometry& g);

// Relabel the necklace by rotating indices: new w_i = w_{i+shift}.
Holonomy rotated(const Holonomy& h, int shift);

// ---- orbifold file format (format=maskit2/1) ----

struct OrbifoldFile {
    enum class Kind { params, matrices };
    Kind kind = Kind::params;
    PantsFoldParams params{};
    std::array<Isometry, 6> rmats{};
};

OrbifoldFile parse_orbifold(const std::string& text);
std::string serialize_orbifold(const OrbifoldFile& f);

inline OrbifoldFile to_file(const PantsFoldParams& p) {
    OrbifoldFile f;
    f.kind = OrbifoldFile::Kind::params;
    f.params = p;
    return f;
}
OrbifoldFile to_file(const Holonomy& h);

// Recover the marking from raw half-turn matrices (cone lifts are the
// elliptic fixed points).
Holonomy holonomy_from_matrices(const std::array<Isometry, 6>& rmats);

Holonomy realize(const OrbifoldFile& f);

} // namespace maskit2
