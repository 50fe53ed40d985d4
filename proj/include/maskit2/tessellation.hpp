#pragma once

// Two-hexagon tiling of the plane developed from a marked orbifold:
// tile walking, crossing-sequence traces, labeled arcs and their
// enumeration.

#include "maskit2/orbifold.hpp"

#include <compare>
#include <string>
#include <vector>

namespace maskit2 {

struct TessellationError : Error { using Error::Error; };
struct DepthExceeded : Error { using Error::Error; };
struct InvalidQuery : Error { using Error::Error; };
struct InvalidLabel : Error { using Error::Error; };

// Side of the necklace an arc starts on. H is the component around
// which gamma_1..gamma_6 run anticlockwise.
enum class Side { H, Hbar };

inline Side flip(Side s) { return s == Side::H ? Side::Hbar : Side::H; }

// The symbol beta_{j,k}^{i1..in} (start_side H) or its barred variant
// (start_side Hbar): arc from omega_j to omega_k crossing the necklace
// arcs gamma_{i1},...,gamma_{in} in order.
struct ArcLabel {
    int j = 1, k = 2;
    Side start_side = Side::H;
    std::vector<int> crossings;

    ArcLabel() = default;
    ArcLabel(int j_, int k_, Side side, std::vector<int> crossings_);

    // Necklace arcs carry both side conventions: beta_{j,j+1} and
    // beta_{1,6} with no crossings are the gamma arcs themselves.
    bool is_necklace_arc() const;
    // 1..6 when is_necklace_arc(), else 0.
    int necklace_index() const;

    friend bool operator==(const ArcLabel& a, const ArcLabel& b) {
        return a.j == b.j && a.k == b.k && a.start_side == b.start_side &&
               a.crossings == b.crossings;
    }
    friend bool operator<(const ArcLabel& a, const ArcLabel& b);
};

std::string to_string(const ArcLabel& label);

struct ArcInstance {
    ArcLabel label;
    double length = 0.0;
    Point endpoint_lift;
    Isometry endpoint_word; // endpoint_lift = endpoint_word * w_k
    bool verified = false;
    bool simple = true;
    bool converged = true;
};

struct Tile {
    Isometry g;
    bool cobase = false; // false: image of the vertex hexagon, true: of its complement
    std::array<Point, 6> vertices;
};

struct TraceResult {
    Side start_side = Side::H;
    std::vector<int> crossings;
};

// Caches the base tiles and side-pairing elements of one marking.
class Tessellation {
public:
    // validate_tol loosens the marking validation, for slightly inexact
    // intermediate markings mid-reduction; geometry is unaffected.
    explicit Tessellation(const Holonomy& h, double validate_tol = kMetricTol);

    const Holonomy& holonomy() const { return h_; }
    const Tile& base() const { return base_; }
    const Tile& hbar_base() const { return cobase_; }

    // Unique tile of opposite parity across side i (1..6); algebraic
    // rule cross-checked against shared-vertex geometry.
    Tile adjacent(const Tile& t, int side) const;

    // Realize a labeled arc by walking tiles from w_j. simple_depth
    // bounds the word length of the orbit used for the simplicity flag.
    ArcInstance develop(const ArcLabel& label, int simple_depth = 4) const;

    // Parity of the tile containing the initial subsegment plus the
    // ordered necklace side indices crossed. Start point must be a
    // cone-point lift w_j of the base hexagon.
    TraceResult trace(const Segment& s, int max_tiles = 128) const;

    // Transverse self-crossing test against the orbit of the segment
    // under group elements of bounded word length.
    bool is_simple(const Segment& s, int depth) const;

    // Number of transverse crossings between the projected arcs of a
    // and b, counted as distinct crossing points along a against the
    // orbit of b (depth-bounded).
    int crossing_count(const Segment& a, const Segment& b, int depth) const;

    // All verified arc classes omega_j -> omega_k with at most
    // max_cross crossings (complete for that bound, by label
    // enumeration), ascending by (length, label). Simplicity is only
    // evaluated for instances with length <= simple_below.
    std::vector<ArcInstance> arcs_between(int j, int k, int max_cross,
                                          double simple_below = -1.0,
                                          int simple_depth = 6) const;

    // Group elements of word length <= depth in R_1..R_6, deduplicated.
    const std::vector<Isometry>& group_elements(int depth) const;

    // Interior angle of a tile at vertex index 1..6.
    static double vertex_angle(const Tile& t, int vertex);

private:
    Holonomy h_;
    double adj_tol_ = 1e-9; // vertex-match slack in adjacent(), tracks validate_tol
    Tile base_, cobase_;
    std::array<Isometry, 6> sigma_;     // side pairings of the base tile
    std::array<Isometry, 6> sigma_inv_;
    std::array<Isometry, 6> prefix_;    // prefix_[i] = R_1 ... R_i
    mutable std::vector<std::vector<Isometry>> elem_cache_;

    Side label_side(bool cobase_parity) const;
    bool internal_parity(Side s) const;
    Tile start_tile(int j, bool cobase_parity) const;
};

// Spec-level convenience wrappers.
ArcInstance develop_label(const Holonomy& h, const ArcLabel& label);
TraceResult trace_segment(const Holonomy& h, const Segment& s);

// Exhaustive reduced-word enumeration of arcs omega_j -> omega_k:
// segments [w_j, g w_k] over words of length <= max_word, traced,
// filtered to <= max_cross crossings and simple, deduplicated by
// (label, length). OpenMP-parallel with a deterministic merge;
// the _serial variant is the reference implementation.
std::vector<ArcInstance> enumerate_arcs(const Holonomy& h, int j, int k,
                                        int max_word, int max_cross,
                                        double length_cutoff = 1e30);
std::vector<ArcInstance> enumerate_arcs_serial(const Holonomy& h, int j, int k,
                                               int max_word, int max_cross,
                                               double length_cutoff = 1e30);

} // namespace maskit2
