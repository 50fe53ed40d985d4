#pragma once

// Hyperbolic-plane primitives on the hyperboloid model, with incidence
// tests done in the Klein projection where geodesics are straight chords.

#include <array>
#include <stdexcept>
#include <string>

namespace maskit2 {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidPoint : Error { using Error::Error; };
struct NotHyperbolic : Error { using Error::Error; };
struct DegenerateIncidence : Error { using Error::Error; };

// Absolute tolerance for metric identities.
inline constexpr double kMetricTol = 1e-9;
// Tolerance for orientation-test degeneracy in the Klein disk.
inline constexpr double kOrientTol = 1e-12;

// Point on the hyperboloid x0^2 - x1^2 - x2^2 = 1, x0 >= 1, with the
// Minkowski form <p,q> = -p0 q0 + p1 q1 + p2 q2.
struct Point {
    double x0 = 1.0, x1 = 0.0, x2 = 0.0;

    static Point origin() { return {1.0, 0.0, 0.0}; }

    // Klein-disk projection (x1/x0, x2/x0).
    double kx() const { return x1 / x0; }
    double ky() const { return x2 / x0; }
};

double minkowski(const Point& p, const Point& q);

// Rescales onto the hyperboloid sheet; throws InvalidPoint if the vector
// is not timelike future-pointing.
Point normalize_point(const Point& p);

bool point_valid(const Point& p, double tol = kMetricTol);

// acosh with a log1p formulation near 1. Arguments in [1-tol, 1] clamp
// to 0; below that is the caller's error.
double acosh_stable(double x);

double distance(const Point& p, const Point& q);

// Orientation-preserving isometry: 2x2 real matrix with det 1,
// identified with its negative.
struct Isometry {
    // Row-major entries m[0]=m00, m[1]=m01, m[2]=m10, m[3]=m11.
    std::array<double, 4> m{1.0, 0.0, 0.0, 1.0};

    static Isometry identity() { return {}; }

    double trace() const { return m[0] + m[3]; }
    double det() const { return m[0] * m[3] - m[1] * m[2]; }
};

Isometry compose(const Isometry& a, const Isometry& b);
Isometry inverse(const Isometry& g);

// det-1 renormalization plus canonical sign (first entry with magnitude
// above kOrientTol made positive).
Isometry canonical(const Isometry& g);

// Scale normalization: entries divided by the largest magnitude, sign
// fixed as in canonical(). Safe for matrices whose determinant is lost
// to rounding (entry scale above ~1e8), where canonical() is not; the
// point action is scale-invariant either way.
Isometry scale_normalized(const Isometry& g);

// Equality in the sign quotient, entrywise after canonicalization.
bool projectively_equal(const Isometry& a, const Isometry& b, double tol = kMetricTol);

// Coordinate comparison relative to the point scale; use this instead
// of distance() for equality tests, which would square-root-inflate
// rounding noise between nearly equal points.
bool points_close(const Point& a, const Point& b, double tol = kMetricTol);

// Action on hyperboloid points through the symmetric-matrix
// representation S(p) = [[x0+x1, x2],[x2, x0-x1]], S -> g S g^T.
Point apply(const Isometry& g, const Point& p);

bool is_elliptic(const Isometry& g, double tol = kMetricTol);
bool is_hyperbolic(const Isometry& g, double tol = kMetricTol);

// Order-two elliptic fixing p; trace 0, det 1.
Isometry half_turn(const Point& p);

// 2 acosh(|tr|/2); throws NotHyperbolic on elliptic or borderline input.
double translation_length(const Isometry& g);

// Arc-length parametrization of the translation axis of g. s = 0 at the
// axis point closest to the origin (1,0,0); positive direction agrees
// with the translation direction of g.
Point axis_point(const Isometry& g, double s);

// Unit tangent vector at p pointing toward q (p != q).
Point tangent_toward(const Point& p, const Point& q);

// Geodesic segment between two hyperboloid points, Klein chords cached.
struct Segment {
    Point p, q;
    double ax, ay, bx, by; // Klein endpoints

    Segment(const Point& p_, const Point& q_)
        : p(p_), q(q_), ax(p_.kx()), ay(p_.ky()), bx(q_.kx()), by(q_.ky()) {}
};

// Relative position of two geodesic segments.
enum class CrossKind {
    none,          // disjoint, or touching only at a shared endpoint
    cross,         // transversal interior intersection
    same_geodesic, // both lie on one geodesic
    degenerate     // endpoint contact / tangency too close to call
};
CrossKind classify_crossing(const Segment& a, const Segment& b);

// True iff the open segments intersect transversally (endpoints
// excluded). Near-degenerate contact throws DegenerateIncidence.
bool segments_cross(const Segment& a, const Segment& b);

} // namespace maskit2
