#include "maskit2/hyperbolic.hpp"

#include <algorithm>
#include <cmath>

namespace maskit2 {

double minkowski(const Point& p, const Point& q) {
    return -p.x0 * q.x0 + p.x1 * q.x1 + p.x2 * q.x2;
}

Point normalize_point(const Point& p) {
    double n = -minkowski(p, p);
    if (!(n > 0.0) || p.x0 <= 0.0)
        throw InvalidPoint("vector is not timelike future-pointing");
    double s = 1.0 / std::sqrt(n);
    return {p.x0 * s, p.x1 * s, p.x2 * s};
}

bool point_valid(const Point& p, double tol) {
    // relative to x0^2: the constraint cannot hold absolutely in
    // doubles for points far from the origin
    double scale = std::max(1.0, p.x0 * p.x0);
    return std::abs(minkowski(p, p) + 1.0) <= tol * scale && p.x0 >= 1.0 - tol;
}

double acosh_stable(double x) {
    double u = x - 1.0;
    if (u < 0.0) {
        if (u < -kMetricTol)
            throw InvalidPoint("acosh argument below 1");
        return 0.0;
    }
    if (u < 0.5)
        return std::log1p(u + std::sqrt(u * (2.0 + u)));
    return std::acosh(x);
}

double distance(const Point& p, const Point& q) {
    double c = -minkowski(p, q);
    if (c < 1.0 - kMetricTol)
        throw InvalidPoint("points do not satisfy <p,q> <= -1");
    return acosh_stable(c);
}

Isometry compose(const Isometry& a, const Isometry& b) {
    Isometry r;
    r.m[0] = a.m[0] * b.m[0] + a.m[1] * b.m[2];
    r.m[1] = a.m[0] * b.m[1] + a.m[1] * b.m[3];
    r.m[2] = a.m[2] * b.m[0] + a.m[3] * b.m[2];
    r.m[3] = a.m[2] * b.m[1] + a.m[3] * b.m[3];
    return r;
}

Isometry inverse(const Isometry& g) {
    // det 1 adjugate
    return Isometry{{g.m[3], -g.m[1], -g.m[2], g.m[0]}};
}

namespace {

// Compensated 2x2 determinant (Kahan): exact products via fma keep the
// result accurate under heavy cancellation.
double det_accurate(const Isometry& g) {
    double w = g.m[1] * g.m[2];
    double e = std::fma(-g.m[1], g.m[2], w);
    double f = std::fma(g.m[0], g.m[3], -w);
    return f + e;
}

void fix_sign(Isometry& r) {
    for (double e : r.m) {
        if (std::abs(e) > kOrientTol) {
            if (e < 0.0)
                for (double& f : r.m) f = -f;
            break;
        }
    }
}

} // namespace

Isometry canonical(const Isometry& g) {
    Isometry r = g;
    double d = det_accurate(r);
    if (!(d > 0.0))
        throw Error("isometry determinant is not positive");
    double s = 1.0 / std::sqrt(d);
    for (double& e : r.m) e *= s;
    fix_sign(r);
    return r;
}

Isometry scale_normalized(const Isometry& g) {
    double s = 0.0;
    for (double e : g.m) s = std::max(s, std::abs(e));
    if (!(s > 0.0) || !std::isfinite(s))
        throw Error("isometry entries are zero or non-finite");
    Isometry r = g;
    for (double& e : r.m) e /= s;
    fix_sign(r);
    return r;
}

bool projectively_equal(const Isometry& a, const Isometry& b, double tol) {
    Isometry ca = canonical(a), cb = canonical(b);
    double scale = 1.0;
    for (int i = 0; i < 4; ++i)
        scale = std::max({scale, std::abs(ca.m[i]), std::abs(cb.m[i])});
    for (int i = 0; i < 4; ++i)
        if (std::abs(ca.m[i] - cb.m[i]) > tol * scale) return false;
    return true;
}

bool points_close(const Point& a, const Point& b, double tol) {
    double scale = std::max({1.0, std::abs(a.x0), std::abs(a.x1), std::abs(a.x2),
                             std::abs(b.x0), std::abs(b.x1), std::abs(b.x2)});
    return std::abs(a.x0 - b.x0) <= tol * scale &&
           std::abs(a.x1 - b.x1) <= tol * scale &&
           std::abs(a.x2 - b.x2) <= tol * scale;
}

Point apply(const Isometry& g, const Point& p) {
    // S(p) = [[x0+x1, x2],[x2, x0-x1]], S' = g S g^T
    double s00 = p.x0 + p.x1, s01 = p.x2, s11 = p.x0 - p.x1;
    double a = g.m[0], b = g.m[1], c = g.m[2], d = g.m[3];
    // g S
    double t00 = a * s00 + b * s01;
    double t01 = a * s01 + b * s11;
    double t10 = c * s00 + d * s01;
    double t11 = c * s01 + d * s11;
    // (g S) g^T
    double r00 = t00 * a + t01 * b;
    double r01 = t00 * c + t01 * d;
    double r11 = t10 * c + t11 * d;
    return normalize_point({0.5 * (r00 + r11), 0.5 * (r00 - r11), r01});
}

bool is_elliptic(const Isometry& g, double tol) {
    return std::abs(g.trace()) < 2.0 - tol;
}

bool is_hyperbolic(const Isometry& g, double tol) {
    return std::abs(g.trace()) > 2.0 + tol;
}

Isometry half_turn(const Point& p) {
    // S(p) * [[0,-1],[1,0]]: trace 0, det 1, fixes p.
    return Isometry{{p.x2, -(p.x0 + p.x1), p.x0 - p.x1, -p.x2}};
}

double translation_length(const Isometry& g) {
    if (!is_hyperbolic(g))
        throw NotHyperbolic("translation_length requires |tr| > 2");
    return 2.0 * acosh_stable(0.5 * std::abs(g.trace()));
}

namespace {

// Ideal fixed point of g with eigenvalue lam, as a future null vector in
// the symmetric-matrix coordinates.
Point null_fixed_point(const Isometry& g, double lam) {
    double a = g.m[0], b = g.m[1], c = g.m[2], d = g.m[3];
    // eigenvector of [[a,b],[c,d]] for lam: rows of (g - lam I) give it
    double v0, v1;
    if (std::abs(b) + std::abs(a - lam) >= std::abs(c) + std::abs(d - lam)) {
        v0 = b;
        v1 = lam - a;
    } else {
        v0 = lam - d;
        v1 = c;
    }
    double n = std::hypot(v0, v1);
    v0 /= n;
    v1 /= n;
    // N = v v^T mapped back to (x0, x1, x2)
    return {0.5 * (v0 * v0 + v1 * v1), 0.5 * (v0 * v0 - v1 * v1), v0 * v1};
}

} // namespace

Point axis_point(const Isometry& g, double s) {
    if (!is_hyperbolic(g))
        throw NotHyperbolic("axis_point requires a hyperbolic isometry");
    Isometry h = g;
    if (h.trace() < 0.0)
        for (double& e : h.m) e = -e;
    double tr = h.trace();
    double disc = std::sqrt(tr * tr - 4.0);
    double lam_plus = 0.5 * (tr + disc);   // attracting, > 1
    double lam_minus = 0.5 * (tr - disc);
    Point np = null_fixed_point(h, lam_plus);
    Point nm = null_fixed_point(h, lam_minus);
    // p(t) ~ e^t n+ + e^-t n- is arc-length once normalized; basepoint
    // nearest the origin minimizes the x0 coordinate.
    double t0 = 0.5 * std::log(nm.x0 / np.x0);
    double t = t0 + s;
    double ep = std::exp(t), em = std::exp(-t);
    return normalize_point({ep * np.x0 + em * nm.x0,
                            ep * np.x1 + em * nm.x1,
                            ep * np.x2 + em * nm.x2});
}

Point tangent_toward(const Point& p, const Point& q) {
    double c = minkowski(q, p);
    Point u = {q.x0 + c * p.x0, q.x1 + c * p.x1, q.x2 + c * p.x2};
    double n = minkowski(u, u);
    if (!(n > 0.0))
        throw InvalidPoint("tangent_toward needs distinct points");
    double s = 1.0 / std::sqrt(n);
    return {u.x0 * s, u.x1 * s, u.x2 * s};
}

namespace {

// Minkowski-orthogonal normal of the plane spanned by two hyperboloid
// points (the segment's geodesic). Spacelike; not normalizable to the
// sheet, kept as a raw vector.
struct PlaneNormal {
    double n0, n1, n2;
    double fmag; // pre-cancellation magnitude |p||q|, for the rounding floor
    double mmag; // Minkowski magnitude: unit-normal divisor
};

PlaneNormal geodesic_normal(const Point& p, const Point& q) {
    double c0 = p.x1 * q.x2 - p.x2 * q.x1;
    double c1 = p.x2 * q.x0 - p.x0 * q.x2;
    double c2 = p.x0 * q.x1 - p.x1 * q.x0;
    PlaneNormal n = {-c0, c1, c2, 0.0, 0.0};
    // The cross product can cancel to pure noise (near-collinear far
    // lifts), so the error floor must scale with the factors, not with
    // the computed normal.
    n.fmag = std::sqrt((p.x0 * p.x0 + p.x1 * p.x1 + p.x2 * p.x2) *
                       (q.x0 * q.x0 + q.x1 * q.x1 + q.x2 * q.x2));
    // <n,n> = <p,q>^2 - <p,p><q,q> = cosh^2(d) - 1 for unit timelike p, q:
    // stable even when the direct -n0^2 + n1^2 + n2^2 cancels to noise
    double c = minkowski(p, q);
    n.mmag = std::sqrt(std::max(c * c - 1.0, 0.0));
    return n;
}

// Which side of the geodesic plane the point is on: +1 / -1, or 0 when
// too close to call. <n,t>/|n|_mink is sinh of the hyperbolic distance
// to the plane, so the test does not collapse for lifts far from the
// origin; the rounding floor of the inner product widens the tolerance
// where cancellation makes the sign untrustworthy.
int plane_side(const PlaneNormal& n, const Point& t) {
    double v = -n.n0 * t.x0 + n.n1 * t.x1 + n.n2 * t.x2;
    double floor = 16.0 * 2.2e-16 * n.fmag *
                   std::sqrt(t.x0 * t.x0 + t.x1 * t.x1 + t.x2 * t.x2);
    double tol = std::max(1e-9 * n.mmag, floor);
    if (std::abs(v) <= tol) return 0;
    return v > 0.0 ? 1 : -1;
}

} // namespace

CrossKind classify_crossing(const Segment& a, const Segment& b) {
    PlaneNormal na = geodesic_normal(a.p, a.q);
    PlaneNormal nb = geodesic_normal(b.p, b.q);
    int s1 = plane_side(na, b.p);
    int s2 = plane_side(na, b.q);
    // Both endpoints on the line already pins the geodesic; the reverse
    // test would divide by a cancelled normal.
    if (s1 == 0 && s2 == 0) return CrossKind::same_geodesic;
    int s3 = plane_side(nb, a.p);
    int s4 = plane_side(nb, a.q);
    if (s3 == 0 && s4 == 0) return CrossKind::same_geodesic;
    if (s1 * s2 > 0 || s3 * s4 > 0) return CrossKind::none;
    if (s1 * s2 < 0 && s3 * s4 < 0) return CrossKind::cross;
    // A zero in a deciding position. Two distinct geodesics meet at most
    // once, so segments sharing an endpoint meet only there. The match is
    // relative: lifts of one cone point reached by different words agree
    // only to relative rounding.
    auto same_pt = [](const Point& u, const Point& v) {
        double s = std::max(u.x0, v.x0); // >= 1 on the sheet
        return std::abs(u.x0 - v.x0) <= 1e-9 * s &&
               std::abs(u.x1 - v.x1) <= 1e-9 * s &&
               std::abs(u.x2 - v.x2) <= 1e-9 * s;
    };
    if (same_pt(a.p, b.p) || same_pt(a.p, b.q) || same_pt(a.q, b.p) ||
        same_pt(a.q, b.q))
        return CrossKind::none;
    return CrossKind::degenerate;
}

bool segments_cross(const Segment& a, const Segment& b) {
    switch (classify_crossing(a, b)) {
    case CrossKind::none:
        return false;
    case CrossKind::cross:
        return true;
    case CrossKind::degenerate:
        throw DegenerateIncidence("segment endpoint on other segment");
    case CrossKind::same_geodesic:
        break;
    }
    // Same geodesic: overlap beyond a touching endpoint is degenerate.
    // sinh of signed distance from a.p is a monotone coordinate.
    Point d = tangent_toward(a.p, a.q);
    auto tau = [&](const Point& x) { return minkowski(x, d); };
    double a_lo = std::min(tau(a.p), tau(a.q)), a_hi = std::max(tau(a.p), tau(a.q));
    double b_lo = std::min(tau(b.p), tau(b.q)), b_hi = std::max(tau(b.p), tau(b.q));
    if (std::min(a_hi, b_hi) - std::max(a_lo, b_lo) > 1e-9)
        throw DegenerateIncidence("collinear overlap");
    return false;
}

} // namespace maskit2
