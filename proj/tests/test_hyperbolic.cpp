#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "maskit2/hyperbolic.hpp"

#include <cmath>
#include <optional>
#include <random>

using namespace maskit2;

namespace {

std::mt19937_64 rng(20240811ULL);

Point random_point(double rmax = 2.0) {
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    double d = rmax * ud(rng);
    double th = 2.0 * M_PI * ud(rng);
    return normalize_point({std::cosh(d), std::sinh(d) * std::cos(th),
                            std::sinh(d) * std::sin(th)});
}

Isometry random_hyperbolic() {
    for (;;) {
        Point p = random_point(), q = random_point();
        if (distance(p, q) < 0.1) continue;
        return canonical(compose(half_turn(p), half_turn(q)));
    }
}

Isometry random_isometry() {
    // products of half-turns reach a generic slice of PSL(2,R)
    Isometry g = compose(half_turn(random_point()), half_turn(random_point()));
    if (std::uniform_int_distribution<int>(0, 1)(rng))
        g = compose(g, half_turn(random_point()));
    return canonical(g);
}

// Independent chord-intersection oracle: solve the 2x2 parametric system
// directly and demand strictly interior parameters. Returns nullopt when
// too close to degeneracy to call.
std::optional<bool> chord_cross_oracle(const Segment& a, const Segment& b) {
    double rx = a.bx - a.ax, ry = a.by - a.ay;
    double sx = b.bx - b.ax, sy = b.by - b.ay;
    double den = rx * sy - ry * sx;
    if (std::abs(den) < 1e-9) return std::nullopt;
    double qx = b.ax - a.ax, qy = b.ay - a.ay;
    double t = (qx * sy - qy * sx) / den;
    double u = (qx * ry - qy * rx) / den;
    const double margin = 1e-6;
    if (std::abs(t) < margin || std::abs(t - 1.0) < margin ||
        std::abs(u) < margin || std::abs(u - 1.0) < margin)
        return std::nullopt;
    return t > 0.0 && t < 1.0 && u > 0.0 && u < 1.0;
}

} // namespace

TEST_CASE("distance basics") {
    Point o = Point::origin();
    CHECK(distance(o, o) == doctest::Approx(0.0).epsilon(1e-12));
    Point q = {std::cosh(1.0), std::sinh(1.0), 0.0};
    CHECK(distance(o, q) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("distance equals the Minkowski-product oracle") {
    for (int i = 0; i < 200; ++i) {
        Point p = random_point(), q = random_point();
        double oracle =
            std::acosh(p.x0 * q.x0 - p.x1 * q.x1 - p.x2 * q.x2);
        CHECK(distance(p, q) == doctest::Approx(oracle).epsilon(1e-12));
        CHECK(distance(q, p) == doctest::Approx(distance(p, q)).epsilon(1e-12));
    }
}

TEST_CASE("distance near-coincident points is stable") {
    Point p = random_point();
    Point q = apply(compose(half_turn(axis_point(random_hyperbolic(), 0.0)),
                            half_turn(axis_point(random_hyperbolic(), 1e-8))),
                    p);
    CHECK(distance(p, p) == 0.0);
    CHECK(distance(p, q) >= 0.0);
}

TEST_CASE("half_turn fixes its point and squares to the identity") {
    for (int i = 0; i < 100; ++i) {
        Point p = random_point();
        Isometry r = half_turn(p);
        CHECK(std::abs(r.trace()) < 1e-12);
        CHECK(r.det() == doctest::Approx(1.0).epsilon(1e-12));
        Point fp = apply(r, p);
        CHECK(distance(p, fp) < kMetricTol);
        Point x = random_point();
        CHECK(distance(x, apply(r, apply(r, x))) < kMetricTol);
    }
}

TEST_CASE("product of half-turns translates twice the distance") {
    for (int i = 0; i < 100; ++i) {
        Point p = random_point(), q = random_point();
        double d = distance(p, q);
        if (d < 0.05) continue;
        Isometry g = compose(half_turn(p), half_turn(q));
        CHECK(translation_length(g) == doctest::Approx(2.0 * d).epsilon(1e-9));
    }
}

TEST_CASE("translation_length definition and error cases") {
    Isometry g;
    double c = std::cosh(0.5);
    g.m = {c + std::sqrt(c * c - 1.0), 0.0, 0.0, c - std::sqrt(c * c - 1.0)};
    CHECK(translation_length(g) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK_THROWS_AS(translation_length(half_turn(random_point())), NotHyperbolic);
}

TEST_CASE("axis_point arc-length parametrization and invariance") {
    for (int i = 0; i < 50; ++i) {
        Isometry g = random_hyperbolic();
        double s = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
        double t = std::uniform_real_distribution<double>(-2.0, 2.0)(rng);
        CHECK(distance(axis_point(g, s), axis_point(g, t)) ==
              doctest::Approx(std::abs(s - t)).epsilon(1e-9));
        Point moved = apply(g, axis_point(g, s));
        Point expect = axis_point(g, s + translation_length(g));
        CHECK(distance(moved, expect) < 1e-8);
    }
}

TEST_CASE("axis basepoint through origin is the origin") {
    // axis through the origin: half-turns at (d,0) and (-d,0)
    Point p = normalize_point({std::cosh(0.7), std::sinh(0.7), 0.0});
    Point q = normalize_point({std::cosh(0.4), -std::sinh(0.4), 0.0});
    Isometry g = compose(half_turn(p), half_turn(q));
    CHECK(distance(axis_point(g, 0.0), Point::origin()) < 1e-9);
}

TEST_CASE("isometry action preserves the Minkowski form") {
    for (int i = 0; i < 100; ++i) {
        Isometry g = random_isometry();
        Point p = random_point(), q = random_point();
        CHECK(distance(apply(g, p), apply(g, q)) ==
              doctest::Approx(distance(p, q)).epsilon(1e-9));
    }
}

TEST_CASE("translation length is the infimum of displacement") {
    for (int i = 0; i < 20; ++i) {
        Isometry g = random_hyperbolic();
        double l = translation_length(g);
        // attained exactly on the axis
        Point p = axis_point(g, 0.3);
        CHECK(distance(p, apply(g, p)) == doctest::Approx(l).epsilon(1e-6));
        // off-axis displacement is strictly larger
        for (int k = 0; k < 10; ++k) {
            Point x = random_point();
            CHECK(distance(x, apply(g, x)) >= l - 1e-9);
        }
    }
}

TEST_CASE("segments_cross basics") {
    Point o = Point::origin();
    auto pt = [](double d, double th) {
        return normalize_point(Point{std::cosh(d), std::sinh(d) * std::cos(th),
                                     std::sinh(d) * std::sin(th)});
    };
    // diameters along the x- and y-axes
    Segment sx(pt(1.0, 0.0), pt(1.0, M_PI));
    Segment sy(pt(1.0, M_PI / 2), pt(1.0, -M_PI / 2));
    CHECK(segments_cross(sx, sy));
    CHECK(segments_cross(sy, sx));
    // sharing only an endpoint
    Segment s1(o, pt(1.0, 0.0));
    Segment s2(o, pt(1.0, M_PI / 2));
    CHECK_FALSE(segments_cross(s1, s2));
    // collinear overlap through a shared endpoint is degenerate
    Segment s3(o, pt(1.0, M_PI));
    CHECK_THROWS_AS((void)segments_cross(s1, Segment(pt(0.5, M_PI), pt(0.5, 0.0))),
                    DegenerateIncidence);
    (void)s3;
}

TEST_CASE("segments_cross agrees with the chord oracle") {
    int checked = 0;
    for (int i = 0; i < 500; ++i) {
        Segment a(random_point(), random_point());
        Segment b(random_point(), random_point());
        auto expect = chord_cross_oracle(a, b);
        if (!expect) continue;
        bool got = false;
        try {
            got = segments_cross(a, b);
        } catch (const DegenerateIncidence&) {
            continue;
        }
        CHECK(got == *expect);
        CHECK(segments_cross(b, a) == got); // symmetry
        ++checked;
    }
    CHECK(checked > 300);
}
