#include "maskit2/orbifold.hpp"

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>
#include <vector>

namespace maskit2 {

namespace {

Point geodesic_step(const Point& p, const Point& u, double l) {
    double ch = std::cosh(l), sh = std::sinh(l);
    return normalize_point(
        {ch * p.x0 + sh * u.x0, ch * p.x1 + sh * u.x1, ch * p.x2 + sh * u.x2});
}

Point transported_tangent(const Point& p, const Point& u, double l) {
    double ch = std::cosh(l), sh = std::sinh(l);
    return {sh * p.x0 + ch * u.x0, sh * p.x1 + ch * u.x1, sh * p.x2 + ch * u.x2};
}

// Tangent at p perpendicular to u, a quarter-turn to the left (Minkowski
// cross product; at the origin it takes (0,1,0) to (0,0,1)).
Point left_normal(const Point& p, const Point& u) {
    return {p.x2 * u.x1 - p.x1 * u.x2,
            p.x2 * u.x0 - p.x0 * u.x2,
            p.x0 * u.x1 - p.x1 * u.x0};
}

double klein_signed_area(const std::array<Point, 6>& w) {
    double s = 0.0;
    for (int i = 0; i < 6; ++i) {
        const Point& a = w[i];
        const Point& b = w[(i + 1) % 6];
        s += a.kx() * b.ky() - b.kx() * a.ky();
    }
    return 0.5 * s;
}

// Vertices of the right-angled hexagon with side cycle
// a1, s13, a3, s35, a5, s51 (left turns, anticlockwise).
std::array<Point, 6> hexagon_vertices(double a1, double a3, double a5) {
    auto seam = [](double x, double y, double opp) {
        double c = (std::cosh(opp) + std::cosh(x) * std::cosh(y)) /
                   (std::sinh(x) * std::sinh(y));
        if (!(c > 1.0))
            throw InvalidParams("seam formula argument out of range");
        return acosh_stable(c);
    };
    double s13 = seam(a1, a3, a5);
    double s35 = seam(a3, a5, a1);
    double s51 = seam(a5, a1, a3);

    std::array<double, 6> len = {a1, s13, a3, s35, a5, s51};
    std::array<Point, 6> v;
    Point p = Point::origin();
    Point u = {0.0, 1.0, 0.0};
    for (int i = 0; i < 6; ++i) {
        v[i] = p;
        Point q = geodesic_step(p, u, len[i]);
        Point t = transported_tangent(p, u, len[i]);
        p = q;
        u = left_normal(p, t);
    }
    if (!points_close(p, v[0], 1e-8))
        throw ConstructionFailure("hexagon walk did not close");
    return v;
}

} // namespace

void validate(const Holonomy& h, double tol) {
    for (int i = 0; i < 6; ++i) {
        if (!point_valid(h.w[i], tol))
            throw Error("cone lift off the hyperboloid");
        const Isometry& r = h.R[i];
        if (std::abs(r.det() - 1.0) > tol || std::abs(r.trace()) > tol)
            throw Error("generator is not a normalized half-turn");
        // entrywise and linear in w: applying r to w and comparing
        // points squares the coordinate scale twice over and drowns
        // far-out cone lifts in rounding
        if (!projectively_equal(r, half_turn(h.w[i]), tol))
            throw Error("generator does not fix its cone lift");
    }
    // The six-fold product cancels intermediate entries of size
    // ||R_1..R_i|| down to order 1; rounding introduced at step i is
    // amplified by the norm of the remaining factors (~ the same
    // partial-product norm again), so the tolerance must track the
    // squared peaks or large-but-exact markings fail the check.
    Isometry prod = h.R[0];
    double noise = 0.0;
    for (int i = 1; i < 6; ++i) {
        prod = compose(prod, h.R[i]);
        double e = 0.0;
        for (double m : prod.m) e = std::max(e, std::abs(m));
        noise += 8.0 * e * e * 1.1e-16;
    }
    double relation_tol = std::max(tol, noise);
    if (!projectively_equal(prod, Isometry::identity(), relation_tol))
        throw Error("half-turn product is not +-identity");

    for (int i = 0; i < 6; ++i)
        if (points_close(h.w[i], h.w[(i + 1) % 6], tol))
            throw InvalidNecklace("necklace arc collapsed");

    std::array<Segment, 6> sides = {
        Segment(h.w[0], h.w[1]), Segment(h.w[1], h.w[2]), Segment(h.w[2], h.w[3]),
        Segment(h.w[3], h.w[4]), Segment(h.w[4], h.w[5]), Segment(h.w[5], h.w[0])};
    for (int i = 0; i < 6; ++i)
        for (int j = i + 1; j < 6; ++j) {
            try {
                if (segments_cross(sides[i], sides[j]))
                    throw InvalidNecklace("necklace hexagon is not embedded");
            } catch (const DegenerateIncidence&) {
                throw InvalidNecklace("necklace hexagon is degenerate");
            }
        }

    double area = klein_signed_area(h.w);
    if (h.orientation != (area > 0.0 ? +1 : -1))
        throw InvalidNecklace("orientation flag contradicts vertex cycle");
}

double necklace_length(const Holonomy& h, int i) {
    if (i < 1 || i > 6)
        throw InvalidParams("necklace index out of range");
    return distance(h.w[i - 1], h.w[i % 6]);
}

Holonomy build_unwrapped(const PantsFoldParams& params) {
    for (double a : {params.a1, params.a3, params.a5})
        if (!(a >= kAMin && a <= kAMax))
            throw InvalidParams("boundary half-length outside admissible range");
    for (double t : {params.t1, params.t3, params.t5})
        if (!std::isfinite(t))
            throw InvalidParams("twist is not finite");

    std::array<Point, 6> v = hexagon_vertices(params.a1, params.a3, params.a5);
    std::array<double, 3> a = {params.a1, params.a3, params.a5};
    std::array<double, 3> t = {params.t1, params.t3, params.t5};

    Holonomy h;
    std::array<Isometry, 3> X;
    for (int i = 0; i < 3; ++i)
        X[i] = compose(half_turn(v[2 * i]), half_turn(v[2 * i + 1]));
    Isometry xprod = compose(X[0], compose(X[1], X[2]));
    if (!projectively_equal(xprod, Isometry::identity(), 1e-9))
        throw ConstructionFailure("boundary holonomies do not multiply to identity");

    // parameter of a known axis point, relative to the axis basepoint
    auto axis_param = [](const Isometry& g, const Point& q) -> double {
        double d = distance(axis_point(g, 0.0), q);
        if (points_close(axis_point(g, d), q, 1e-6)) return d;
        if (points_close(axis_point(g, -d), q, 1e-6)) return -d;
        throw ConstructionFailure("anchor vertex is not on the boundary axis");
    };

    for (int i = 0; i < 3; ++i) {
        // zero twist puts the fold points at the hexagon vertices; the
        // vertices are the feet of the seam perpendiculars, so this
        // origin is intrinsic to the hexagon
        double base = std::min(axis_param(X[i], v[2 * i]),
                               axis_param(X[i], v[2 * i + 1]));
        Point lo = axis_point(X[i], base + t[i]);
        Point hi = axis_point(X[i], base + t[i] + a[i]);
        // order the pair so the half-turn product reproduces X_i
        Point wi = hi, wj = lo;
        if (!projectively_equal(compose(half_turn(wi), half_turn(wj)), X[i], 1e-8)) {
            std::swap(wi, wj);
            if (!projectively_equal(compose(half_turn(wi), half_turn(wj)), X[i], 1e-8))
                throw ConstructionFailure("axis pair does not factor the boundary holonomy");
        }
        h.w[2 * i] = wi;
        h.w[2 * i + 1] = wj;
    }
    for (int i = 0; i < 6; ++i) h.R[i] = canonical(half_turn(h.w[i]));
    h.orientation = klein_signed_area(h.w) > 0.0 ? +1 : -1;
    validate(h);
    return h;
}

Holonomy build(const PantsFoldParams& params) {
    PantsFoldParams p = params;
    // canonical fold window: a full 2a twist is a Dehn twist along the
    // boundary, which leaves the arc-length table invariant
    std::array<double*, 3> t = {&p.t1, &p.t3, &p.t5};
    std::array<double, 3> a = {p.a1, p.a3, p.a5};
    for (int i = 0; i < 3; ++i) {
        if (!std::isfinite(*t[i]))
            throw InvalidParams("twist is not finite");
        *t[i] = std::fmod(*t[i], 2.0 * a[i]);
        if (*t[i] < 0.0) *t[i] += 2.0 * a[i];
    }
    return build_unwrapped(p);
}

Holonomy mirror(const Holonomy& h) {
    Holonomy r = h;
    for (int i = 0; i < 6; ++i) {
        r.w[i].x2 = -r.w[i].x2;
        r.R[i].m[1] = -r.R[i].m[1];
        r.R[i].m[2] = -r.R[i].m[2];
        r.R[i] = canonical(r.R[i]);
    }
    r.orientation = -h.orientation;
    validate(r);
    return r;
}

Holonomy conjugated(const Holonomy& h, const Isometry& g) {
    Isometry gc = canonical(g);
    Isometry gi = inverse(gc);
    Holonomy r = h;
    for (int i = 0; i < 6; ++i) {
        r.w[i] = apply(gc, h.w[i]);
        r.R[i] = canonical(compose(gc, compose(h.R[i], gi)));
    }
    validate(r);
    return r;
}

Holonomy rotated(const Holonomy& h, int shift) {
    Holonomy r = h;
    int s = ((shift % 6) + 6) % 6;
    for (int i = 0; i < 6; ++i) {
        r.w[i] = h.w[(i + s) % 6];
        r.R[i] = h.R[(i + s) % 6];
    }
    validate(r);
    return r;
}

// ---- file format ----

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

double parse_double(const std::string& s, int line) {
    const char* c = s.c_str();
    char* end = nullptr;
    double v = std::strtod(c, &end);
    if (end == c || *end != '\0' || !std::isfinite(v))
        throw ParseError("malformed number '" + s + "'", line);
    return v;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace

OrbifoldFile parse_orbifold(const std::string& text) {
    std::istringstream in(text);
    std::string raw;
    int lineno = 0;
    std::map<std::string, std::pair<std::string, int>> kv;
    std::vector<std::string> order;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = trim(raw);
        if (line.empty() || line[0] == '#') continue;
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ParseError("expected key=value", lineno);
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        if (kv.count(key))
            throw ParseError("duplicate key '" + key + "'", lineno);
        kv[key] = {val, lineno};
        order.push_back(key);
    }
    int end = lineno;
    auto take = [&](const std::string& key) {
        auto it = kv.find(key);
        if (it == kv.end())
            throw ParseError("missing key '" + key + "'", end);
        auto v = it->second;
        kv.erase(it);
        return v;
    };

    if (order.empty() || order.front() != "format")
        throw ParseError("first entry must be format=maskit2/1", 1);
    auto format = take("format");
    if (format.first != "maskit2/1")
        throw ParseError("unsupported format '" + format.first + "'", format.second);
    auto kind = take("kind");

    OrbifoldFile f;
    if (kind.first == "params") {
        f.kind = OrbifoldFile::Kind::params;
        auto num = [&](const char* key) {
            auto v = take(key);
            return parse_double(v.first, v.second);
        };
        f.params.a1 = num("a1");
        f.params.a3 = num("a3");
        f.params.a5 = num("a5");
        f.params.t1 = num("t1");
        f.params.t3 = num("t3");
        f.params.t5 = num("t5");
    } else if (kind.first == "matrices") {
        f.kind = OrbifoldFile::Kind::matrices;
        for (int i = 0; i < 6; ++i) {
            auto v = take("R" + std::to_string(i + 1));
            std::istringstream row(v.first);
            std::string cell;
            int n = 0;
            while (std::getline(row, cell, ',')) {
                if (n >= 4)
                    throw ParseError("matrix row needs exactly 4 entries", v.second);
                f.rmats[i].m[n++] = parse_double(trim(cell), v.second);
            }
            if (n != 4)
                throw ParseError("matrix row needs exactly 4 entries", v.second);
        }
    } else {
        throw ParseError("kind must be params or matrices", kind.second);
    }

    if (!kv.empty()) {
        auto& bad = *kv.begin();
        throw ParseError("unknown key '" + bad.first + "'", bad.second.second);
    }
    return f;
}

std::string serialize_orbifold(const OrbifoldFile& f) {
    std::string out = "format=maskit2/1\n";
    if (f.kind == OrbifoldFile::Kind::params) {
        out += "kind=params\n";
        out += "a1=" + fmt(f.params.a1) + "\n";
        out += "a3=" + fmt(f.params.a3) + "\n";
        out += "a5=" + fmt(f.params.a5) + "\n";
        out += "t1=" + fmt(f.params.t1) + "\n";
        out += "t3=" + fmt(f.params.t3) + "\n";
        out += "t5=" + fmt(f.params.t5) + "\n";
    } else {
        out += "kind=matrices\n";
        for (int i = 0; i < 6; ++i) {
            const auto& m = f.rmats[i].m;
            out += "R" + std::to_string(i + 1) + "=" + fmt(m[0]) + "," + fmt(m[1]) +
                   "," + fmt(m[2]) + "," + fmt(m[3]) + "\n";
        }
    }
    return out;
}

OrbifoldFile to_file(const Holonomy& h) {
    OrbifoldFile f;
    f.kind = OrbifoldFile::Kind::matrices;
    for (int i = 0; i < 6; ++i) f.rmats[i] = canonical(h.R[i]);
    return f;
}

Holonomy holonomy_from_matrices(const std::array<Isometry, 6>& rmats) {
    Holonomy h;
    for (int i = 0; i < 6; ++i) {
        Isometry r = canonical(rmats[i]);
        if (std::abs(r.trace()) > 1e-9)
            throw Error("matrix is not a half-turn");
        // fixed point from the symmetric representation S(p) = R * [[0,1],[-1,0]]
        double a = r.m[0], b = r.m[1], c = r.m[2];
        Point p = {0.5 * (c - b), -0.5 * (b + c), a};
        if (p.x0 < 0.0) p = {-p.x0, -p.x1, -p.x2};
        h.w[i] = normalize_point(p);
        h.R[i] = canonical(half_turn(h.w[i]));
    }
    h.orientation = klein_signed_area(h.w) > 0.0 ? +1 : -1;
    validate(h);
    return h;
}

Holonomy realize(const OrbifoldFile& f) {
    if (f.kind == OrbifoldFile::Kind::params) return build(f.params);
    return holonomy_from_matrices(f.rmats);
}

} // namespace maskit2
