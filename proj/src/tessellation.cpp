#include "maskit2/tessellation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace maskit2 {

// ---- labels ----

ArcLabel::ArcLabel(int j_, int k_, Side side, std::vector<int> crossings_)
    : j(j_), k(k_), start_side(side), crossings(std::move(crossings_)) {
    if (j < 1 || k > 6 || j >= k)
        throw InvalidLabel("arc label needs 1 <= j < k <= 6");
    for (size_t i = 0; i < crossings.size(); ++i) {
        if (crossings[i] < 1 || crossings[i] > 6)
            throw InvalidLabel("crossing index out of range");
        if (i > 0 && crossings[i] == crossings[i - 1])
            throw InvalidLabel("repeated crossing index is not taut");
    }
}

bool ArcLabel::is_necklace_arc() const {
    return crossings.empty() && (k == j + 1 || (j == 1 && k == 6));
}

int ArcLabel::necklace_index() const {
    if (!is_necklace_arc()) return 0;
    return k == j + 1 ? j : 6;
}

bool operator<(const ArcLabel& a, const ArcLabel& b) {
    if (a.j != b.j) return a.j < b.j;
    if (a.k != b.k) return a.k < b.k;
    if (a.start_side != b.start_side) return a.start_side < b.start_side;
    return a.crossings < b.crossings;
}

std::string to_string(const ArcLabel& label) {
    if (label.is_necklace_arc())
        return "g" + std::to_string(label.necklace_index());
    std::string s = label.start_side == Side::H ? "b" : "B";
    s += std::to_string(label.j);
    s += std::to_string(label.k);
    if (!label.crossings.empty()) {
        s += "^";
        for (int c : label.crossings) s += std::to_string(c);
    }
    return s;
}

// ---- tiles ----

namespace {

double orient2(double ax, double ay, double bx, double by, double cx, double cy) {
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax);
}

bool point_in_polygon(const std::array<Point, 6>& v, double px, double py) {
    // winding number over the Klein hexagon
    int wn = 0;
    for (int i = 0; i < 6; ++i) {
        double ax = v[i].kx(), ay = v[i].ky();
        double bx = v[(i + 1) % 6].kx(), by = v[(i + 1) % 6].ky();
        if (ay <= py) {
            if (by > py && orient2(ax, ay, bx, by, px, py) > 0.0) ++wn;
        } else {
            if (by <= py && orient2(ax, ay, bx, by, px, py) < 0.0) --wn;
        }
    }
    return wn != 0;
}

void check_embedded(const std::array<Point, 6>& v, const char* what) {
    std::array<int, 6> nxt = {1, 2, 3, 4, 5, 0};
    for (int i = 0; i < 6; ++i)
        for (int j = i + 1; j < 6; ++j) {
            Segment a(v[i], v[nxt[i]]), b(v[j], v[nxt[j]]);
            try {
                if (segments_cross(a, b))
                    throw InvalidNecklace(std::string(what) + " hexagon is not embedded");
            } catch (const DegenerateIncidence&) {
                throw InvalidNecklace(std::string(what) + " hexagon is degenerate");
            }
        }
}

std::array<long long, 4> quantize(const Isometry& g) {
    std::array<long long, 4> k;
    for (int i = 0; i < 4; ++i) k[i] = std::llround(g.m[i] * 1e8);
    return k;
}

} // namespace

Tessellation::Tessellation(const Holonomy& h, double validate_tol) : h_(h) {
    validate(h_, validate_tol);
    adj_tol_ = std::max(1e-9, validate_tol);
    base_.g = Isometry::identity();
    base_.cobase = false;
    base_.vertices = h_.w;

    cobase_.g = Isometry::identity();
    cobase_.cobase = true;
    Isometry pre = Isometry::identity();
    for (int i = 0; i < 6; ++i) {
        cobase_.vertices[i] = apply(pre, h_.w[i]);
        prefix_[i] = pre;
        sigma_[i] = canonical(compose(h_.R[i], inverse(pre)));
        sigma_inv_[i] = inverse(sigma_[i]);
        pre = compose(pre, h_.R[i]);
    }
    check_embedded(cobase_.vertices, "complementary");
}

Side Tessellation::label_side(bool cobase_parity) const {
    if (h_.orientation == +1) return cobase_parity ? Side::Hbar : Side::H;
    return cobase_parity ? Side::H : Side::Hbar;
}

bool Tessellation::internal_parity(Side s) const {
    return label_side(true) == s;
}

Tile Tessellation::adjacent(const Tile& t, int side) const {
    if (side < 1 || side > 6) throw InvalidQuery("side index out of range");
    int i = side - 1;
    Tile n;
    n.cobase = !t.cobase;
    n.g = compose(t.g, t.cobase ? sigma_inv_[i] : sigma_[i]);
    const std::array<Point, 6>& bv = n.cobase ? cobase_.vertices : base_.vertices;
    for (int v = 0; v < 6; ++v) n.vertices[v] = apply(n.g, bv[v]);

    // geometric cross-check: shared side endpoints, opposite interiors
    int i2 = (i + 1) % 6;
    if (!points_close(n.vertices[i], t.vertices[i], adj_tol_) ||
        !points_close(n.vertices[i2], t.vertices[i2], adj_tol_))
        throw TessellationError("adjacency does not share the side vertices");
    double ax = t.vertices[i].kx(), ay = t.vertices[i].ky();
    double bx = t.vertices[i2].kx(), by = t.vertices[i2].ky();
    int io = (i + 3) % 6;
    double s1 = orient2(ax, ay, bx, by, t.vertices[io].kx(), t.vertices[io].ky());
    double s2 = orient2(ax, ay, bx, by, n.vertices[io].kx(), n.vertices[io].ky());
    if (!(s1 * s2 < 0.0))
        throw TessellationError("adjacent tile is not across the shared side");
    return n;
}

Tile Tessellation::start_tile(int j, bool cobase_parity) const {
    if (!cobase_parity) return base_;
    return adjacent(base_, j); // has vertex j at w_j
}

ArcInstance Tessellation::develop(const ArcLabel& label, int simple_depth) const {
    ArcInstance inst;
    inst.label = label;
    if (label.is_necklace_arc()) {
        inst.endpoint_lift = h_.w[label.k - 1];
        inst.endpoint_word = Isometry::identity();
        inst.length = distance(h_.w[label.j - 1], inst.endpoint_lift);
        inst.verified = true;
        inst.simple = true;
        return inst;
    }

    Tile t = start_tile(label.j, internal_parity(label.start_side));
    for (int c : label.crossings) t = adjacent(t, c);
    inst.endpoint_lift = t.vertices[label.k - 1];
    inst.endpoint_word =
        t.cobase ? compose(t.g, prefix_[label.k - 1]) : t.g;
    const Point& start = h_.w[label.j - 1];
    inst.length = distance(start, inst.endpoint_lift);

    Segment s(start, inst.endpoint_lift);
    try {
        TraceResult tr = trace(s);
        inst.verified = tr.start_side == label.start_side && tr.crossings == label.crossings;
    } catch (const Error&) {
        inst.verified = false;
    }
    inst.simple = inst.verified && is_simple(s, simple_depth);
    return inst;
}

TraceResult Tessellation::trace(const Segment& s, int max_tiles) const {
    int j = -1;
    for (int i = 0; i < 6; ++i)
        if (points_close(s.p, h_.w[i], 1e-9)) { j = i; break; }
    if (j < 0)
        throw TessellationError("trace start must be a base cone lift");

    // the four tiles around w_j, alternating parity
    std::array<Tile, 4> ring;
    int sj = j + 1, sp = j == 0 ? 6 : j;
    ring[0] = base_;
    ring[1] = adjacent(ring[0], sj);
    ring[2] = adjacent(ring[1], sp);
    ring[3] = adjacent(ring[2], sj);

    // segment lying along a necklace side: crossing-free by convention
    for (const Tile& t : ring)
        for (int v : {(j + 1) % 6, (j + 5) % 6})
            if (points_close(s.q, t.vertices[v], 1e-9))
                return {Side::H, {}};

    double dirx = s.bx - s.ax, diry = s.by - s.ay;
    double dn = std::hypot(dirx, diry);
    if (dn < 1e-15) throw TessellationError("trace segment is degenerate");
    double eps = 1e-7;
    double px = s.ax + eps * dirx / dn, py = s.ay + eps * diry / dn;
    const Tile* start = nullptr;
    for (const Tile& t : ring) {
        if (point_in_polygon(t.vertices, px, py)) {
            if (start) throw DegenerateIncidence("segment tangent at start vertex");
            start = &t;
        }
    }
    if (!start) throw DegenerateIncidence("segment leaves along a tile boundary");

    TraceResult out;
    out.start_side = label_side(start->cobase);
    Tile cur = *start;
    double tau = 0.0;
    int entry = 0; // 1..6 side we entered through, 0 at start
    for (int steps = 0; steps < max_tiles; ++steps) {
        // exit side: earliest chord intersection strictly ahead
        int best = 0;
        double best_t = 2.0, best_u = 0.0;
        for (int i = 1; i <= 6; ++i) {
            if (i == entry) continue;
            const Point& a = cur.vertices[i - 1];
            const Point& b = cur.vertices[i % 6];
            double rx = s.bx - s.ax, ry = s.by - s.ay;
            double ex = b.kx() - a.kx(), ey = b.ky() - a.ky();
            double den = rx * ey - ry * ex;
            if (std::abs(den) < 1e-14) continue;
            double qx = a.kx() - s.ax, qy = a.ky() - s.ay;
            double t = (qx * ey - qy * ex) / den;
            double u = (qx * ry - qy * rx) / den;
            if (u < -1e-9 || u > 1.0 + 1e-9) continue;
            if (t <= tau + 1e-12 || t >= 1.0 - 1e-10) continue;
            if (t < best_t) { best_t = t; best_u = u; best = i; }
        }
        if (best == 0) {
            // segment must end at a vertex of the current tile
            for (int v = 0; v < 6; ++v)
                if (points_close(s.q, cur.vertices[v], 1e-8))
                    return out;
            throw TessellationError("trace endpoint is not a cone lift");
        }
        if (best_u < 1e-9 || best_u > 1.0 - 1e-9)
            throw DegenerateIncidence("segment passes through a cone lift");
        out.crossings.push_back(best);
        tau = best_t;
        cur = adjacent(cur, best);
        entry = best;
    }
    throw DepthExceeded("trace exceeded tile budget");
}

const std::vector<Isometry>& Tessellation::group_elements(int depth) const {
    if (depth < 0) depth = 0;
    if ((int)elem_cache_.size() <= depth) {
        std::map<std::array<long long, 4>, Isometry> seen;
        Isometry id = Isometry::identity();
        seen[quantize(id)] = id;
        struct Node { Isometry g; int last; };
        std::vector<Node> frontier = {{id, -1}};
        std::vector<Isometry> all = {id};
        elem_cache_.assign(1, all);
        for (int d = 1; d <= depth; ++d) {
            std::vector<Node> next;
            for (const Node& n : frontier)
                for (int i = 0; i < 6; ++i) {
                    if (i == n.last) continue;
                    // scale-normalized, not canonical(): determinants of
                    // long products drown in rounding, the action does not
                    Isometry g = scale_normalized(compose(n.g, h_.R[i]));
                    if (seen.emplace(quantize(g), g).second) all.push_back(g);
                    next.push_back({g, i});
                }
            frontier = std::move(next);
            elem_cache_.push_back(all);
        }
    }
    return elem_cache_[depth];
}

bool Tessellation::is_simple(const Segment& s, int depth) const {
    const std::vector<Isometry>& elems = group_elements(depth);
    for (const Isometry& g : elems) {
        Point p2, q2;
        try {
            p2 = apply(g, s.p);
            q2 = apply(g, s.q);
        } catch (const InvalidPoint&) {
            continue; // image beyond double-precision reach: far away
        }
        bool same = (points_close(p2, s.p, 1e-9) && points_close(q2, s.q, 1e-9)) ||
                    (points_close(p2, s.q, 1e-9) && points_close(q2, s.p, 1e-9));
        if (same) continue;
        Segment t(p2, q2);
        switch (classify_crossing(s, t)) {
        case CrossKind::cross:
        case CrossKind::degenerate: // too close to call: disqualify
            return false;
        case CrossKind::none:
        case CrossKind::same_geodesic: // overlap is not a transverse crossing
            break;
        }
    }
    return true;
}

int Tessellation::crossing_count(const Segment& a, const Segment& b, int depth) const {
    std::vector<double> params;
    double rx = a.bx - a.ax, ry = a.by - a.ay;
    for (const Isometry& g : group_elements(depth)) {
        Point bp, bq;
        try {
            bp = apply(g, b.p);
            bq = apply(g, b.q);
        } catch (const InvalidPoint&) {
            continue; // image beyond double-precision reach: far away
        }
        Segment t(bp, bq);
        CrossKind kind = classify_crossing(a, t);
        if (kind == CrossKind::degenerate)
            throw DegenerateIncidence("tangency in crossing count");
        if (kind != CrossKind::cross) continue;
        double ex = t.bx - t.ax, ey = t.by - t.ay;
        double den = rx * ey - ry * ex;
        double qx = t.ax - a.ax, qy = t.ay - a.ay;
        params.push_back((qx * ey - qy * ex) / den);
    }
    std::sort(params.begin(), params.end());
    int n = 0;
    for (size_t i = 0; i < params.size(); ++i)
        if (i == 0 || params[i] - params[i - 1] > 1e-9) ++n;
    return n;
}

std::vector<ArcInstance> Tessellation::arcs_between(int j, int k, int max_cross,
                                                    double simple_below,
                                                    int simple_depth) const {
    if (j < 1 || j > 6 || k < 1 || k > 6 || j == k)
        throw InvalidQuery("cone indices must be distinct and in 1..6");
    if (j > k) std::swap(j, k);

    std::vector<ArcInstance> out;
    std::vector<int> cr;
    auto emit = [&](Side side) {
        ArcLabel label(j, k, side, cr);
        if (label.is_necklace_arc() && side == Side::Hbar)
            return; // identified with the H-side necklace label
        ArcInstance inst;
        try {
            inst = develop(label, 0);
        } catch (const Error&) {
            return; // lift beyond double-precision reach: class is
                    // astronomically long, irrelevant to any search
        }
        if (!inst.verified) return;
        bool need_simple = simple_below < 0.0 || inst.length <= simple_below;
        if (need_simple) {
            inst.simple = is_simple(Segment(h_.w[j - 1], inst.endpoint_lift), simple_depth);
            if (!inst.simple) return;
        }
        out.push_back(std::move(inst));
    };
    auto rec = [&](auto&& self) -> void {
        emit(Side::H);
        emit(Side::Hbar);
        if ((int)cr.size() >= max_cross) return;
        for (int c = 1; c <= 6; ++c) {
            if (!cr.empty() && cr.back() == c) continue;
            cr.push_back(c);
            self(self);
            cr.pop_back();
        }
    };
    rec(rec);
    std::sort(out.begin(), out.end(), [](const ArcInstance& a, const ArcInstance& b) {
        if (a.length != b.length) return a.length < b.length;
        return a.label < b.label;
    });
    return out;
}

double Tessellation::vertex_angle(const Tile& t, int vertex) {
    if (vertex < 1 || vertex > 6) throw InvalidQuery("vertex index out of range");
    int i = vertex - 1;
    const Point& v = t.vertices[i];
    Point u1 = tangent_toward(v, t.vertices[(i + 5) % 6]);
    Point u2 = tangent_toward(v, t.vertices[(i + 1) % 6]);
    double c = std::clamp(minkowski(u1, u2), -1.0, 1.0);
    return std::acos(c);
}

ArcInstance develop_label(const Holonomy& h, const ArcLabel& label) {
    return Tessellation(h).develop(label);
}

TraceResult trace_segment(const Holonomy& h, const Segment& s) {
    return Tessellation(h).trace(s);
}

// ---- word enumeration ----

namespace {

struct ClassEntry {
    ArcInstance inst;
    int min_word = 0;
};

// Trace the candidate segment [w_j, g w_k]; returns false when the
// candidate is discarded (degenerate, too many crossings, too long).
bool classify(const Tessellation& tess, int j, int k, const Isometry& g,
              int max_cross, double cutoff, ArcInstance& inst) {
    const Holonomy& h = tess.holonomy();
    Point end = apply(g, h.w[k - 1]);
    double c = -minkowski(h.w[j - 1], end);
    if (c < 1.0 + 1e-12) return false; // coincident lifts
    double len = acosh_stable(c);
    if (len > cutoff) return false;
    Segment s(h.w[j - 1], end);
    TraceResult tr;
    try {
        tr = tess.trace(s, max_cross + 2);
    } catch (const Error&) {
        return false;
    }
    if ((int)tr.crossings.size() > max_cross) return false;

    if (j < k) {
        inst.label = ArcLabel(j, k, tr.start_side, tr.crossings);
        inst.endpoint_lift = end;
        inst.endpoint_word = g;
    } else {
        // read the label from the omega_k end; lift the segment so it
        // starts at the base w_k
        Side end_side = tr.crossings.size() % 2 == 0 ? tr.start_side : flip(tr.start_side);
        std::vector<int> rev(tr.crossings.rbegin(), tr.crossings.rend());
        inst.label = ArcLabel(k, j, end_side, std::move(rev));
        inst.endpoint_word = inverse(g);
        inst.endpoint_lift = apply(inst.endpoint_word, h.w[j - 1]);
    }
    inst.length = len;
    inst.verified = true;
    inst.simple = true; // filled in after dedup
    return true;
}

std::vector<ArcInstance> finalize(const Tessellation& tess,
                                  std::map<ArcLabel, ClassEntry>& classes,
                                  int max_word) {
    std::vector<ArcInstance> out;
    for (auto& [label, entry] : classes) {
        entry.inst.converged = entry.min_word <= max_word - 2;
        Segment s(tess.holonomy().w[label.j - 1], entry.inst.endpoint_lift);
        entry.inst.simple = tess.is_simple(s, max_word);
        if (!entry.inst.simple) continue;
        out.push_back(entry.inst);
    }
    std::sort(out.begin(), out.end(), [](const ArcInstance& a, const ArcInstance& b) {
        if (a.length != b.length) return a.length < b.length;
        return a.label < b.label;
    });
    return out;
}

void absorb(std::map<ArcLabel, ClassEntry>& classes, const ArcInstance& inst, int wlen) {
    auto [it, fresh] = classes.try_emplace(inst.label, ClassEntry{inst, wlen});
    if (!fresh && wlen < it->second.min_word) it->second.min_word = wlen;
}

} // namespace

std::vector<ArcInstance> enumerate_arcs_serial(const Holonomy& h, int j, int k,
                                               int max_word, int max_cross,
                                               double length_cutoff) {
    if (j < 1 || j > 6 || k < 1 || k > 6 || j == k)
        throw InvalidQuery("cone indices must be distinct and in 1..6");
    Tessellation tess(h);
    std::map<ArcLabel, ClassEntry> classes;

    struct Node { Isometry g; int last; int len; };
    std::vector<Node> stack = {{Isometry::identity(), -1, 0}};
    while (!stack.empty()) {
        Node n = stack.back();
        stack.pop_back();
        ArcInstance inst;
        if (classify(tess, j, k, n.g, max_cross, length_cutoff, inst))
            absorb(classes, inst, n.len);
        if (n.len >= max_word) continue;
        for (int i = 5; i >= 0; --i) {
            if (i == n.last) continue;
            stack.push_back({compose(n.g, h.R[i]), i, n.len + 1});
        }
    }
    return finalize(tess, classes, max_word);
}

std::vector<ArcInstance> enumerate_arcs(const Holonomy& h, int j, int k,
                                        int max_word, int max_cross,
                                        double length_cutoff) {
    if (j < 1 || j > 6 || k < 1 || k > 6 || j == k)
        throw InvalidQuery("cone indices must be distinct and in 1..6");
    Tessellation tess(h);

    // subtree roots: identity, the six generators, then words of length 2
    struct Root { Isometry g; int last; int len; };
    std::vector<Root> roots = {{Isometry::identity(), -1, 0}};
    for (int a = 0; a < 6; ++a) {
        roots.push_back({h.R[a], a, 1});
        for (int b = 0; b < 6; ++b) {
            if (b == a) continue;
            roots.push_back({compose(h.R[a], h.R[b]), b, 2});
        }
    }

    std::vector<std::map<ArcLabel, ClassEntry>> partial(roots.size());
#pragma omp parallel for schedule(dynamic)
    for (int r = 0; r < (int)roots.size(); ++r) {
        if (roots[r].len > max_word) continue;
        std::map<ArcLabel, ClassEntry>& classes = partial[r];
        struct Node { Isometry g; int last; int len; };
        std::vector<Node> stack = {{roots[r].g, roots[r].last, roots[r].len}};
        while (!stack.empty()) {
            Node n = stack.back();
            stack.pop_back();
            ArcInstance inst;
            if (classify(tess, j, k, n.g, max_cross, length_cutoff, inst))
                absorb(classes, inst, n.len);
            // only the length-2 roots expand, so every word is visited once
            if (n.len >= max_word || roots[r].len < 2) continue;
            for (int i = 5; i >= 0; --i) {
                if (i == n.last) continue;
                stack.push_back({compose(n.g, h.R[i]), i, n.len + 1});
            }
        }
    }

    std::map<ArcLabel, ClassEntry> classes;
    for (const auto& p : partial)
        for (const auto& [label, entry] : p)
            absorb(classes, entry.inst, entry.min_word);
    return finalize(tess, classes, max_word);
}

} // namespace maskit2
