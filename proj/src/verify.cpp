#include "maskit2/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <random>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace maskit2 {

namespace {

const double kTol = 1e-9;
const int kCrossDepth = 4;
const int kSimpleDepth = 5;

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

Segment base_segment(const Holonomy& h, const ArcInstance& inst) {
    return Segment(h.w[inst.label.j - 1], inst.endpoint_lift);
}

// Crossing numbers of the arc against the four bracelet sides;
// tangential configurations are rejected as unusable.
bool bracelet_profile(const Tessellation& tess, const Segment& s,
                      const std::array<Segment, 4>& sides,
                      std::array<int, 4>& out) {
    for (int m = 0; m < 4; ++m) {
        try {
            out[m] = tess.crossing_count(s, sides[m], kCrossDepth);
        } catch (const DegenerateIncidence&) {
            return false;
        }
    }
    return true;
}

} // namespace

Bracelet4System extract_bracelet4(const Holonomy& h) {
    Tessellation tess(h);
    Bracelet4System b;
    b.cone = {1, 2, 3, 6};
    b.interior = {4, 5};
    b.side_label = {ArcLabel(1, 2, Side::H, {}), ArcLabel(2, 3, Side::H, {}),
                    ArcLabel(3, 6, Side::H, {}), ArcLabel(1, 6, Side::H, {})};

    std::array<Segment, 4> side_segs = {
        Segment(h.w[0], h.w[0]), Segment(h.w[0], h.w[0]),
        Segment(h.w[0], h.w[0]), Segment(h.w[0], h.w[0])};
    for (int k : {0, 1, 3}) {
        ArcInstance inst = tess.develop(b.side_label[k], 0);
        if (!inst.verified)
            throw InvalidBracelet("bracelet side " + to_string(b.side_label[k]) +
                                  " not realized");
        b.side_len[k] = inst.length;
        side_segs[k] = base_segment(h, inst);
    }
    // The remaining side joins c_2 = omega_3 to c_3 = omega_6. To put the
    // two interior points in different complement components it must cross
    // the necklace arc between them (gamma_4) an odd number of times, while
    // staying clear of the three sides already placed. Several classes may
    // qualify; the shortest one sometimes winds so that no bounded-depth
    // connecting arc avoids it, so candidates are tried in length order
    // until the whole system realizes.
    std::vector<ArcInstance> side2;
    for (const ArcInstance& inst : tess.arcs_between(3, 6, 3, 0.0)) {
        int n4 = 0;
        bool touches_side = false;
        for (int c : inst.label.crossings) {
            if (c == 4) ++n4;
            if (c == 1 || c == 2 || c == 6) touches_side = true;
        }
        if (touches_side || n4 % 2 == 0) continue;
        if (!tess.is_simple(base_segment(h, inst), kSimpleDepth)) continue;
        side2.push_back(inst);
        if (side2.size() >= 4) break;
    }
    if (side2.empty())
        throw InvalidBracelet("no separating side between c_2 and c_3");

    // candidate pools, shared across side choices; the interior-interior
    // pool is deepened lazily when a shallow search comes up empty
    std::array<std::vector<ArcInstance>, 8> kappa_pool;
    for (int k = 0; k < 4; ++k)
        for (int li = 0; li < 2; ++li) {
            int j = std::min(b.cone[k], b.interior[li]);
            int kk = std::max(b.cone[k], b.interior[li]);
            kappa_pool[2 * k + li] = tess.arcs_between(j, kk, 2, 0.0);
        }
    std::vector<ArcInstance> lambda_pool = tess.arcs_between(4, 5, 4, 0.0);
    bool lambda_deepened = false;

    std::string why;
    for (const ArcInstance& cand : side2) {
        b.side_label[2] = cand.label;
        b.side_len[2] = cand.length;
        side_segs[2] = base_segment(h, cand);

        // non-consecutive sides must be disjoint away from cone points
        bool sides_ok = true;
        for (auto [p, q] : {std::pair{0, 2}, {1, 3}}) {
            try {
                if (tess.crossing_count(side_segs[p], side_segs[q], kCrossDepth) != 0) {
                    why = "bracelet sides cross";
                    sides_ok = false;
                }
            } catch (const DegenerateIncidence&) {
                why = "bracelet sides tangent";
                sides_ok = false;
            }
        }
        if (!sides_ok) continue;

        // shortest simple arc from each bracelet cone point to each
        // interior point, crossing no bracelet side
        bool all_kappa = true;
        for (int idx = 0; idx < 8 && all_kappa; ++idx) {
            bool found = false;
            for (const ArcInstance& inst : kappa_pool[idx]) {
                Segment s = base_segment(h, inst);
                std::array<int, 4> prof;
                if (!bracelet_profile(tess, s, side_segs, prof)) continue;
                if (prof != std::array<int, 4>{0, 0, 0, 0}) continue;
                if (!tess.is_simple(s, kSimpleDepth)) continue;
                b.kappa_label[idx] = inst.label;
                b.kappa_len[idx] = inst.length;
                found = true;
                break;
            }
            if (!found) {
                why = "no bracelet-disjoint arc c_" + std::to_string(idx / 2) +
                      " to c_" + std::to_string(4 + idx % 2);
                all_kappa = false;
            }
        }
        if (!all_kappa) continue;

        // interior-to-interior arcs, one crossing profile per side; also
        // confirm the bracelet separates the two interior points
        std::array<bool, 4> found_lambda = {false, false, false, false};
        auto scan = [&](const std::vector<ArcInstance>& pool) -> bool {
            for (const ArcInstance& inst : pool) {
                Segment s = base_segment(h, inst);
                std::array<int, 4> prof;
                if (!bracelet_profile(tess, s, side_segs, prof)) continue;
                int total = prof[0] + prof[1] + prof[2] + prof[3];
                if (total == 0)
                    throw InvalidBracelet(
                        "interior points not separated by the bracelet");
                if (total != 1) continue;
                int k = (int)(std::find(prof.begin(), prof.end(), 1) - prof.begin());
                if (found_lambda[k]) continue; // candidates are length-sorted
                if (!tess.is_simple(s, kSimpleDepth)) continue;
                b.lambda_label[k] = inst.label;
                b.lambda_len[k] = inst.length;
                found_lambda[k] = true;
            }
            return found_lambda[0] && found_lambda[1] && found_lambda[2] &&
                   found_lambda[3];
        };
        bool all = scan(lambda_pool);
        if (!all && !lambda_deepened) {
            lambda_pool = tess.arcs_between(4, 5, 5, 0.0);
            lambda_deepened = true;
            found_lambda = {false, false, false, false};
            all = scan(lambda_pool);
        }
        if (!all) {
            for (int k = 0; k < 4; ++k)
                if (!found_lambda[k])
                    why = "no single-crossing interior arc at side " +
                          std::to_string(k);
            continue;
        }
        return b;
    }
    throw InvalidBracelet(why);
}

Cp2Margins check_cp2(const Bracelet4System& b) {
    Cp2Margins m;
    m.margin_i = b.lambda_len[0] + b.lambda_len[3] - 2.0 * b.kappa(0, 4);
    m.margin_ii = b.lambda_len[0] + b.lambda_len[2] - 2.0 * b.side_len[3];
    m.ok = m.margin_i > kTol && m.margin_ii > kTol;
    return m;
}

TriResult check_tri(const Bracelet4System& b) {
    TriResult r;
    r.m1 = b.kappa(0, 4) - b.kappa(3, 4);
    r.m2 = b.kappa(0, 5) - b.kappa(3, 5);
    r.m3 = b.lambda_len[2] - b.lambda_len[0];
    r.ok = !(r.m1 > kTol && r.m2 > kTol && r.m3 > kTol);
    return r;
}

ObviousResult check_obvious(const Bracelet4System& b) {
    ObviousResult r;
    r.applicable = b.kappa(3, 4) <= b.kappa(0, 4) + kTol &&
                   b.kappa(3, 5) <= b.kappa(0, 5) + kTol &&
                   b.kappa(1, 4) <= b.kappa(2, 4) + kTol;
    r.margin = b.kappa(1, 5) - b.kappa(2, 5);
    r.ok = !r.applicable || r.margin >= -kTol;
    return r;
}

AngleResult check_angle(const Bracelet4System& b) {
    AngleResult r;
    bool hyp = true;
    for (int l : {4, 5}) {
        hyp = hyp && b.side_len[2] <= b.kappa(2, l) + kTol; // kappa_{2,3}
        hyp = hyp && b.side_len[1] <= b.kappa(0, l) + kTol  // kappa_{1,2}
                  && b.side_len[1] <= b.kappa(1, l) + kTol;
        hyp = hyp && b.side_len[0] <= b.kappa(0, l) + kTol  // kappa_{0,1}
                  && b.side_len[0] <= b.kappa(3, l) + kTol;
    }
    r.applicable = hyp;
    r.margin = b.side_len[3] - b.side_len[1]; // kappa_{3,0} - kappa_{1,2}
    r.ok = !r.applicable || r.margin >= -kTol;
    if (r.applicable && std::abs(r.margin) <= 1e-6) {
        r.rigid_case = true;
        double lo = 1e30, hi = -1e30;
        for (double v : b.side_len) { lo = std::min(lo, v); hi = std::max(hi, v); }
        for (double v : b.kappa_len) { lo = std::min(lo, v); hi = std::max(hi, v); }
        r.rigid_ok = hi - lo <= 1e-5;
    }
    return r;
}

SampleSummary run_samples(const SampleConfig& cfg) {
    SampleSummary sum;
    sum.count = cfg.count;
    std::vector<std::string> rows(cfg.count);
    std::vector<int> skipped(cfg.count, 0), violated(cfg.count, 0);

#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic)
#endif
    for (int i = 0; i < cfg.count; ++i) {
        std::mt19937_64 eng(cfg.seed + 0x9E3779B97F4A7C15ULL * (std::uint64_t)(i + 1));
        std::uniform_real_distribution<double> ua(cfg.a_min, cfg.a_max);
        std::uniform_real_distribution<double> ut(0.0, 1.0);
        PantsFoldParams p;
        p.a1 = ua(eng);
        p.a3 = ua(eng);
        p.a5 = ua(eng);
        p.t1 = ut(eng) * 2.0 * p.a1;
        p.t3 = ut(eng) * 2.0 * p.a3;
        p.t5 = ut(eng) * 2.0 * p.a5;
        try {
            Holonomy h = build(p);
            ReduceReport red = reduce(h, cfg.max_word, cfg.max_cross, cfg.max_iter);
            bool in_domain = false;
            try {
                in_domain = check(red.result).in_domain;
            } catch (const DomainCheckError&) {
                in_domain = false;
            }
            double worst = 0.0;
            if (cfg.run_minimality) {
                MinimalityReport mr =
                    verify_minimality(red.result, cfg.max_word, cfg.max_cross);
                worst = 1e30;
                for (const CompetitorReport& c : mr.per_m)
                    worst = std::min(worst, c.worst_margin);
                if (in_domain && worst < -kTol) violated[i] = 1;
            }
            Bracelet4System b = extract_bracelet4(red.result);
            Cp2Margins cp2 = check_cp2(b);
            TriResult tri = check_tri(b);
            ObviousResult obv = check_obvious(b);
            AngleResult ang = check_angle(b);
            bool angle_ok = ang.ok && ang.rigid_ok;
            if (!cp2.ok || !tri.ok || !obv.ok || !angle_ok) violated[i] = 1;
            rows[i] = std::to_string(i) + "," + fmt(p.a1) + "," + fmt(p.a3) + "," +
                      fmt(p.a5) + "," + fmt(p.t1) + "," + fmt(p.t3) + "," +
                      fmt(p.t5) + "," + (in_domain ? "1" : "0") + "," + fmt(worst) +
                      "," + fmt(cp2.margin_i) + "," + fmt(cp2.margin_ii) + "," +
                      (tri.ok ? "1" : "0") + "," + (obv.ok ? "1" : "0") + "," +
                      (angle_ok ? "1" : "0");
        } catch (const Error&) {
            skipped[i] = 1;
        } catch (const std::exception&) {
            skipped[i] = 1;
        }
    }

    sum.csv = "seed_index,a1,a3,a5,t1,t3,t5,in_domain,worst_min_margin,"
              "cp2_i,cp2_ii,tri_ok,obvious_ok,angle_ok\n";
    for (int i = 0; i < cfg.count; ++i) {
        sum.skipped += skipped[i];
        sum.violations += violated[i];
        if (!rows[i].empty()) sum.csv += rows[i] + "\n";
    }
    sum.csv += "skipped," + std::to_string(sum.skipped) + "\n";
    sum.csv += "violations," + std::to_string(sum.violations) + "\n";
    return sum;
}

} // namespace maskit2
