#pragma once

// Length-4 bracelet arc systems and the numerical verification
// harness for their length inequalities, plus randomized sampling
// over the fold parameter space.

#include "maskit2/maskit.hpp"

#include <cstdint>
#include <string>

namespace maskit2 {

struct InvalidBracelet : Error { using Error::Error; };

// A 4-bracelet with one interior cone point on each side of it.
// Cone points c_0..c_3 lie on the bracelet (indices mod 4), c_4 and
// c_5 are interior. kappa(k, l) joins c_k to c_l without crossing the
// bracelet; lambda[k] joins c_4 to c_5 crossing side k exactly once.
struct Bracelet4System {
    std::array<int, 4> cone;       // necklace indices of c_0..c_3
    std::array<int, 2> interior;   // necklace indices of c_4, c_5
    std::array<ArcLabel, 4> side_label;
    std::array<double, 4> side_len;      // l(kappa_{k,k+1})
    std::array<ArcLabel, 8> kappa_label; // index 2k + (l-4)
    std::array<double, 8> kappa_len;
    std::array<ArcLabel, 4> lambda_label;
    std::array<double, 4> lambda_len;

    double kappa(int k, int l) const { return kappa_len[2 * k + (l - 4)]; }
};

// Canonical bracelet (c_0..c_3) = (omega_1, omega_2, omega_3, omega_6)
// with sides gamma_1, gamma_2, beta_{3,6}, gamma_6 and interior points
// omega_4, omega_5. All arc realizations are shortest in their
// crossing class; every invariant is validated geometrically.
Bracelet4System extract_bracelet4(const Holonomy& h);

struct Cp2Margins {
    double margin_i = 0.0;  // l(lambda_0)+l(lambda_3) - 2 l(kappa_{0,4})
    double margin_ii = 0.0; // l(lambda_0)+l(lambda_2) - 2 l(kappa_{3,0})
    bool ok = false;        // both strictly positive beyond 1e-9
};
Cp2Margins check_cp2(const Bracelet4System& b);

struct TriResult {
    // the forbidden strictly-satisfied triple
    double m1 = 0.0; // l(kappa_{0,4}) - l(kappa_{3,4})
    double m2 = 0.0; // l(kappa_{0,5}) - l(kappa_{3,5})
    double m3 = 0.0; // l(lambda_2) - l(lambda_0)
    bool ok = true;  // false iff all three margins exceed 1e-9
};
TriResult check_tri(const Bracelet4System& b);

struct ObviousResult {
    bool applicable = false; // all three hypotheses hold within 1e-9
    double margin = 0.0;     // l(kappa_{1,5}) - l(kappa_{2,5})
    bool ok = true;          // margin >= -1e-9 whenever applicable
};
ObviousResult check_obvious(const Bracelet4System& b);

struct AngleResult {
    bool applicable = false;  // corollary hypotheses hold within 1e-9
    double margin = 0.0;      // l(kappa_{3,0}) - l(kappa_{1,2})
    bool ok = true;           // margin >= -1e-9 whenever applicable
    bool rigid_case = false;  // applicable and |margin| <= 1e-6
    bool rigid_ok = true;     // then all 12 kappa lengths equal within 1e-5
};
AngleResult check_angle(const Bracelet4System& b);

struct SampleConfig {
    int count = 500;
    std::uint64_t seed = 1;
    double a_min = 0.55, a_max = 2.2; // side-length draw range
    int max_word = 8, max_cross = 3;
    int max_iter = 20;
    bool run_minimality = true;
};

struct SampleSummary {
    int count = 0;
    int skipped = 0;    // draws rejected during construction or extraction
    int violations = 0; // samples failing any inequality check
    std::string csv;
};

// Deterministic given the seed: draws fold parameters, reduces into
// the domain, runs the domain check, bounded minimality verification,
// and all bracelet inequality checks. One CSV row per completed
// sample, merged in seed-index order.
SampleSummary run_samples(const SampleConfig& cfg);

} // namespace maskit2
