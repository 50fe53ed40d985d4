#pragma once

// The 27-inequality domain test, bounded exhaustive minimality
// verification, necklace completion, and greedy reduction of an
// arbitrary marking into the domain.

#include "maskit2/tessellation.hpp"

#include <optional>
#include <string>
#include <vector>

namespace maskit2 {

struct DomainCheckError : Error { using Error::Error; };
struct BudgetExceeded : Error { using Error::Error; };
struct CompletionError : Error { using Error::Error; };

// One inequality l(gamma_m) <= l(rhs).
struct Inequality {
    int group = 1; // 1..4, equals the necklace index m of the lhs
    ArcLabel rhs;
};

// The 27 inequalities, groups of sizes 4, 15, 6, 2. Self-comparisons
// are dropped and the beta_{1,6}/barred pair is merged into a single
// gamma_2 <= gamma_6 entry.
std::vector<Inequality> theorem1_table();

struct MarginEntry {
    Inequality ineq;
    double lhs_len = 0.0, rhs_len = 0.0;
    double margin = 0.0; // rhs_len - lhs_len
};

struct MaskitReport {
    std::vector<MarginEntry> entries;
    bool in_domain = false; // all margins >= -tol
    double tol = 1e-9;
};

// Evaluates all 27 margins; every rhs realization must verify its
// label (else DomainCheckError).
MaskitReport check(const Holonomy& h, double tol = 1e-9);

// Indices of entries with |margin| <= tol.
std::vector<int> tight_indices(const MaskitReport& r, double tol);

// CSV rows `group,lhs,rhs_label,lhs_len,rhs_len,margin` plus a summary
// row `in_domain,<0|1>`.
std::string report_csv(const MaskitReport& r);

struct CompetitorReport {
    int m = 0;
    double gamma_len = 0.0;
    double worst_margin = 0.0; // min over competitors of l(alpha) - l(gamma_m)
    ArcLabel witness;
    double witness_len = 0.0;
    int candidates = 0;
};

struct MinimalityReport {
    std::array<CompetitorReport, 4> per_m;
    bool minimal = false;  // all worst margins >= -1e-9
    bool complete = false; // enumeration stayed within its bounds
    int max_word = 0, max_cross = 0;
};

// Exhaustive bounded search for chain competitors of gamma_1..gamma_4.
MinimalityReport verify_minimality(const Holonomy& h, int max_word = 8,
                                   int max_cross = 3);

std::string report_csv(const MinimalityReport& r);

// Ordered chain: arcs[i] joins cone points omega[i], omega[i+1 mod n].
struct ChainSpec {
    std::vector<int> omega;
    std::vector<ArcLabel> arcs;
};

// The chain gamma_1..gamma_4 of the current marking.
ChainSpec standard_chain();

// Extends a 4-chain by the unique pair of arcs closing it into a
// necklace (disjoint from the chain and from each other).
ChainSpec complete_necklace(const Holonomy& h, const ChainSpec& c,
                            int max_cross = 3);

struct ReduceReport {
    Holonomy result;
    bool converged = false;
    int iterations = 0;
    std::string note; // failure reason when the greedy step bails out
    // last accepted necklace, labeled on the marking it was found on
    // (arcs may be empty when the trace is degenerate)
    ChainSpec chain;
    // sorted (l(gamma_1)..l(gamma_4)) per iteration, for monotonicity checks
    std::vector<std::array<double, 4>> history;
};

// Greedy remarking into the domain: shortest arc, then shortest chain
// extensions (ties by label), completion, and a coherent rebuild of
// the holonomy; iterates until check() passes or max_iter.
ReduceReport reduce(const Holonomy& h, int max_word = 8, int max_cross = 3,
                    int max_iter = 20);

} // namespace maskit2
