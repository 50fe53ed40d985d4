// Benchmark: OpenMP arc enumeration against the serial reference,
// checking that both produce identical class lists.

#include "maskit2/tessellation.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>

using namespace maskit2;
using clock_type = std::chrono::steady_clock;

namespace {

double seconds(clock_type::time_point a, clock_type::time_point b) {
    return std::chrono::duration<double>(b - a).count();
}

bool same_classes(const std::vector<ArcInstance>& x,
                  const std::vector<ArcInstance>& y) {
    if (x.size() != y.size()) return false;
    for (size_t i = 0; i < x.size(); ++i) {
        if (!(x[i].label == y[i].label)) return false;
        if (std::abs(x[i].length - y[i].length) > 1e-12) return false;
    }
    return true;
}

} // namespace

int main(int argc, char** argv) {
    int max_word = argc > 1 ? std::atoi(argv[1]) : 8;
    int max_cross = argc > 2 ? std::atoi(argv[2]) : 3;

    PantsFoldParams p{1.1, 1.3, 0.9, 0.4, 1.1, 0.7};
    Holonomy h = build(p);

    std::printf("arc enumeration, max_word=%d max_cross=%d\n", max_word, max_cross);
    double ts_total = 0.0, tp_total = 0.0;
    bool all_equal = true;
    for (auto [j, k] : {std::pair{1, 3}, {1, 4}, {2, 5}, {4, 6}}) {
        auto t0 = clock_type::now();
        auto serial = enumerate_arcs_serial(h, j, k, max_word, max_cross);
        auto t1 = clock_type::now();
        auto parallel = enumerate_arcs(h, j, k, max_word, max_cross);
        auto t2 = clock_type::now();
        double ts = seconds(t0, t1), tp = seconds(t1, t2);
        ts_total += ts;
        tp_total += tp;
        bool eq = same_classes(serial, parallel);
        all_equal = all_equal && eq;
        std::printf("  pair (%d,%d): %zu classes, serial %.3fs, parallel %.3fs, "
                    "speedup %.2fx, equal %s\n",
                    j, k, serial.size(), ts, tp, ts / tp, eq ? "yes" : "no");
    }
    std::printf("total: serial %.3fs, parallel %.3fs, speedup %.2fx\n", ts_total,
                tp_total, ts_total / tp_total);
    if (!all_equal) {
        std::printf("MISMATCH between serial and parallel results\n");
        return 1;
    }
    return 0;
}
