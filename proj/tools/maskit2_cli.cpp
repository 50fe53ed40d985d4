// Command-line surface: construct, inspect, check, reduce, verify,
// and render marked orbifolds.

#include "maskit2/maskit.hpp"
#include "maskit2/orbifold.hpp"
#include "maskit2/render.hpp"
#include "maskit2/verify.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

using namespace maskit2;

namespace {

struct Usage : std::runtime_error { using std::runtime_error::runtime_error; };

std::string slurp(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Usage("cannot open input file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void spit(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Usage("cannot open output file: " + path);
    out << text;
}

Holonomy load_holonomy(const std::string& path) {
    return realize(parse_orbifold(slurp(path)));
}

std::string human(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

// Inverse of to_string(ArcLabel): g1..g6, b13, B25^6, ...
ArcLabel parse_label(const std::string& s) {
    auto bad = [&] { return Usage("malformed arc label: " + s); };
    if (s.size() < 2) throw bad();
    if (s[0] == 'g') {
        int i = s[1] - '0';
        if (s.size() != 2 || i < 1 || i > 6) throw bad();
        return i == 6 ? ArcLabel(1, 6, Side::H, {})
                      : ArcLabel(i, i + 1, Side::H, {});
    }
    if ((s[0] != 'b' && s[0] != 'B') || s.size() < 3) throw bad();
    Side side = s[0] == 'b' ? Side::H : Side::Hbar;
    int j = s[1] - '0', k = s[2] - '0';
    std::vector<int> cr;
    if (s.size() > 3) {
        if (s[3] != '^' || s.size() == 4) throw bad();
        for (size_t i = 4; i < s.size(); ++i) {
            if (s[i] < '1' || s[i] > '6') throw bad();
            cr.push_back(s[i] - '0');
        }
    }
    try {
        return ArcLabel(j, k, side, std::move(cr));
    } catch (const Error& e) {
        throw Usage(std::string("bad arc label: ") + e.what());
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"genus-2 quotient orbifold toolkit"};
    app.require_subcommand(1);

    std::string in_path, out_path;
    std::uint64_t seed = 1;
    int max_word = 8, max_cross = 3, count = 500;
    double tol = 1e-9;
    std::vector<std::string> arc_strs;

    auto add_common = [&](CLI::App* c, bool needs_in) {
        if (needs_in) c->add_option("--in", in_path, "input orbifold file")->required();
        c->add_option("--out", out_path, "output file");
        return c;
    };
    CLI::App* c_oct = add_common(app.add_subcommand("oct", "octahedral orbifold"), false);
    CLI::App* c_exc = add_common(
        app.add_subcommand("exceptional", "boundary orbifold with the extremal equalities"),
        false);
    CLI::App* c_rand = add_common(app.add_subcommand("random", "sample a valid orbifold"), false);
    c_rand->add_option("--seed", seed, "random seed");
    CLI::App* c_len = add_common(app.add_subcommand("lengths", "print the 27-entry length table"), true);
    CLI::App* c_chk = add_common(app.add_subcommand("check", "domain membership test"), true);
    c_chk->add_option("--tol", tol, "margin tolerance");
    CLI::App* c_min = add_common(app.add_subcommand("minimality", "bounded competitor search"), true);
    c_min->add_option("--max-word", max_word, "word-length bound");
    c_min->add_option("--max-cross", max_cross, "crossing bound");
    CLI::App* c_red = add_common(app.add_subcommand("reduce", "remark into the domain"), true);
    c_red->add_option("--max-word", max_word, "word-length bound");
    c_red->add_option("--max-cross", max_cross, "crossing bound");
    CLI::App* c_ver = add_common(app.add_subcommand("verify-lemmas", "randomized inequality suite"), false);
    c_ver->add_option("--count", count, "number of samples");
    c_ver->add_option("--seed", seed, "random seed");
    c_ver->add_option("--max-word", max_word, "word-length bound");
    c_ver->add_option("--max-cross", max_cross, "crossing bound");
    CLI::App* c_rnd = add_common(app.add_subcommand("render", "Klein-disk SVG wireframe"), true);
    c_rnd->add_option("--arc", arc_strs, "extra arc labels to draw (e.g. b13, B25^6)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (c_oct->parsed() || c_exc->parsed()) {
            auto [p, h] = c_oct->parsed() ? oct() : exceptional();
            (void)h;
            std::string text = serialize_orbifold(to_file(p));
            if (out_path.empty()) std::cout << text;
            else spit(out_path, text);
            return 0;
        }
        if (c_rand->parsed()) {
            std::mt19937_64 eng(seed);
            std::uniform_real_distribution<double> ua(0.55, 2.2);
            std::uniform_real_distribution<double> ut(0.0, 1.0);
            for (int tries = 0; tries < 1000; ++tries) {
                PantsFoldParams p;
                p.a1 = ua(eng); p.a3 = ua(eng); p.a5 = ua(eng);
                p.t1 = ut(eng) * 2.0 * p.a1;
                p.t3 = ut(eng) * 2.0 * p.a3;
                p.t5 = ut(eng) * 2.0 * p.a5;
                try {
                    build(p);
                } catch (const Error&) {
                    continue;
                }
                std::string text = serialize_orbifold(to_file(p));
                if (out_path.empty()) std::cout << text;
                else spit(out_path, text);
                return 0;
            }
            throw ConstructionFailure("no valid sample after 1000 draws");
        }
        if (c_len->parsed()) {
            Holonomy h = load_holonomy(in_path);
            MaskitReport rep = check(h, tol);
            for (const MarginEntry& e : rep.entries)
                std::cout << "g" << e.ineq.group << " <= " << to_string(e.ineq.rhs)
                          << "  " << human(e.lhs_len) << "  " << human(e.rhs_len)
                          << "  margin " << human(e.margin) << "\n";
            if (!out_path.empty()) spit(out_path, report_csv(rep));
            return 0;
        }
        if (c_chk->parsed()) {
            Holonomy h = load_holonomy(in_path);
            MaskitReport rep = check(h, tol);
            if (out_path.empty()) std::cout << report_csv(rep);
            else spit(out_path, report_csv(rep));
            return rep.in_domain ? 0 : 1;
        }
        if (c_min->parsed()) {
            Holonomy h = load_holonomy(in_path);
            MinimalityReport rep = verify_minimality(h, max_word, max_cross);
            if (out_path.empty()) std::cout << report_csv(rep);
            else spit(out_path, report_csv(rep));
            return rep.minimal && rep.complete ? 0 : 1;
        }
        if (c_red->parsed()) {
            Holonomy h = load_holonomy(in_path);
            ReduceReport rep = reduce(h, max_word, max_cross);
            std::string text = serialize_orbifold(to_file(rep.result));
            if (out_path.empty()) std::cout << text;
            else spit(out_path, text);
            std::cerr << "iterations " << rep.iterations << ", converged "
                      << (rep.converged ? "yes" : "no") << "\n";
            return rep.converged ? 0 : 1;
        }
        if (c_ver->parsed()) {
            SampleConfig cfg;
            cfg.count = count;
            cfg.seed = seed;
            cfg.max_word = max_word;
            cfg.max_cross = max_cross;
            SampleSummary sum = run_samples(cfg);
            if (out_path.empty()) std::cout << sum.csv;
            else spit(out_path, sum.csv);
            std::cerr << "samples " << sum.count << ", skipped " << sum.skipped
                      << ", violations " << sum.violations << "\n";
            return sum.violations == 0 ? 0 : 1;
        }
        if (c_rnd->parsed()) {
            Holonomy h = load_holonomy(in_path);
            std::vector<ArcLabel> arcs;
            for (const std::string& s : arc_strs) arcs.push_back(parse_label(s));
            std::string svg = render_svg(h, arcs);
            if (out_path.empty()) std::cout << svg;
            else spit(out_path, svg);
            return 0;
        }
    } catch (const Usage& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
