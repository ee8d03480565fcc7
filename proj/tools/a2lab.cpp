// Command line front end. Most subcommands build one experiment entry and
// hand it to the same runner used by `a2lab run`.
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "a2lab/coloring.hpp"
#include "a2lab/experiment.hpp"
#include "a2lab/io.hpp"
#include "a2lab/lattice.hpp"

using namespace a2lab;

namespace {

// A path to an existing file becomes "file:PATH"; anything else is a spec.
std::string as_spec(const std::string& s) {
    return std::filesystem::exists(s) ? "file:" + s : s;
}

void print_result(const ExperimentResult& r) {
    std::cout << r.type << ": " << (r.pass ? "PASS" : "FAIL") << "\n" << r.quantities.dump(2) << "\n";
}

int finish(const ExperimentResult& r, const std::string& out) {
    if (!out.empty() && !r.tables.empty()) write_text(out, r.tables.front().second.str());
    print_result(r);
    return r.pass ? 0 : 1;
}

std::vector<int> parse_sweep(const std::string& s) {
    std::vector<int> out;
    auto pos = s.find(':');
    if (pos == std::string::npos) {
        out.push_back(std::stoi(s));
        return out;
    }
    const int lo = std::stoi(s.substr(0, pos)), hi = std::stoi(s.substr(pos + 1));
    for (int r = lo; r <= hi; ++r) out.push_back(r);
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Random dyadic lattices, Haar systems and weighted norm experiments"};
    app.set_version_flag("--version", std::string(version()));
    app.require_subcommand(1);

    // lattice
    auto* lattice = app.add_subcommand("lattice", "Random nested grids");
    lattice->require_subcommand(1);
    std::string l_space, l_out;
    double l_delta = 0.25;
    int l_levels = -1;
    std::uint64_t l_seed = 0, l_trial = 0;
    std::size_t l_cap = 10000000;
    auto* lbuild = lattice->add_subcommand("build", "Sample one lattice");
    lbuild->add_option("--space", l_space, "space JSON or spec")->required();
    lbuild->add_option("--delta", l_delta);
    lbuild->add_option("--levels", l_levels);
    lbuild->add_option("--seed", l_seed);
    lbuild->add_option("--trial", l_trial);
    lbuild->add_option("--out", l_out)->required();
    auto* lenum = lattice->add_subcommand("enumerate", "Enumerate the lattice probability space");
    lenum->add_option("--space", l_space, "space JSON or spec")->required();
    lenum->add_option("--delta", l_delta);
    lenum->add_option("--levels", l_levels);
    lenum->add_option("--cap", l_cap);
    lenum->add_option("--out", l_out, "JSON array of samples");

    // census
    auto* census = app.add_subcommand("census", "Proper colorings and the recoloring map");
    census->require_subcommand(1);
    std::string c_space, c_out;
    int c_v = 0;
    std::size_t c_max = 12;
    double c_unit = 0.5;
    auto* crun = census->add_subcommand("run", "Census of one space around one point");
    crun->add_option("--space", c_space)->required();
    crun->add_option("--v", c_v);
    crun->add_option("--max-points", c_max);
    crun->add_option("--unit", c_unit);
    crun->add_option("--out", c_out);

    // goodness
    auto* goodness = app.add_subcommand("goodness", "Good and bad cubes");
    goodness->require_subcommand(1);
    std::string g_space = "net1d:64", g_sweep = "1:6", g_out;
    double g_delta = 0.125, g_gamma = 0.25;
    std::size_t g_trials = 10000;
    std::uint64_t g_seed = 0;
    int g_point = -1, g_level = -1, g_levels = -1;
    auto* pbad = goodness->add_subcommand("pbad", "Monte Carlo bad-cube probability");
    pbad->add_option("--space", g_space);
    pbad->add_option("--delta", g_delta);
    pbad->add_option("--gamma", g_gamma);
    pbad->add_option("--r-sweep", g_sweep);
    pbad->add_option("--trials", g_trials);
    pbad->add_option("--seed", g_seed);
    pbad->add_option("--point", g_point);
    pbad->add_option("--level", g_level);
    pbad->add_option("--levels", g_levels);
    pbad->add_option("--out", g_out);

    // shift
    auto* shift = app.add_subcommand("shift", "Dyadic shifts");
    shift->require_subcommand(1);
    std::string s_tree = "regular:512:2", s_weights = "a2:1..1000:per-decade=8", s_source = "random", s_out;
    std::vector<std::string> s_cx;
    int s_draws = 20;
    std::uint64_t s_seed = 1;
    auto* sbench = shift->add_subcommand("bench", "Weighted norm scaling of random shifts");
    sbench->add_option("--tree", s_tree);
    sbench->add_option("--complexities", s_cx, "m,n pairs");
    sbench->add_option("--weights", s_weights);
    sbench->add_option("--source", s_source);
    sbench->add_option("--draws", s_draws);
    sbench->add_option("--seed", s_seed);
    sbench->add_option("--out", s_out);

    // bellman
    auto* bellman = app.add_subcommand("bellman", "Bellman function checks");
    bellman->require_subcommand(1);
    double b_alpha = 0.25, b_Q = 100;
    std::size_t b_samples = 100000;
    std::uint64_t b_seed = 1;
    std::string b_tree = "regular:1024:2", b_weights, b_out;
    auto* bcheck = bellman->add_subcommand("check", "Hessian bound on sampled points");
    bcheck->add_option("--alpha", b_alpha);
    bcheck->add_option("--Q", b_Q);
    bcheck->add_option("--samples", b_samples);
    bcheck->add_option("--seed", b_seed);
    bcheck->add_option("--out", b_out);
    auto* btau = bellman->add_subcommand("tau", "Carleson constant of the tau sequence");
    btau->add_option("--tree", b_tree);
    btau->add_option("--alpha", b_alpha);
    btau->add_option("--weights", b_weights);
    btau->add_option("--seed", b_seed);
    btau->add_option("--out", b_out);

    // decompose
    auto* decompose = app.add_subcommand("decompose", "Kernel decomposition checks");
    decompose->require_subcommand(1);
    std::vector<std::string> d_space;
    std::string d_kernel = "inv-dist", d_out;
    int d_r0 = 2, d_levels = -1, d_trials = 5;
    double d_delta = -1.0;
    std::uint64_t d_seed = 1;
    auto* dcheck = decompose->add_subcommand("check", "Decay of Haar coefficients and shift extraction");
    dcheck->add_option("--space", d_space)->required();
    dcheck->add_option("--kernel", d_kernel);
    dcheck->add_option("--r0", d_r0);
    dcheck->add_option("--delta", d_delta);
    dcheck->add_option("--levels", d_levels);
    dcheck->add_option("--seed", d_seed);
    dcheck->add_option("--out", d_out);
    auto* davg = decompose->add_subcommand("avg-identity", "Averaging identity over the enumerated lattices");
    davg->add_option("--space", d_space)->required();
    davg->add_option("--trials", d_trials, "random operators (and f, g pairs per operator)");
    davg->add_option("--delta", d_delta);
    davg->add_option("--levels", d_levels);
    davg->add_option("--seed", d_seed);
    davg->add_option("--out", d_out);

    // run
    auto* run = app.add_subcommand("run", "Run a configuration file");
    std::string r_config, r_out = "results";
    run->add_option("--config", r_config)->required();
    run->add_option("--out-dir", r_out);

    CLI11_PARSE(app, argc, argv);

    try {
        if (lbuild->parsed()) {
            MetricSpace X = space_from_spec(as_spec(l_space));
            HierarchyParams hp;
            hp.delta = l_delta;
            hp.levels = l_levels;
            hp.seed = l_seed;
            LatticeSample s = build_hierarchy(X, hp, l_trial);
            write_json(l_out, sample_to_json(s, X, Measure::uniform(X.size())));
            std::cout << "levels " << s.levels << (s.approximate ? " (approximate grid choice)" : "") << "\n";
            return 0;
        }
        if (lenum->parsed()) {
            MetricSpace X = space_from_spec(as_spec(l_space));
            HierarchyParams hp;
            hp.delta = l_delta;
            hp.levels = l_levels;
            hp.event_cap = l_cap;
            auto all = enumerate_hierarchies(X, hp);
            double total = 0.0;
            for (const auto& s : all) total += s.weight;
            std::cout << "events " << all.size() << "\ntotal probability " << fmt(total) << "\n";
            if (!l_out.empty()) {
                Json arr = Json::array();
                for (const auto& s : all) {
                    Json j = sample_to_json(s, X, Measure::uniform(X.size()));
                    j["weight"] = s.weight;
                    arr.push_back(std::move(j));
                }
                write_json(l_out, arr);
            }
            return 0;
        }
        if (crun->parsed()) {
            MetricSpace Y = space_from_spec(as_spec(c_space));
            if (Y.size() > c_max) throw TooLarge("space has more than --max-points points");
            if (c_v < 0 || static_cast<std::size_t>(c_v) >= Y.size()) throw ConfigError("--v out of range");
            Census c{Y, c_unit, c_max};
            auto rep = verify_injectivity(c, c_v);
            CsvTable tab({"S", "card_ws", "card_image"});
            for (const auto& row : rep.rows) tab.row().add(static_cast<std::size_t>(row.S)).add(row.card_ws).add(row.card_image);
            if (!c_out.empty()) write_text(c_out, tab.str());
            const double bound = std::pow(2.0, 1.0 - static_cast<double>(rep.occupancy));
            std::cout << "colorings " << rep.total << "\nwith v red " << rep.card_b << "\nfraction "
                      << fmt(rep.fraction) << "\nbound " << fmt(bound) << "\n";
            return rep.fraction >= bound ? 0 : 1;
        }
        if (pbad->parsed()) {
            Json e{{"type", "pbad"}, {"space", as_spec(g_space)}, {"delta", g_delta}, {"gamma", g_gamma},
                   {"r", parse_sweep(g_sweep)}, {"trials", g_trials}, {"level", g_level}, {"levels", g_levels}};
            if (g_point >= 0) e["point"] = g_point;
            return finish(run_experiment(e, g_seed), g_out);
        }
        if (sbench->parsed()) {
            Json e{{"type", "shift-bench"}, {"tree", as_spec(s_tree)}, {"weights", s_weights},
                   {"source", s_source}, {"draws", s_draws}};
            if (!s_cx.empty()) {
                Json cx = Json::array();
                for (const auto& c : s_cx) {
                    auto pos = c.find(',');
                    if (pos == std::string::npos) throw ConfigError("complexity must read m,n: " + c);
                    cx.push_back({std::stoi(c.substr(0, pos)), std::stoi(c.substr(pos + 1))});
                }
                e["complexities"] = cx;
            }
            return finish(run_experiment(e, s_seed), s_out);
        }
        if (bcheck->parsed()) {
            Json e{{"type", "bellman"}, {"alphas", {b_alpha}}, {"Qs", {b_Q}}, {"samples", b_samples}};
            return finish(run_experiment(e, b_seed), b_out);
        }
        if (btau->parsed()) {
            Json e{{"type", "tau"}, {"tree", as_spec(b_tree)}, {"alpha", b_alpha}};
            if (!b_weights.empty()) e["weights"] = b_weights;
            return finish(run_experiment(e, b_seed), b_out);
        }
        if (dcheck->parsed()) {
            Json spaces = Json::array();
            for (const auto& s : d_space) spaces.push_back(as_spec(s));
            Json e{{"type", "decay"}, {"spaces", spaces}, {"kernel", d_kernel}, {"r0", d_r0}, {"levels", d_levels}};
            if (d_delta > 0) e["delta"] = d_delta;
            return finish(run_experiment(e, d_seed), d_out);
        }
        if (davg->parsed()) {
            Json spaces = Json::array();
            for (const auto& s : d_space) spaces.push_back(as_spec(s));
            Json e{{"type", "avg-identity"}, {"spaces", spaces}, {"operators", d_trials}, {"pairs", d_trials}};
            if (d_levels > 0) e["levels"] = d_levels;
            if (d_delta > 0) e["delta"] = d_delta;
            return finish(run_experiment(e, d_seed), d_out);
        }
        if (run->parsed()) {
            Report rep = run_config(read_json(r_config));
            emit_report(rep, r_out);
            for (const auto& e : rep.experiments)
                std::cout << e.type << ": " << (e.pass ? "PASS" : "FAIL") << "\n";
            return rep.pass() ? 0 : 1;
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
