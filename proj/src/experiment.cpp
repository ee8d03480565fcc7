#include "a2lab/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>
#include <set>

#include "a2lab/bellman.hpp"
#include "a2lab/coloring.hpp"
#include "a2lab/decomposition.hpp"
#include "a2lab/goodness.hpp"
#include "a2lab/haar.hpp"
#include "a2lab/paraproduct.hpp"
#include "a2lab/rng.hpp"
#include "a2lab/shifts.hpp"
#include "a2lab/stats.hpp"
#include "a2lab/weights.hpp"

namespace a2lab {

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string::npos) return out;
        start = pos + 1;
    }
}

std::size_t to_size(const std::string& s, const std::string& spec) {
    try {
        std::size_t used = 0;
        long v = std::stol(s, &used);
        if (used != s.size() || v < 0) throw std::invalid_argument(s);
        return static_cast<std::size_t>(v);
    } catch (const std::exception&) {
        throw ConfigError("malformed spec '" + spec + "'");
    }
}

// null for non-finite values so the report re-parses to itself
Json num(double v) { return std::isfinite(v) ? Json(v) : Json(); }

}  // namespace

MetricSpace space_from_spec(const std::string& spec) {
    auto p = split(spec, ':');
    const std::string& kind = p[0];
    if (kind == "file") {
        if (p.size() < 2) throw ConfigError("file space needs a path");
        return space_from_json(read_json(spec.substr(5)));
    }
    auto need = [&](std::size_t k) {
        if (p.size() != k) throw ConfigError("space spec '" + spec + "' needs " + std::to_string(k - 1) + " fields");
    };
    if (kind == "net1d") {
        need(2);
        return uniform_net(to_size(p[1], spec));
    }
    if (kind == "net2d") {
        need(2);
        return grid_net(to_size(p[1], spec));
    }
    if (kind == "tree" || kind == "line" || kind == "plane") {
        need(3);
        const std::size_t n = to_size(p[1], spec);
        const std::uint64_t s = to_size(p[2], spec);
        if (kind == "tree") return random_tree_metric(n, s);
        if (kind == "line") return random_line_points(n, s);
        return random_plane_points(n, s);
    }
    throw ConfigError("unknown space kind '" + kind + "'");
}

TreeBundle tree_from_spec(const Json& spec, std::uint64_t seed) {
    TreeBundle b;
    if (spec.is_string()) {
        const std::string s = spec.get<std::string>();
        auto p = split(s, ':');
        if (p[0] == "regular") {
            if (p.size() != 3) throw ConfigError("tree spec '" + s + "' needs regular:N:B");
            const std::size_t n = to_size(p[1], s);
            const int br = static_cast<int>(to_size(p[2], s));
            if (br < 2) throw ConfigError("branching must be at least 2");
            int levels = 0;
            std::size_t m = 1;
            while (m < n) {
                m *= static_cast<std::size_t>(br);
                ++levels;
            }
            if (m != n) throw ConfigError("regular tree size must be a power of the branching");
            b.X = uniform_net(n);
            b.mu = Measure::uniform(n);
            b.tree = CubeTree::regular(n, br, levels, 1.0 / br, b.mu);
            return b;
        }
        if (p[0] == "file") {
            auto ls = sample_from_json(read_json(s.substr(5)));
            b.X = std::move(ls.space);
            b.mu = std::move(ls.mu);
            b.tree = CubeTree::from_sample(ls.sample, b.mu);
            return b;
        }
        throw ConfigError("unknown tree spec '" + s + "'");
    }
    if (!spec.is_object()) throw ConfigError("tree spec must be a string or an object");
    b.X = space_from_spec(spec.value("space", std::string("net1d:64")));
    b.mu = Measure::uniform(b.X.size());
    HierarchyParams hp;
    hp.delta = spec.value("delta", 0.25);
    hp.levels = spec.value("levels", -1);
    hp.seed = spec.value("seed", seed);
    auto s = build_hierarchy(b.X, hp, spec.value("trial", std::uint64_t{0}));
    b.tree = CubeTree::from_sample(s, b.mu);
    return b;
}

bool Report::pass() const {
    return std::all_of(experiments.begin(), experiments.end(), [](const ExperimentResult& e) { return e.pass; });
}

// ---------------------------------------------------------------------------
// config validation

namespace {

enum class Kind { Int, UInt, Num, Str, Bool, NumList, IntList, StrList, Pairs, Tree };

struct Field {
    const char* name;
    Kind kind;
};

const std::map<std::string, std::vector<Field>>& schema() {
    static const std::map<std::string, std::vector<Field>> s = {
        {"cover",
         {{"spaces", Kind::StrList}, {"deltas", Kind::NumList}, {"samples", Kind::UInt}, {"levels", Kind::Int},
          {"exact_cap", Kind::UInt}}},
        {"census",
         {{"count", Kind::UInt}, {"min_points", Kind::UInt}, {"max_points", Kind::UInt}, {"unit", Kind::Num}}},
        {"pbad",
         {{"space", Kind::Str}, {"delta", Kind::Num}, {"gamma", Kind::Num}, {"r", Kind::IntList},
          {"trials", Kind::UInt}, {"point", Kind::Int}, {"level", Kind::Int}, {"levels", Kind::Int},
          {"a", Kind::Num}, {"exponent_margin", Kind::Num}}},
        {"shift-bench",
         {{"tree", Kind::Tree}, {"weights", Kind::Str}, {"complexities", Kind::Pairs}, {"draws", Kind::UInt},
          {"source", Kind::Str}, {"power_stride", Kind::UInt}, {"max_slope", Kind::Num},
          {"power_tol", Kind::Num}}},
        {"bellman",
         {{"alphas", Kind::NumList}, {"Qs", Kind::NumList}, {"samples", Kind::UInt}, {"slack_tol", Kind::Num},
          {"fd_tol", Kind::Num}}},
        {"tau",
         {{"tree", Kind::Tree}, {"weights", Kind::Str}, {"a2_targets", Kind::NumList}, {"alpha", Kind::Num},
          {"max_slope", Kind::Num}}},
        {"decay",
         {{"spaces", Kind::StrList}, {"kernel", Kind::Str}, {"delta", Kind::Num}, {"levels", Kind::Int},
          {"trial", Kind::UInt}, {"r0", Kind::Int}, {"s0", Kind::Int}, {"offset", Kind::Int}, {"eps", Kind::Num},
          {"gamma", Kind::Num}, {"factor", Kind::Num}}},
        {"avg-identity",
         {{"spaces", Kind::StrList}, {"delta", Kind::Num}, {"levels", Kind::Int}, {"operators", Kind::UInt},
          {"pairs", Kind::UInt}, {"gamma", Kind::Num}, {"r", Kind::Int}, {"a", Kind::Num},
          {"tol", Kind::Num}}},
        {"paraproduct",
         {{"tree", Kind::Tree}, {"kernel", Kind::Str}, {"weights", Kind::Str}, {"max_slope", Kind::Num},
          {"adjoint_tol", Kind::Num}}},
    };
    return s;
}

void check_kind(const Json& v, Kind k, const std::string& path) {
    auto bad = [&](const char* what) { throw ConfigError(path + ": expected " + what); };
    switch (k) {
        case Kind::Int:
            if (!v.is_number_integer()) bad("an integer");
            break;
        case Kind::UInt:
            if (!v.is_number_unsigned()) bad("a nonnegative integer");
            break;
        case Kind::Num:
            if (!v.is_number()) bad("a number");
            break;
        case Kind::Str:
            if (!v.is_string()) bad("a string");
            break;
        case Kind::Bool:
            if (!v.is_boolean()) bad("a boolean");
            break;
        case Kind::NumList:
        case Kind::IntList:
        case Kind::StrList:
            if (!v.is_array() || v.empty()) bad("a nonempty array");
            for (std::size_t i = 0; i < v.size(); ++i)
                check_kind(v[i], k == Kind::NumList ? Kind::Num : k == Kind::IntList ? Kind::Int : Kind::Str,
                           path + "[" + std::to_string(i) + "]");
            break;
        case Kind::Pairs:
            if (!v.is_array() || v.empty()) bad("a nonempty array of [m, n] pairs");
            for (std::size_t i = 0; i < v.size(); ++i) {
                const auto& e = v[i];
                const std::string p = path + "[" + std::to_string(i) + "]";
                if (!e.is_array() || e.size() != 2 || !e[0].is_number_unsigned() || !e[1].is_number_unsigned())
                    throw ConfigError(p + ": expected [m, n] with nonnegative integers");
            }
            break;
        case Kind::Tree:
            if (!v.is_string() && !v.is_object()) bad("a tree spec string or object");
            if (v.is_object())
                for (const auto& [key, val] : v.items()) {
                    static const std::set<std::string> ok = {"space", "delta", "levels", "trial", "seed"};
                    if (!ok.count(key)) throw ConfigError(path + "." + key + ": unknown field");
                    if (key == "space" && !val.is_string()) throw ConfigError(path + ".space: expected a string");
                    if (key != "space" && !val.is_number()) throw ConfigError(path + "." + key + ": expected a number");
                }
            break;
    }
}

}  // namespace

void validate_config(const Json& config) {
    if (!config.is_object()) throw ConfigError("config: expected an object");
    static const std::set<std::string> top = {"seed", "experiments", "name", "description"};
    for (const auto& [key, val] : config.items())
        if (!top.count(key)) throw ConfigError(key + ": unknown field");
    if (!config.contains("seed")) throw ConfigError("seed: missing (the seed is mandatory)");
    check_kind(config["seed"], Kind::UInt, "seed");
    if (!config.contains("experiments")) return;
    const auto& ex = config["experiments"];
    if (!ex.is_array()) throw ConfigError("experiments: expected an array");
    for (std::size_t i = 0; i < ex.size(); ++i) {
        const std::string path = "experiments[" + std::to_string(i) + "]";
        const auto& e = ex[i];
        if (!e.is_object()) throw ConfigError(path + ": expected an object");
        if (!e.contains("type") || !e["type"].is_string()) throw ConfigError(path + ".type: missing");
        const std::string type = e["type"].get<std::string>();
        auto it = schema().find(type);
        if (it == schema().end()) throw ConfigError(path + ".type: unknown experiment '" + type + "'");
        for (const auto& [key, val] : e.items()) {
            if (key == "type") continue;
            auto f = std::find_if(it->second.begin(), it->second.end(),
                                  [&](const Field& fd) { return key == fd.name; });
            if (f == it->second.end())
                throw ConfigError(path + "." + key + ": not a parameter of " + type);
            check_kind(val, f->kind, path + "." + key);
        }
    }
}

// ---------------------------------------------------------------------------
// experiments

namespace {

template <class T>
T get(const Json& e, const char* key, T fallback) {
    return e.contains(key) ? e[key].get<T>() : fallback;
}

ExperimentResult run_cover(const Json& e, std::uint64_t seed) {
    ExperimentResult r;
    auto spaces = get<std::vector<std::string>>(e, "spaces", {"net1d:64", "net2d:8", "tree:50:1"});
    auto deltas = get<std::vector<double>>(e, "deltas", {0.25, 0.125});
    const std::size_t samples = get<std::size_t>(e, "samples", 100);
    CsvTable tab({"space", "delta", "levels", "samples", "approximate", "worst_proximity", "worst_grid_cover",
                  "cover_failures", "separation", "maximality", "nesting", "parent_rule", "cover3",
                  "chain_qualifying", "chain_violations"});
    std::size_t total_violations = 0;
    double worst_prox = 0.0;
    for (const auto& sp : spaces) {
        MetricSpace X = space_from_spec(sp);
        for (double d : deltas) {
            HierarchyParams hp;
            hp.delta = d;
            hp.levels = get<int>(e, "levels", -1);
            hp.seed = seed;
            hp.exact_cap = get<std::size_t>(e, "exact_cap", 1024);
            std::vector<CoverReport> cov(samples);
            std::vector<GridLawReport> law(samples);
            std::vector<char> failed(samples, 0), approx(samples, 0);
            int levels = 0;
            for (std::size_t s = 0; s < samples; ++s) {
                LatticeSample ls = build_hierarchy(X, hp, s);
                levels = ls.levels;
                approx[s] = ls.approximate;
                try {
                    cov[s] = verify_cover(X, ls);
                } catch (const CoverGap&) {
                    failed[s] = 1;
                } catch (const ProximityViolation&) {
                    failed[s] = 1;
                }
                law[s] = verify_grid_laws(X, ls);
            }
            GridLawReport sum;
            double prox = 0.0, gcov = 0.0;
            std::size_t fails = 0, approx_count = 0;
            for (std::size_t s = 0; s < samples; ++s) {
                prox = std::max(prox, cov[s].worst_proximity);
                gcov = std::max(gcov, cov[s].worst_grid_cover);
                fails += failed[s];
                approx_count += approx[s];
                sum.separation_violations += law[s].separation_violations;
                sum.maximality_violations += law[s].maximality_violations;
                sum.nesting_violations += law[s].nesting_violations;
                sum.parent_rule_violations += law[s].parent_rule_violations;
                sum.cover3_violations += law[s].cover3_violations;
                sum.chain_qualifying += law[s].chain_qualifying;
                sum.chain_violations += law[s].chain_violations;
            }
            tab.row().add(sp).add(d).add(levels).add(samples).add(approx_count).add(prox).add(gcov).add(fails);
            tab.add(sum.separation_violations).add(sum.maximality_violations).add(sum.nesting_violations);
            tab.add(sum.parent_rule_violations).add(sum.cover3_violations).add(sum.chain_qualifying);
            tab.add(sum.chain_violations);
            total_violations += fails + sum.total();
            worst_prox = std::max(worst_prox, prox);
        }
    }
    r.pass = total_violations == 0 && worst_prox <= 15.0;
    r.quantities["violations"] = total_violations;
    r.quantities["worst_proximity"] = num(worst_prox);
    r.tables.emplace_back("cover", std::move(tab));
    return r;
}

ExperimentResult run_census(const Json& e, std::uint64_t seed) {
    ExperimentResult r;
    const std::size_t count = get<std::size_t>(e, "count", 200);
    const std::size_t lo = get<std::size_t>(e, "min_points", 2);
    const std::size_t hi = get<std::size_t>(e, "max_points", 7);
    const double unit = get<double>(e, "unit", 0.5);
    if (lo < 1 || hi < lo || hi > 20) throw ConfigError("census: need 1 <= min_points <= max_points <= 20");
    CsvTable tab({"space", "n", "v", "occupancy", "total", "card_b", "fraction", "bound", "sets", "max_ws"});
    std::size_t violations = 0, rows = 0;
    double worst_margin = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng = Rng::stream(seed, {i, 0xce75});
        const std::size_t n = lo + static_cast<std::size_t>(rng.below(hi - lo + 1));
        const std::uint64_t s = rng.next();
        MetricSpace Y = i % 3 == 0 ? random_line_points(n, s) : i % 3 == 1 ? random_plane_points(n, s)
                                                                           : random_tree_metric(n, s);
        Census c{Y, unit, 20};
        for (std::size_t v = 0; v < n; ++v) {
            InjectivityReport rep;
            try {
                rep = verify_injectivity(c, static_cast<Index>(v));
            } catch (const InjectivityFailure&) {
                ++violations;
                continue;
            } catch (const ViolationReport&) {
                ++violations;
                continue;
            }
            const double bound = std::pow(2.0, 1.0 - static_cast<double>(rep.occupancy));
            if (rep.fraction < bound) ++violations;
            worst_margin = std::min(worst_margin, rep.fraction - bound);
            std::size_t max_ws = 0;
            for (const auto& row : rep.rows) max_ws = std::max(max_ws, row.card_ws);
            tab.row().add(i).add(n).add(v).add(rep.occupancy).add(rep.total).add(rep.card_b);
            tab.add(rep.fraction).add(bound).add(rep.rows.size()).add(max_ws);
            ++rows;
        }
    }
    r.pass = violations == 0;
    r.quantities["spaces"] = count;
    r.quantities["points"] = rows;
    r.quantities["violations"] = violations;
    r.quantities["worst_margin"] = num(worst_margin);
    r.tables.emplace_back("census", std::move(tab));
    return r;
}

// 2^{1-d}, d the largest number of G_{k+1} points within delta^k of one of them
double membership_bound(const MetricSpace& X, const LatticeSample& s) {
    std::size_t d = 1;
    for (int k = 0; k < s.levels; ++k) {
        const auto& g = s.grids[static_cast<std::size_t>(k) + 1];
        const double scale = std::pow(s.delta, k);
        for (Index y : g) {
            std::size_t cnt = 0;
            for (Index z : g)
                if (X(y, z) <= scale) ++cnt;
            d = std::max(d, cnt);
        }
    }
    return std::pow(2.0, 1.0 - static_cast<double>(d));
}

ExperimentResult run_pbad(const Json& e, std::uint64_t seed) {
    ExperimentResult r;
    MetricSpace X = space_from_spec(get<std::string>(e, "space", "net1d:64"));
    HierarchyParams hp;
    hp.delta = get<double>(e, "delta", 0.125);
    hp.levels = get<int>(e, "levels", -1);
    hp.seed = seed;
    const double gamma = get<double>(e, "gamma", 0.25);
    auto rs = get<std::vector<int>>(e, "r", {1, 2, 3, 4, 5, 6});
    const std::size_t trials = get<std::size_t>(e, "trials", 10000);
    const int point = get<int>(e, "point", static_cast<int>(X.size() / 2));
    const int level = get<int>(e, "level", -1);
    if (point < 0 || static_cast<std::size_t>(point) >= X.size()) throw ConfigError("pbad.point out of range");
    auto rows = estimate_bad_probability(X, hp, gamma, point, level, rs, trials);
    const double a = e.contains("a") ? e["a"].get<double>() : membership_bound(X, build_hierarchy(X, hp, 0));
    const double eta = GoodnessParams::eta_from(a, hp.delta);
    CsvTable tab({"r", "trials", "freq", "stderr"});
    int least = -1;
    Vec xs, ys;
    bool zero_seen = false;
    for (const auto& row : rows) {
        tab.row().add(row.r).add(row.trials).add(row.freq).add(row.stderr_);
        if (least < 0 && row.freq + 2.0 * row.stderr_ <= 0.5) least = row.r;
        // the first zero frequency enters at its rule-of-three upper bound,
        // which keeps the fitted exponent a conservative estimate
        if (row.freq > 0.0 || !zero_seen) {
            xs.push_back(row.r);
            ys.push_back(std::log(row.freq > 0.0 ? row.freq : 3.0 / static_cast<double>(trials)));
            if (row.freq <= 0.0) zero_seen = true;
        }
    }
    const double target = eta * gamma - get<double>(e, "exponent_margin", 0.1);
    double exponent = 0.0;
    if (xs.size() >= 2) exponent = linear_fit(xs, ys).slope / std::log(hp.delta);
    r.pass = least >= 0 && exponent >= target;
    r.quantities["least_r"] = least;
    r.quantities["a"] = num(a);
    r.quantities["eta"] = num(eta);
    r.quantities["exponent"] = num(exponent);
    r.quantities["fitted_points"] = xs.size();
    r.quantities["exponent_target"] = num(target);
    r.tables.emplace_back("pbad", std::move(tab));
    return r;
}

ExperimentResult run_shift_bench(const Json& e, std::uint64_t seed) {
    ExperimentResult r;
    TreeBundle b = tree_from_spec(e.contains("tree") ? e["tree"] : Json("regular:512:2"), seed);
    BallIndex balls(b.X);
    auto weights = weight_family(b.X, balls, b.mu, get<std::string>(e, "weights", "a2:1..1000:per-decade=8"));
    ShiftExperimentParams p;
    if (e.contains("complexities")) {
        p.complexities.clear();
        for (const auto& c : e["complexities"]) p.complexities.emplace_back(c[0].get<int>(), c[1].get<int>());
    }
    p.draws = static_cast<int>(get<std::size_t>(e, "draws", 20));
    p.source = get<std::string>(e, "source", "random");
    p.power_stride = static_cast<int>(get<std::size_t>(e, "power_stride", 4));
    p.seed = seed;
    const double max_slope = get<double>(e, "max_slope", 1.05);
    const double power_tol = get<double>(e, "power_tol", 1e-6);
    auto res = shift_bound_experiment(b.tree, b.mu, weights, p);
    std::map<std::pair<int, int>, double> slope;
    for (const auto& c : res.complexities) slope[{c.m, c.n}] = c.slope;
    CsvTable tab({"complexity", "m", "n", "a2", "norm", "slope"});
    for (const auto& row : res.rows)
        tab.row().add(row.m + row.n + 1).add(row.m).add(row.n).add(row.a2).add(row.norm).add(slope[{row.m, row.n}]);
    CsvTable sum({"m", "n", "slope", "r2", "max_norm", "unweighted", "clamped"});
    bool ok = res.max_power_dense_gap <= power_tol;
    double worst = 0.0;
    for (const auto& c : res.complexities) {
        sum.row().add(c.m).add(c.n).add(c.slope).add(c.r2).add(c.max_norm).add(c.unweighted).add(c.clamped);
        if (c.slope > max_slope) ok = false;
        worst = std::max(worst, c.slope);
    }
    r.pass = ok;
    r.quantities["worst_slope"] = num(worst);
    r.quantities["complexity_exponent"] = num(res.complexity_exponent);
    r.quantities["power_dense_gap"] = num(res.max_power_dense_gap);
    r.quantities["weights"] = weights.size();
    r.tables.emplace_back("shift", std::move(tab));
    r.tables.emplace_back("slopes", std::move(sum));
    return r;
}

ExperimentResult run_bellman(const Json& e, std::uint64_t seed) {
    ExperimentResult r;
    auto alphas = get<std::vector<double>>(e, "alphas", {0.1, 0.25, 0.4});
    auto Qs = get<std::vector<double>>(e, "Qs", {2.0, 10.0, 100.0});
    const std::size_t samples = get<std::size_t>(e, "samples", 100000);
    const double slack_tol = get<double>(e, "slack_tol", 1e-9);
    const double fd_tol = get<double>(e, "fd_tol", 1e-6);
    CsvTable tab({"alpha", "Q", "evaluations", "worst_slack", "worst_positivity", "max_fd_error", "max_value"});
    double worst_slack = std::numeric_limits<double>::infinity(), worst_fd = 0.0, worst_pos = worst_slack;
    for (double a : alphas)
        for (double Q : Qs) {
            auto h = bellman_hessian_check(a, Q, samples, seed);
            tab.row().add(a).add(Q).add(h.evaluations).add(h.worst_slack).add(h.worst_positivity);
            tab.add(h.max_fd_error).add(h.max_value);
            worst_slack = std::min(worst_slack, h.worst_slack);
            worst_pos = std::min(worst_pos, h.worst_positivity);
            worst_fd = std::max(worst_fd, h.max_fd_error);
        }
    r.pass = worst_slack >= -slack_tol && worst_pos >= -slack_tol && worst_fd < fd_tol;
    r.quantities["worst_slack"] = num(worst_slack);
    r.quantities["worst_positivity"] = num(worst_pos);
    r.quantities["max_fd_error"] = num(worst_fd);
    r.tables.emplace_back("bellman", std::move(tab));
    return r;
}

ExperimentResult run_tau(const Json& e, std::uint64_t seed) {
    ExperimentResult r;
    TreeBundle b = tree_from_spec(e.contains("tree") ? e["tree"] : Json("regular:1024:2"), seed);
    BallIndex balls(b.X);
    std::vector<Weight> weights;
    if (e.contains("weights")) {
        weights = weight_family(b.X, balls, b.mu, e["weights"].get<std::string>());
    } else {
        for (double target : get<std::vector<double>>(e, "a2_targets", {2.0, 10.0, 100.0, 1000.0})) {
            const double beta = power_beta_for_a2(b.X, balls, b.mu, target, 0);
            weights.push_back(make_weight(balls, b.mu, power_weight(b.X, beta, 0)));
        }
    }
    const double alpha = get<double>(e, "alpha", 0.25);
    auto res = tau_carleson_experiment(b.tree, b.mu, weights, alpha);
    CsvTable tab({"a2", "q_domain", "carleson", "min_c", "min_difference", "midpoint_ok"});
    bool mid = true;
    for (const auto& row : res.rows) {
        tab.row().add(row.a2).add(row.q_domain).add(row.carleson).add(row.min_c).add(row.min_difference);
        tab.add(row.midpoint_ok ? 1 : 0);
        mid = mid && row.midpoint_ok;
    }
    r.pass = mid && res.slope <= get<double>(e, "max_slope", 0.30);
    r.quantities["slope"] = num(res.slope);
    r.quantities["midpoint_ok"] = mid;
    r.tables.emplace_back("tau", std::move(tab));
    return r;
}

KernelProfile profile_for(const std::string&) { return linear_profile(); }

ExperimentResult run_decay(const Json& e, std::uint64_t seed) {
    ExperimentResult r;
    auto spaces = get<std::vector<std::string>>(e, "spaces", {"net1d:64", "net1d:256"});
    const std::string kernel = get<std::string>(e, "kernel", "inv-dist");
    const int r0 = get<int>(e, "r0", 2);
    const int s0 = get<int>(e, "s0", 1);
    const int offset = get<int>(e, "offset", 0);
    const double eps = get<double>(e, "eps", 1.0);
    const KernelProfile profile = profile_for(kernel);
    const double gamma = get<double>(e, "gamma", GoodnessParams::gamma_from(eps, profile.doubling_const));
    CsvTable tab({"space", "points", "family", "key", "pairs", "max_ratio"});
    CsvTable sum({"space", "points", "worst_in", "worst_out", "comparability", "c_lambda", "worst_normalized",
                  "in_families", "out_families", "out_pairs", "out_contained", "disjoint_residual",
                  "tchi_residual"});
    Vec worst_in, worst_out;
    bool ok = true;
    for (const auto& sp : spaces) {
        MetricSpace X = space_from_spec(sp);
        Measure mu = Measure::uniform(X.size());
        HierarchyParams hp;
        hp.delta = get<double>(e, "delta", 0.25);
        hp.levels = get<int>(e, "levels", -1);
        hp.seed = seed;
        LatticeSample ls = build_hierarchy(X, hp, get<std::size_t>(e, "trial", 0));
        CubeTree t = CubeTree::from_sample(ls, mu);
        HaarSystem hs = HaarSystem::build(t, mu);
        ModelOperator op = build_model_operator(X, mu, kernel, profile);
        Subtracted sub = subtract_paraproducts(t, hs, mu, op.T);
        Eigen::MatrixXd C = haar_coefficient_matrix(t, hs, mu, sub.Ttilde);
        GoodnessParams gp;
        gp.gamma = gamma;
        gp.r = r0;
        auto good = classify_all(X, t, gp);
        PairGeometry geo(X, t);
        auto din = decay_check_in(t, hs, geo, C, good, r0, eps);
        auto dout = decay_check_out(t, hs, geo, C, good, profile, eps);
        for (const auto& row : din.table)
            tab.row().add(sp).add(X.size()).add(std::string("in")).add(row.key).add(row.pairs).add(row.max_ratio);
        for (const auto& row : dout.table)
            tab.row().add(sp).add(X.size()).add(std::string("out")).add(row.key).add(row.pairs).add(row.max_ratio);
        Rng rng = Rng::stream(seed, {X.size(), 0xdeca});
        Vec f(X.size()), g(X.size());
        for (auto& v : f) v = rng.normal();
        for (auto& v : g) v = rng.normal();
        ExtractionReport ext;
        bool overflow = false;
        try {
            ext = extract_shifts(t, hs, mu, geo, C, good, profile, f, g, r0, s0, offset, eps, din, dout);
        } catch (const CoefficientOverflow&) {
            overflow = true;
        }
        if (overflow || ext.worst_normalized > 1.0 + 1e-9) ok = false;
        if (!std::isfinite(din.worst) || !std::isfinite(dout.worst)) ok = false;
        worst_in.push_back(din.worst);
        worst_out.push_back(dout.worst);
        sum.row().add(sp).add(X.size()).add(din.worst).add(dout.worst).add(din.comparability).add(ext.c_lambda);
        sum.add(ext.worst_normalized).add(ext.in.size()).add(ext.out.size()).add(ext.out_pairs);
        sum.add(ext.out_contained).add(sub.disjoint_residual).add(sub.tchi_residual);
    }
    // stability across sizes: largest over smallest positive worst ratio
    auto spread = [](const Vec& v) {
        double lo = std::numeric_limits<double>::infinity(), hi = 0.0;
        for (double x : v)
            if (x > 0.0) {
                lo = std::min(lo, x);
                hi = std::max(hi, x);
            }
        return hi > 0.0 ? hi / lo : 1.0;
    };
    const double factor = get<double>(e, "factor", 2.0);
    const double sp_in = spread(worst_in), sp_out = spread(worst_out);
    r.pass = ok && sp_in <= factor && sp_out <= factor;
    r.quantities["spread_in"] = num(sp_in);
    r.quantities["spread_out"] = num(sp_out);
    r.quantities["gamma"] = num(gamma);
    r.tables.emplace_back("decay", std::move(tab));
    r.tables.emplace_back("summary", std::move(sum));
    return r;
}

ExperimentResult run_avg_identity(const Json& e, std::uint64_t seed) {
    ExperimentResult r;
    auto spaces = get<std::vector<std::string>>(e, "spaces", {"line:4:5", "line:5:5", "plane:5:2", "tree:5:4"});
    const std::size_t ops = get<std::size_t>(e, "operators", 5);
    const std::size_t pairs = get<std::size_t>(e, "pairs", 5);
    const double tol = get<double>(e, "tol", 1e-12);
    CsvTable tab({"space", "points", "events", "a", "operator", "pair", "lhs_ge", "rhs_ge", "residual_ge",
                  "lhs_gt", "rhs_gt", "residual_gt"});
    double worst = 0.0;
    for (const auto& sp : spaces) {
        MetricSpace X = space_from_spec(sp);
        const std::size_t n = X.size();
        Measure mu = Measure::uniform(n);
        HierarchyParams hp;
        hp.delta = get<double>(e, "delta", 0.25);
        hp.levels = get<int>(e, "levels", 2);
        hp.seed = seed;
        GoodnessParams gp;
        gp.gamma = get<double>(e, "gamma", 0.25);
        gp.r = get<int>(e, "r", 1);
        EnumeratedGoodness eg;
        try {
            eg = enumerate_goodness(X, mu, hp, gp);
        } catch (const EnumerationTooLarge& ex) {
            throw EnumerationInfeasible(ex.what());
        }
        for (const auto& s : eg.lattices)
            if (s.approximate) throw EnumerationInfeasible(sp + ": grid choice fell back to greedy");
        const double a = get<double>(e, "a", -1.0) > 0.0 ? e["a"].get<double>() : eg.min_p;
        for (std::size_t o = 0; o < ops; ++o) {
            Rng rng = Rng::stream(seed, {n, o, 0xa1});
            Eigen::MatrixXd T(n, n);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < n; ++j) T(i, j) = rng.normal();
            for (std::size_t q = 0; q < pairs; ++q) {
                Rng frng = Rng::stream(seed, {n, o, q, 0xf9});
                Vec f(n), g(n);
                for (auto& v : f) v = frng.normal();
                for (auto& v : g) v = frng.normal();
                auto id = averaging_identity_check(eg, mu, T, f, g, a);
                tab.row().add(sp).add(n).add(id.events).add(a).add(o).add(q).add(id.lhs_ge).add(id.rhs_ge);
                tab.add(id.residual_ge).add(id.lhs_gt).add(id.rhs_gt).add(id.residual_gt);
                worst = std::max({worst, id.residual_ge, id.residual_gt});
            }
        }
    }
    r.pass = worst <= tol;
    r.quantities["worst_residual"] = num(worst);
    r.tables.emplace_back("identity", std::move(tab));
    return r;
}

ExperimentResult run_paraproduct(const Json& e, std::uint64_t seed) {
    ExperimentResult r;
    TreeBundle b = tree_from_spec(e.contains("tree") ? e["tree"] : Json("regular:256:2"), seed);
    BallIndex balls(b.X);
    auto weights = weight_family(b.X, balls, b.mu, get<std::string>(e, "weights", "a2:1..1000:per-decade=8"));
    const std::string kernel = get<std::string>(e, "kernel", "inv-dist");
    ModelOperator op = build_model_operator(b.X, b.mu, kernel, profile_for(kernel));
    auto res = paraproduct_norm_experiment(b.tree, b.mu, balls, op.T, weights, seed);
    CsvTable tab({"a2", "pi", "pi_star", "o", "o_bound_mean", "o_bound_norm", "ainfty_ratio",
                  "ainfty_ratio_exp_log"});
    bool ainfty = true, obound = true;
    for (const auto& row : res.rows) {
        tab.row().add(row.a2).add(row.pi).add(row.pi_star).add(row.o).add(row.o_bound_mean).add(row.o_bound_norm);
        tab.add(row.ainfty_ratio).add(row.ainfty_ratio_exp_log);
        if (row.ainfty_ratio > 1.0 + 1e-12) ainfty = false;
        if (row.o > row.o_bound_mean * (1.0 + 1e-9) + 1e-14) obound = false;
    }
    const double max_slope = get<double>(e, "max_slope", 1.05);
    const double adj_tol = get<double>(e, "adjoint_tol", 1e-10);
    r.pass = res.slope_pi <= max_slope && res.slope_pi_star <= max_slope && res.adjoint_residual <= adj_tol &&
             res.matrix_residual <= adj_tol && ainfty && obound;
    r.quantities["slope_pi"] = num(res.slope_pi);
    r.quantities["slope_pi_star"] = num(res.slope_pi_star);
    r.quantities["carleson_b"] = num(res.carleson_b);
    r.quantities["carleson_b_star"] = num(res.carleson_b_star);
    r.quantities["t_norm"] = num(res.t_norm);
    r.quantities["carleson_over_norm2"] = num(res.carleson_b / (res.t_norm * res.t_norm));
    r.quantities["adjoint_residual"] = num(res.adjoint_residual);
    r.quantities["identity_residual"] = num(res.identity_residual);
    r.quantities["matrix_residual"] = num(res.matrix_residual);
    r.quantities["constant_residual"] = num(res.constant_residual);
    r.quantities["ainfty_ok"] = ainfty;
    r.quantities["o_bound_ok"] = obound;
    r.tables.emplace_back("paraproduct", std::move(tab));
    return r;
}

}  // namespace

ExperimentResult run_experiment(const Json& entry, std::uint64_t seed) {
    using Runner = ExperimentResult (*)(const Json&, std::uint64_t);
    static const std::map<std::string, Runner> runners = {
        {"cover", run_cover},   {"census", run_census},   {"pbad", run_pbad},
        {"shift-bench", run_shift_bench}, {"bellman", run_bellman}, {"tau", run_tau},
        {"decay", run_decay},   {"avg-identity", run_avg_identity}, {"paraproduct", run_paraproduct},
    };
    const std::string type = entry.at("type").get<std::string>();
    auto it = runners.find(type);
    if (it == runners.end()) throw ConfigError("unknown experiment '" + type + "'");
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentResult r = it->second(entry, seed);
    r.type = type;
    r.runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return r;
}

Report run_config(const Json& config) {
    validate_config(config);
    Report rep;
    rep.version = version();
    rep.config_hash = json_hash(config);
    rep.seed = config["seed"].get<std::uint64_t>();
    if (!config.contains("experiments")) return rep;
    const auto& ex = config["experiments"];
    for (std::size_t i = 0; i < ex.size(); ++i) {
        try {
            rep.experiments.push_back(run_experiment(ex[i], rep.seed));
        } catch (const ConfigError& e) {
            throw ConfigError("experiments[" + std::to_string(i) + "]: " + e.what());
        } catch (const Error& e) {
            throw ExperimentFailed("experiments[" + std::to_string(i) + "] (" + ex[i]["type"].get<std::string>() +
                                   "): " + e.what());
        }
    }
    return rep;
}

namespace {

std::string table_file(std::size_t i, const ExperimentResult& e, const std::string& name) {
    char buf[16];
    std::snprintf(buf, sizeof buf, "%02zu", i);
    return std::string(buf) + "_" + e.type + "_" + name + ".csv";
}

}  // namespace

Json report_to_json(const Report& r) {
    Json j;
    j["version"] = r.version;
    j["config_hash"] = r.config_hash;
    j["seed"] = r.seed;
    j["pass"] = r.pass();
    j["experiments"] = Json::array();
    for (std::size_t i = 0; i < r.experiments.size(); ++i) {
        const auto& e = r.experiments[i];
        Json x;
        x["index"] = i;
        x["type"] = e.type;
        x["pass"] = e.pass;
        x["seed"] = r.seed;
        x["runtime_s"] = e.runtime;
        x["quantities"] = e.quantities;
        x["tables"] = Json::array();
        for (const auto& [name, tab] : e.tables) x["tables"].push_back(table_file(i, e, name));
        j["experiments"].push_back(std::move(x));
    }
    return j;
}

void emit_report(const Report& r, const std::string& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir + ": " + ec.message());
    write_json(out_dir + "/report.json", report_to_json(r));
    for (std::size_t i = 0; i < r.experiments.size(); ++i)
        for (const auto& [name, tab] : r.experiments[i].tables)
            write_text(out_dir + "/" + table_file(i, r.experiments[i], name), tab.str());
}

}  // namespace a2lab
