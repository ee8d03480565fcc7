#include "a2lab/goodness.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "a2lab/parallel.hpp"
#include "a2lab/rng.hpp"

namespace a2lab {

double GoodnessParams::gamma_from(double eps, double C) { return eps / (2.0 * (eps + std::log2(C))); }
double GoodnessParams::eta_from(double a, double delta) { return std::log(1.0 - a) / std::log(delta); }

double distance_to_complement(const MetricSpace& X, const CubeTree& t, int cube, int n) {
    const int anc = t.ancestor(cube, t[cube].generation - n);
    const auto& A = t[anc];
    double d = std::numeric_limits<double>::infinity();
    if (A.members.size() == X.size()) return d;
    std::vector<char> in(X.size(), 0);
    for (Index x : A.members) in[x] = 1;
    for (Index x : t[cube].members) {
        const double* row = X.row(x);
        for (std::size_t y = 0; y < X.size(); ++y)
            if (!in[y]) d = std::min(d, row[y]);
    }
    return d;
}

GoodnessVerdict classify_good(const MetricSpace& X, const CubeTree& t, int cube, const GoodnessParams& gp) {
    GoodnessVerdict v;
    v.cube = cube;
    const int k = t[cube].generation;
    const double delta = t.delta();
    // Every generation-n cube other than the ancestor is disjoint from Q and
    // lies in X \ A, so the universal condition over all Q1 reduces to the
    // ancestor's complement distance.
    for (int n = 0; n <= k - gp.r; ++n) {
        Witness w;
        w.generation = n;
        w.cube = t.ancestor(cube, k - n);
        w.distance = distance_to_complement(X, t, cube, n);
        w.threshold = std::pow(delta, k * gp.gamma) * std::pow(delta, n * (1.0 - gp.gamma));
        w.inside = true;
        if (w.distance < w.threshold) v.is_good = false;
        v.witnesses.push_back(w);
    }
    return v;
}

std::vector<char> classify_all(const MetricSpace& X, const CubeTree& t, const GoodnessParams& gp) {
    std::vector<char> g(t.size());
    for (std::size_t c = 0; c < t.size(); ++c) g[c] = classify_good(X, t, static_cast<int>(c), gp).is_good;
    return g;
}

namespace {

// smallest r at which the cube is good (k + 1 means never bad / vacuous)
int first_good_r(const MetricSpace& X, const CubeTree& t, int cube, double gamma) {
    const int k = t[cube].generation;
    // bad at r iff some n <= k - r fails; find the largest failing n
    int worst = -1;
    for (int n = 0; n <= k - 1; ++n) {
        const double thr = std::pow(t.delta(), k * gamma) * std::pow(t.delta(), n * (1.0 - gamma));
        if (distance_to_complement(X, t, cube, n) < thr) worst = n;
    }
    return worst < 0 ? 1 : k - worst + 1;
}

}  // namespace

std::vector<BadRow> estimate_bad_probability(const MetricSpace& X, const HierarchyParams& hp, double gamma, Index x,
                                             int k, const std::vector<int>& r_values, std::size_t trials) {
    std::vector<int> first(trials);
    const Measure mu = Measure::uniform(X.size());
    parallel_for(trials, [&](std::size_t tr) {
        LatticeSample s = build_hierarchy(X, hp, tr);
        CubeTree t = CubeTree::from_sample(s, mu);
        const int gen = k < 0 ? t.levels() : k;
        first[tr] = first_good_r(X, t, t.cube_of(gen, x), gamma);
    });
    std::vector<BadRow> rows;
    for (int r : r_values) {
        std::size_t bad = 0;
        for (int f : first)
            if (r < f) ++bad;
        BadRow row;
        row.r = r;
        row.trials = trials;
        row.freq = static_cast<double>(bad) / static_cast<double>(trials);
        row.stderr_ = std::sqrt(row.freq * (1.0 - row.freq) / static_cast<double>(trials));
        rows.push_back(row);
    }
    return rows;
}

std::vector<double> exact_bad_probability(const MetricSpace& X, const HierarchyParams& hp, double gamma, Index x, int k,
                                          const std::vector<int>& r_values) {
    auto all = enumerate_hierarchies(X, hp);
    const Measure mu = Measure::uniform(X.size());
    std::vector<double> p(r_values.size(), 0.0);
    for (const auto& s : all) {
        CubeTree t = CubeTree::from_sample(s, mu);
        const int gen = k < 0 ? t.levels() : k;
        const int f = first_good_r(X, t, t.cube_of(gen, x), gamma);
        for (std::size_t i = 0; i < r_values.size(); ++i)
            if (r_values[i] < f) p[i] += s.weight;
    }
    return p;
}

std::vector<BoundaryRow> boundary_hit_probability(const MetricSpace& X, const HierarchyParams& hp, Index x, int k,
                                                  const std::vector<double>& eps, std::size_t trials) {
    std::vector<double> dout(trials);
    parallel_for(trials, [&](std::size_t tr) {
        LatticeSample s = build_hierarchy(X, hp, tr);
        const auto& lab = s.assignment[static_cast<std::size_t>(k)];
        double d = std::numeric_limits<double>::infinity();
        for (std::size_t y = 0; y < X.size(); ++y)
            if (lab[y] != lab[x]) d = std::min(d, X(x, static_cast<Index>(y)));
        dout[tr] = d / std::pow(hp.delta, k);
    });
    std::vector<BoundaryRow> rows;
    for (double e : eps) {
        // x sits in its own cube, so the collar condition reduces to the
        // distance from x to the other cubes
        std::size_t hit = 0;
        for (double d : dout)
            if (d <= e) ++hit;
        BoundaryRow row;
        row.eps = e;
        row.freq = static_cast<double>(hit) / static_cast<double>(trials);
        row.stderr_ = std::sqrt(row.freq * (1.0 - row.freq) / static_cast<double>(trials));
        rows.push_back(row);
    }
    return rows;
}

EnumeratedGoodness enumerate_goodness(const MetricSpace& X, const Measure& mu, const HierarchyParams& hp,
                                      const GoodnessParams& gp) {
    EnumeratedGoodness eg;
    eg.lattices = enumerate_hierarchies(X, hp);
    const std::size_t L = eg.lattices.size();
    eg.trees.resize(L);
    eg.good.resize(L);
    for (std::size_t i = 0; i < L; ++i) {
        eg.trees[i] = CubeTree::from_sample(eg.lattices[i], mu);
        eg.good[i] = classify_all(X, eg.trees[i], gp);
    }
    // group cubes by (generation, labeled partition of that generation, label);
    // the coarser randomness depends on the finer levels only through G_k
    using Key = std::pair<std::pair<int, Index>, std::vector<Index>>;
    std::map<Key, std::pair<double, double>> acc;  // (good mass, total mass)
    auto key_of = [&](std::size_t i, int c) {
        const Cube& q = eg.trees[i][c];
        return Key{{q.generation, q.label}, eg.lattices[i].assignment[static_cast<std::size_t>(q.generation)]};
    };
    for (std::size_t i = 0; i < L; ++i)
        for (std::size_t c = 0; c < eg.trees[i].size(); ++c) {
            auto& slot = acc[key_of(i, static_cast<int>(c))];
            slot.second += eg.lattices[i].weight;
            if (eg.good[i][c]) slot.first += eg.lattices[i].weight;
        }
    eg.p.resize(L);
    eg.min_p = 1.0;
    for (std::size_t i = 0; i < L; ++i) {
        eg.p[i].resize(eg.trees[i].size());
        for (std::size_t c = 0; c < eg.trees[i].size(); ++c) {
            const auto& slot = acc[key_of(i, static_cast<int>(c))];
            eg.p[i][c] = slot.first / slot.second;
            eg.min_p = std::min(eg.min_p, eg.p[i][c]);
        }
    }
    return eg;
}

std::vector<std::vector<double>> really_good_adjust(const EnumeratedGoodness& eg, double a) {
    std::vector<std::vector<double>> q(eg.lattices.size());
    for (std::size_t i = 0; i < eg.lattices.size(); ++i) {
        q[i].assign(eg.trees[i].size(), 0.0);
        for (std::size_t c = 0; c < eg.trees[i].size(); ++c) {
            const double p = eg.p[i][c];
            if (a > p + 1e-15)
                throw AExceedsP("cube " + std::to_string(eg.trees[i][static_cast<int>(c)].label) + " at generation " +
                                std::to_string(eg.trees[i][static_cast<int>(c)].generation) + ": a = " +
                                std::to_string(a) + " > p_Q = " + std::to_string(p));
            if (eg.good[i][c] && p > 0.0) q[i][c] = std::min(1.0, a / p);
        }
    }
    return q;
}

void really_good_sample(std::vector<GoodnessVerdict>& verdicts, double a, std::uint64_t seed, std::uint64_t trial) {
    for (auto& v : verdicts) {
        if (v.is_good && a > v.p_q + 1e-15) throw AExceedsP("cube " + std::to_string(v.cube) + ": a > p_Q");
        Rng rng = Rng::stream(seed, {trial, static_cast<std::uint64_t>(v.cube), 0x5e11ULL});
        v.xi = rng.uniform();
        v.really_good = v.is_good && v.p_q > 0.0 && v.xi * v.p_q <= a;
    }
}

}  // namespace a2lab
