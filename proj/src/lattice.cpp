#include "a2lab/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace a2lab {

double LatticeSample::side(int k) const { return std::pow(delta, k); }

void check_params(const HierarchyParams& p) {
    if (!(p.delta > 0.0 && p.delta <= 0.25))
        throw ConfigError("delta must lie in (0, 1/4], got " + std::to_string(p.delta));
}

int auto_levels(const MetricSpace& X, double delta, int max_levels) {
    if (X.size() <= 1) return 0;
    int N = 0;
    double s = 1.0;
    while (!(s < X.min_separation()) && N < max_levels) {
        s *= delta;
        ++N;
    }
    return N;
}

int resolve_levels(const MetricSpace& X, const HierarchyParams& p) {
    return p.levels >= 0 ? p.levels : auto_levels(X, p.delta, p.max_auto_levels);
}

bool is_separated(const MetricSpace& X, const std::vector<Index>& set, double threshold) {
    for (std::size_t a = 0; a < set.size(); ++a)
        for (std::size_t b = a + 1; b < set.size(); ++b)
            if (!(X(set[a], set[b]) > threshold)) return false;
    return true;
}

bool is_maximal(const MetricSpace& X, const std::vector<Index>& set, const std::vector<Index>& candidates,
                double threshold) {
    for (Index c : candidates) {
        if (std::find(set.begin(), set.end(), c) != set.end()) continue;
        bool addable = true;
        for (Index s : set)
            if (!(X(c, s) > threshold)) {
                addable = false;
                break;
            }
        if (addable) return false;
    }
    return true;
}

std::vector<Index> greedy_grid(const MetricSpace& X, const std::vector<Index>& candidates, double threshold) {
    std::vector<Index> out;
    for (Index c : candidates) {
        bool ok = true;
        for (Index s : out)
            if (!(X(c, s) > threshold)) {
                ok = false;
                break;
            }
        if (ok) out.push_back(c);
    }
    std::sort(out.begin(), out.end());
    return out;
}

namespace {

// Dynamic bitset over candidate positions.
struct Bits {
    std::vector<std::uint64_t> w;
    explicit Bits(std::size_t n = 0) : w((n + 63) / 64, 0) {}
    void set(std::size_t i) { w[i >> 6] |= std::uint64_t{1} << (i & 63); }
    void reset(std::size_t i) { w[i >> 6] &= ~(std::uint64_t{1} << (i & 63)); }
    bool test(std::size_t i) const { return (w[i >> 6] >> (i & 63)) & 1; }
    bool any() const {
        for (auto v : w)
            if (v) return true;
        return false;
    }
    std::size_t count_and(const Bits& o) const {
        std::size_t c = 0;
        for (std::size_t i = 0; i < w.size(); ++i) c += static_cast<std::size_t>(__builtin_popcountll(w[i] & o.w[i]));
        return c;
    }
    Bits operator&(const Bits& o) const {
        Bits r;
        r.w.resize(w.size());
        for (std::size_t i = 0; i < w.size(); ++i) r.w[i] = w[i] & o.w[i];
        return r;
    }
    template <class Fn>
    void each(Fn&& fn) const {
        for (std::size_t i = 0; i < w.size(); ++i) {
            std::uint64_t v = w[i];
            while (v) {
                int b = __builtin_ctzll(v);
                fn(i * 64 + static_cast<std::size_t>(b));
                v &= v - 1;
            }
        }
    }
};

// Bron-Kerbosch with pivoting on the compatibility graph: maximal cliques of
// "pairwise > threshold" are the maximal separated subsets.
struct MisEnumerator {
    std::vector<Bits> compat;
    std::size_t cap;
    std::vector<std::vector<std::size_t>> out;
    std::vector<std::size_t> current;

    void run(Bits P, Bits Xs) {
        if (!P.any() && !Xs.any()) {
            if (out.size() >= cap) throw EnumerationTooLarge("more than " + std::to_string(cap) + " maximal grids");
            out.push_back(current);
            return;
        }
        std::size_t pivot = 0, best = 0;
        bool have = false;
        auto consider = [&](std::size_t u) {
            std::size_t c = P.count_and(compat[u]);
            if (!have || c > best) {
                best = c;
                pivot = u;
                have = true;
            }
        };
        P.each(consider);
        Xs.each(consider);
        std::vector<std::size_t> todo;
        P.each([&](std::size_t v) {
            if (!compat[pivot].test(v)) todo.push_back(v);
        });
        for (std::size_t v : todo) {
            current.push_back(v);
            run(P & compat[v], Xs & compat[v]);
            current.pop_back();
            P.reset(v);
            Xs.set(v);
        }
    }
};

}  // namespace

std::vector<std::vector<Index>> enumerate_maximal_grids(const MetricSpace& X, const std::vector<Index>& candidates,
                                                        double threshold, std::size_t cap) {
    const std::size_t m = candidates.size();
    if (m == 0) return {{}};
    MisEnumerator e;
    e.cap = cap;
    e.compat.assign(m, Bits(m));
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = 0; b < m; ++b)
            if (a != b && X(candidates[a], candidates[b]) > threshold) e.compat[a].set(b);
    Bits P(m), Xs(m);
    for (std::size_t a = 0; a < m; ++a) P.set(a);
    e.run(P, Xs);
    std::vector<std::vector<Index>> res;
    res.reserve(e.out.size());
    for (auto& s : e.out) {
        std::vector<Index> g;
        for (std::size_t i : s) g.push_back(candidates[i]);
        std::sort(g.begin(), g.end());
        res.push_back(std::move(g));
    }
    std::sort(res.begin(), res.end());
    return res;
}

GridChoice build_k_grid(const MetricSpace& X, const std::vector<Index>& candidates, double threshold, Rng& rng,
                        std::size_t cap) {
    GridChoice gc;
    try {
        auto all = enumerate_maximal_grids(X, candidates, threshold, cap);
        gc.count = all.size();
        gc.grid = std::move(all[static_cast<std::size_t>(rng.below(all.size()))]);
        return gc;
    } catch (const EnumerationTooLarge&) {
    }
    std::vector<Index> order = candidates;
    rng.shuffle(order);
    gc.grid = greedy_grid(X, order, threshold);
    gc.approximate = true;
    return gc;
}

std::vector<std::vector<Index>> parent_options(const MetricSpace& X, const std::vector<Index>& children,
                                               const std::vector<Index>& parents, double scale) {
    std::vector<std::vector<Index>> opts(children.size());
    for (std::size_t c = 0; c < children.size(); ++c) {
        Index y = children[c];
        Index close = -1;
        for (Index z : parents)
            if (X(y, z) <= scale / 4) {
                close = z;
                break;
            }
        if (close >= 0) {
            opts[c] = {close};
            continue;
        }
        for (Index z : parents)
            if (X(y, z) <= 3 * scale) opts[c].push_back(z);
        if (opts[c].empty())
            throw NoParentInRange("grid point " + std::to_string(y) + " has no parent within 3*delta^k");
    }
    return opts;
}

namespace {

constexpr std::uint64_t kGridStream = 0xffffffffULL;

LatticeSample empty_sample(const MetricSpace& X, const HierarchyParams& p, int N) {
    LatticeSample s;
    s.delta = p.delta;
    s.levels = N;
    s.grids.assign(N + 1, {});
    s.parent.assign(N + 1, std::vector<Index>(X.size(), -1));
    std::vector<Index> all(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) all[i] = static_cast<Index>(i);
    s.grids[N] = greedy_grid(X, all, std::pow(p.delta, N));
    return s;
}

}  // namespace

LatticeSample build_hierarchy(const MetricSpace& X, const HierarchyParams& p, std::uint64_t trial) {
    check_params(p);
    const int N = resolve_levels(X, p);
    LatticeSample s = empty_sample(X, p, N);
    for (int k = N - 1; k >= 0; --k) {
        const double scale = std::pow(p.delta, k);
        Rng grid_rng = Rng::stream(p.seed, {trial, static_cast<std::uint64_t>(k), kGridStream});
        GridChoice gc = build_k_grid(X, s.grids[k + 1], scale, grid_rng, p.exact_cap);
        s.grids[k] = gc.grid;
        if (gc.approximate) s.approximate = true;
        else s.weight /= static_cast<double>(gc.count);
        auto opts = parent_options(X, s.grids[k + 1], s.grids[k], scale);
        for (std::size_t c = 0; c < opts.size(); ++c) {
            Index child = s.grids[k + 1][c];
            Index choice = opts[c][0];
            if (opts[c].size() > 1) {
                Rng prng = Rng::stream(p.seed, {trial, static_cast<std::uint64_t>(k + 1),
                                                static_cast<std::uint64_t>(child)});
                choice = opts[c][static_cast<std::size_t>(prng.below(opts[c].size()))];
                s.weight /= static_cast<double>(opts[c].size());
            }
            s.parent[k + 1][child] = choice;
        }
    }
    if (s.approximate) s.weight = 0.0;
    build_cubes(X, s);
    return s;
}

namespace {

struct Enumerator {
    const MetricSpace& X;
    const HierarchyParams& p;
    std::vector<LatticeSample> out;

    void level(LatticeSample& s, int k) {
        if (k < 0) {
            if (out.size() >= p.event_cap)
                throw EnumerationTooLarge("more than " + std::to_string(p.event_cap) + " lattice events");
            LatticeSample done = s;
            build_cubes(X, done);
            out.push_back(std::move(done));
            return;
        }
        const double scale = std::pow(p.delta, k);
        auto grids = enumerate_maximal_grids(X, s.grids[k + 1], scale, p.event_cap);
        const double w0 = s.weight;
        for (auto& g : grids) {
            s.grids[k] = g;
            auto opts = parent_options(X, s.grids[k + 1], g, scale);
            // odometer over the cartesian product of parent choices
            std::vector<std::size_t> pick(opts.size(), 0);
            double wg = w0 / static_cast<double>(grids.size());
            for (auto& o : opts) wg /= static_cast<double>(o.size());
            for (;;) {
                for (std::size_t c = 0; c < opts.size(); ++c) s.parent[k + 1][s.grids[k + 1][c]] = opts[c][pick[c]];
                s.weight = wg;
                level(s, k - 1);
                std::size_t c = 0;
                while (c < opts.size() && ++pick[c] == opts[c].size()) pick[c++] = 0;
                if (c == opts.size()) break;
            }
        }
        s.weight = w0;
        s.grids[k].clear();
        std::fill(s.parent[k + 1].begin(), s.parent[k + 1].end(), -1);
    }
};

}  // namespace

std::vector<LatticeSample> enumerate_hierarchies(const MetricSpace& X, const HierarchyParams& p) {
    check_params(p);
    const int N = resolve_levels(X, p);
    LatticeSample s = empty_sample(X, p, N);
    Enumerator e{X, p, {}};
    e.level(s, N - 1);
    return std::move(e.out);
}

void build_cubes(const MetricSpace& X, LatticeSample& s) {
    const std::size_t n = X.size();
    const int N = s.levels;
    s.assignment.assign(N + 1, std::vector<Index>(n, -1));
    for (std::size_t x = 0; x < n; ++x) {
        Index best = -1;
        double bd = std::numeric_limits<double>::infinity();
        for (Index z : s.grids[N])
            if (X(static_cast<Index>(x), z) < bd) {
                bd = X(static_cast<Index>(x), z);
                best = z;
            }
        s.assignment[N][x] = best;
        for (int k = N; k >= 1; --k) {
            Index y = s.assignment[k][x];
            s.assignment[k - 1][x] = y >= 0 ? s.parent[k][y] : -1;
        }
    }
}

CoverReport verify_cover(const MetricSpace& X, const LatticeSample& s) {
    const std::size_t n = X.size();
    const int N = s.levels;
    CoverReport rep;
    rep.generations = static_cast<std::size_t>(N) + 1;
    if (static_cast<int>(s.grids.size()) != N + 1 || static_cast<int>(s.assignment.size()) != N + 1)
        throw CoverGap("sample has the wrong number of generations");
    std::vector<std::vector<char>> in_grid(N + 1, std::vector<char>(n, 0));
    for (int k = 0; k <= N; ++k)
        for (Index y : s.grids[k]) in_grid[k][y] = 1;
    for (std::size_t x = 0; x < n; ++x) {
        // independent recomputation of the chain of x
        Index z = -1;
        double bd = std::numeric_limits<double>::infinity();
        for (Index g : s.grids[N])
            if (X(static_cast<Index>(x), g) < bd) {
                bd = X(static_cast<Index>(x), g);
                z = g;
            }
        for (int k = N; k >= 0; --k) {
            if (k < N) z = (z >= 0 && s.parent.size() > static_cast<std::size_t>(k + 1)) ? s.parent[k + 1][z] : -1;
            const std::string where = "point " + std::to_string(x) + ", generation " + std::to_string(k);
            if (z < 0 || static_cast<std::size_t>(z) >= n || !in_grid[k][z]) throw CoverGap(where);
            if (s.assignment[k][x] != z) throw CoverGap(where + " (assignment disagrees with parent chain)");
            const double ratio = X(static_cast<Index>(x), z) / s.side(k);
            if (ratio > 15.0)
                throw ProximityViolation(where + ": |y_k x| = " + std::to_string(ratio) + " delta^k");
            rep.worst_proximity = std::max(rep.worst_proximity, ratio);
        }
    }
    for (int k = 0; k <= N; ++k)
        for (std::size_t x = 0; x < n; ++x) {
            double m = std::numeric_limits<double>::infinity();
            for (Index y : s.grids[k]) m = std::min(m, X(static_cast<Index>(x), y));
            rep.worst_grid_cover = std::max(rep.worst_grid_cover, m / s.side(k));
        }
    return rep;
}

std::vector<double> distance_to_outside(const MetricSpace& X, const std::vector<Index>& labels) {
    const std::size_t n = X.size();
    std::vector<double> d(n, std::numeric_limits<double>::infinity());
    for (std::size_t x = 0; x < n; ++x)
        for (std::size_t y = 0; y < n; ++y)
            if (labels[y] != labels[x]) d[x] = std::min(d[x], X(static_cast<Index>(x), static_cast<Index>(y)));
    return d;
}

GridLawReport verify_grid_laws(const MetricSpace& X, const LatticeSample& s) {
    const std::size_t n = X.size();
    const int N = s.levels;
    GridLawReport rep;
    std::vector<Index> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = static_cast<Index>(i);
    for (int k = 0; k <= N; ++k) {
        const double side = s.side(k);
        const auto& G = s.grids[k];
        if (!is_separated(X, G, side)) ++rep.separation_violations;
        const auto& above = k == N ? all : s.grids[k + 1];
        if (!is_maximal(X, G, above, side)) ++rep.maximality_violations;
        if (k < N)
            for (Index y : G)
                if (!std::binary_search(s.grids[k + 1].begin(), s.grids[k + 1].end(), y)) ++rep.nesting_violations;
        for (std::size_t x = 0; x < n; ++x) {
            bool near = false;
            for (Index y : G)
                if (X(static_cast<Index>(x), y) <= 3 * side) {
                    near = true;
                    break;
                }
            if (!near) ++rep.cover3_violations;
        }
        if (k >= 1) {
            const double ps = s.side(k - 1);
            for (Index y : G) {
                Index par = s.parent[k][y];
                if (par < 0) {
                    ++rep.parent_rule_violations;
                    continue;
                }
                Index close = -1;
                for (Index z : s.grids[k - 1])
                    if (X(y, z) <= ps / 4) close = z;
                if (close >= 0 ? par != close : X(y, par) > 3 * ps) ++rep.parent_rule_violations;
            }
        }
    }
    // chains starting near the boundary of a coarser cube must move
    for (int k = 0; k < N; ++k) {
        auto dout = distance_to_outside(X, s.assignment[k]);
        for (std::size_t x = 0; x < n; ++x)
            for (int m = 1; k + m <= N; ++m) {
                // some admissible eps <= delta^m / 100 with x inside the collar
                if (!(dout[x] < std::pow(s.delta, m) / 100 * s.side(k))) continue;
                ++rep.chain_qualifying;
                bool ok = true;
                for (int j = k; j <= k + m && ok; ++j)
                    for (int i = j + 1; i <= k + m; ++i)
                        if (X(s.assignment[i][x], s.assignment[j][x]) < s.side(j) / 100) {
                            ok = false;
                            break;
                        }
                if (!ok) ++rep.chain_violations;
            }
    }
    return rep;
}

std::vector<Index> boundary_layer(const MetricSpace& X, const std::vector<Index>& members, double side, double eps) {
    const std::size_t n = X.size();
    std::vector<char> in(n, 0);
    for (Index m : members) in[m] = 1;
    std::vector<Index> out;
    if (members.size() == n) return out;
    const double t = eps * side;
    for (std::size_t x = 0; x < n; ++x) {
        double din = std::numeric_limits<double>::infinity(), dout = din;
        for (std::size_t y = 0; y < n; ++y) {
            double d = X(static_cast<Index>(x), static_cast<Index>(y));
            if (in[y]) din = std::min(din, d);
            else dout = std::min(dout, d);
        }
        if (din <= t && dout <= t) out.push_back(static_cast<Index>(x));
    }
    return out;
}

}  // namespace a2lab
