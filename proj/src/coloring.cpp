#include "a2lab/coloring.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "a2lab/lattice.hpp"

namespace a2lab {

namespace {
inline bool bit(Coloring c, Index i) { return (c >> i) & 1u; }
}  // namespace

Coloring Census::near_mask(Index a) const {
    Coloring m = 0;
    for (std::size_t b = 0; b < Y.size(); ++b)
        if (static_cast<Index>(b) != a && near(a, static_cast<Index>(b))) m |= Coloring{1} << b;
    return m;
}

bool Census::is_proper(Coloring red) const {
    for (std::size_t i = 0; i < Y.size(); ++i) {
        Coloring nb = near_mask(static_cast<Index>(i));
        if (bit(red, static_cast<Index>(i))) {
            if (red & nb) return false;
        } else if (!(red & nb)) {
            return false;
        }
    }
    return true;
}

std::size_t Census::occupancy() const {
    std::size_t d = 0;
    for (std::size_t i = 0; i < Y.size(); ++i)
        d = std::max<std::size_t>(d, 1 + static_cast<std::size_t>(__builtin_popcount(near_mask(static_cast<Index>(i)))));
    return d;
}

std::vector<Coloring> Census::proper_colorings() const {
    const std::size_t n = Y.size();
    if (n > cap || n > 31) throw TooLarge("space has " + std::to_string(n) + " points, cap is " + std::to_string(cap));
    std::vector<Coloring> nb(n);
    for (std::size_t i = 0; i < n; ++i) nb[i] = near_mask(static_cast<Index>(i));
    std::vector<Coloring> out;
    const Coloring full = n == 32 ? ~Coloring{0} : ((Coloring{1} << n) - 1);
    for (Coloring red = 0;; ++red) {
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i)
            ok = bit(red, static_cast<Index>(i)) ? !(red & nb[i]) : (red & nb[i]) != 0;
        if (ok) out.push_back(red);
        if (red == full) break;
    }
    return out;
}

double Census::membership_fraction(Index v) const {
    auto all = proper_colorings();
    std::size_t hit = 0;
    for (Coloring c : all)
        if (bit(c, v)) ++hit;
    return static_cast<double>(hit) / static_cast<double>(all.size());
}

RecolorInstance make_instance(const Census& c, Index v, Coloring S) {
    RecolorInstance inst;
    inst.v = v;
    inst.ball = c.near_mask(v);
    inst.S = S;
    for (std::size_t y = 0; y < c.Y.size(); ++y) {
        const Index yi = static_cast<Index>(y);
        if (yi == v || bit(inst.ball, yi)) continue;
        if (c.near_mask(yi) & S) inst.S_tilde |= Coloring{1} << y;
    }
    return inst;
}

Coloring recolor(const Census& c, const RecolorInstance& inst, Coloring coloring) {
    if (!c.is_proper(coloring)) throw NotInWS("input coloring is not proper");
    if (bit(coloring, inst.v) || (coloring & inst.ball) != inst.S) throw NotInWS("coloring does not lie in W_S");
    const std::size_t n = c.Y.size();
    Coloring red = coloring;
    red |= Coloring{1} << inst.v;  // step 1
    red &= ~inst.S;                // step 2
    // step 3: points of S~ left without a red neighbour turn yellow
    std::vector<Index> yellow;
    for (std::size_t y = 0; y < n; ++y)
        if (bit(inst.S_tilde, static_cast<Index>(y)) && !(c.near_mask(static_cast<Index>(y)) & red))
            yellow.push_back(static_cast<Index>(y));
    // steps 4-5: greedy in index order
    Coloring fresh = 0;
    for (Index y : yellow)
        if (!(c.near_mask(y) & fresh)) fresh |= Coloring{1} << y;
    // step 6: the remaining yellow points stay green
    return red | fresh;
}

InjectivityReport verify_injectivity(const Census& c, Index v) {
    InjectivityReport rep;
    rep.v = v;
    rep.occupancy = c.occupancy();
    auto all = c.proper_colorings();
    rep.total = all.size();
    const Coloring ball = c.near_mask(v);
    std::map<Coloring, std::vector<Coloring>> ws;
    for (Coloring col : all) {
        if (bit(col, v)) ++rep.card_b;
        else ws[col & ball].push_back(col);
    }
    rep.fraction = static_cast<double>(rep.card_b) / static_cast<double>(rep.total);
    for (auto& [S, members] : ws) {
        RecolorInstance inst = make_instance(c, v, S);
        std::map<Coloring, Coloring> seen;
        for (Coloring col : members) {
            Coloring img = recolor(c, inst, col);
            if (!c.is_proper(img) || !bit(img, v))
                throw ViolationReport("recolor produced an improper coloring or left v green");
            auto [it, fresh] = seen.emplace(img, col);
            if (!fresh)
                throw InjectivityFailure("S=" + std::to_string(S) + ": colorings " + std::to_string(it->second) +
                                         " and " + std::to_string(col) + " share an image");
        }
        rep.rows.push_back({S, members.size(), seen.size()});
    }
    return rep;
}

GridMembership grid_membership_fraction(const MetricSpace& X, double threshold, Index x) {
    std::vector<Index> all(X.size());
    for (std::size_t i = 0; i < X.size(); ++i) all[i] = static_cast<Index>(i);
    auto grids = enumerate_maximal_grids(X, all, threshold, 10000000);
    GridMembership g;
    std::size_t hit = 0;
    for (const auto& gr : grids)
        if (std::binary_search(gr.begin(), gr.end(), x)) ++hit;
    g.fraction = static_cast<double>(hit) / static_cast<double>(grids.size());
    for (std::size_t i = 0; i < X.size(); ++i) {
        std::size_t cnt = 0;
        for (std::size_t j = 0; j < X.size(); ++j)
            if (X(static_cast<Index>(i), static_cast<Index>(j)) <= threshold) ++cnt;
        g.d = std::max(g.d, cnt);
    }
    g.bound = std::pow(2.0, -static_cast<double>(g.d) + 1.0);
    return g;
}

}  // namespace a2lab
