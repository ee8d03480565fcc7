#include "a2lab/shifts.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "a2lab/bellman.hpp"
#include "a2lab/parallel.hpp"
#include "a2lab/rng.hpp"
#include "a2lab/stats.hpp"

namespace a2lab {

double DyadicShift::normalized_max() const {
    double r = 0.0;
    for (const auto& s : terms)
        if (s.bound > 0.0) r = std::max(r, std::abs(s.c) / s.bound);
    return r;
}

DyadicShift assemble_shift(const CubeTree& t, const HaarSystem& hs, const Measure& mu, int m, int n,
                           const CoefficientFn& source) {
    if (m < 0 || n < 0) throw ConfigError("shift complexity must be nonnegative");
    const int top = t.levels() - 1 - std::max(m, n);  // deepest admissible generation of L
    if (top < 0)
        throw TreeTooShallow("complexity (" + std::to_string(m) + "," + std::to_string(n) + ") needs " +
                             std::to_string(std::max(m, n) + 1) + " generations of Haar functions, tree has " +
                             std::to_string(t.levels()));
    DyadicShift s;
    s.m = m;
    s.n = n;
    for (int g = 0; g <= top; ++g)
        for (int L : t.generation(g)) {
            const double mL = t[L].mass;
            const auto Is = t.descendants_at(L, g + m);
            const auto Js = t.descendants_at(L, g + n);
            for (int I : Is)
                for (int hi : hs.of_cube(I))
                    for (int J : Js)
                        for (int hj : hs.of_cube(J)) {
                            ShiftTerm term;
                            term.L = L;
                            term.hi = hi;
                            term.hj = hj;
                            term.bound = std::sqrt(t[I].mass) * std::sqrt(t[J].mass) / mL;
                            double c = source(L, hi, hj, term.bound);
                            if (std::abs(c) > term.bound) {
                                s.worst_excess = std::max(s.worst_excess, std::abs(c) / term.bound);
                                c = std::copysign(term.bound, c);
                                ++s.clamped;
                            }
                            term.c = c;
                            s.terms.push_back(term);
                        }
        }
    const auto N = static_cast<Eigen::Index>(hs.size());
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(N, N);
    for (const auto& term : s.terms) C(term.hj, term.hi) += term.c;
    const Eigen::MatrixXd H = hs.matrix(t);
    Eigen::VectorXd m_diag(static_cast<Eigen::Index>(t.points()));
    for (std::size_t x = 0; x < t.points(); ++x) m_diag[static_cast<Eigen::Index>(x)] = mu.mass[x];
    s.matrix = H * C * (H.transpose() * m_diag.asDiagonal());
    return s;
}

CoefficientFn random_source(std::uint64_t seed) {
    return [seed](int L, int hi, int hj, double bound) {
        Rng r = Rng::stream(seed, {static_cast<std::uint64_t>(L), static_cast<std::uint64_t>(hi),
                                   static_cast<std::uint64_t>(hj)});
        return r.uniform(-bound, bound);
    };
}

CoefficientFn sign_source(std::uint64_t seed) {
    return [seed](int L, int hi, int hj, double bound) {
        Rng r = Rng::stream(seed, {static_cast<std::uint64_t>(L), static_cast<std::uint64_t>(hi),
                                   static_cast<std::uint64_t>(hj)});
        return (r.next() >> 63) ? bound : -bound;
    };
}

CoefficientFn worst_sign_source(const CubeTree& t, const HaarSystem& hs, const Measure& mu, const Vec& f,
                                const Vec& g) {
    Vec cf(hs.size()), cg(hs.size());
    for (std::size_t i = 0; i < hs.size(); ++i) {
        cf[i] = hs.coefficient(t, mu, i, f);
        cg[i] = hs.coefficient(t, mu, i, g);
    }
    return [cf, cg](int, int hi, int hj, double bound) {
        return cf[static_cast<std::size_t>(hi)] * cg[static_cast<std::size_t>(hj)] >= 0.0 ? bound : -bound;
    };
}

ShiftExperiment shift_bound_experiment(const CubeTree& t, const Measure& mu, const std::vector<Weight>& weights,
                                       const ShiftExperimentParams& p) {
    if (p.draws < 1) throw ConfigError("draws must be positive");
    if (p.source != "random" && p.source != "signs" && p.source != "worst")
        throw ConfigError("unknown coefficient source '" + p.source + "'");
    const HaarSystem hs = HaarSystem::build(t, mu);
    const std::size_t nc = p.complexities.size(), nw = weights.size();
    const bool per_weight = p.source == "worst";
    const std::size_t draws = per_weight ? 1 : static_cast<std::size_t>(p.draws);

    // shifts independent of the weight are assembled once
    std::vector<std::vector<DyadicShift>> shifts(nc);
    if (!per_weight) {
        for (std::size_t c = 0; c < nc; ++c) shifts[c].resize(draws);
        parallel_for(nc * draws, [&](std::size_t k) {
            const std::size_t c = k / draws, d = k % draws;
            const auto [m, n] = p.complexities[c];
            const std::uint64_t key = Rng::stream(p.seed, {static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(n),
                                                           static_cast<std::uint64_t>(d)})
                                          .next();
            shifts[c][d] = assemble_shift(t, hs, mu, m, n, p.source == "random" ? random_source(key) : sign_source(key));
        });
    }

    ShiftExperiment out;
    out.rows.resize(nc * nw);
    std::vector<std::size_t> clamped(nc * nw, 0);
    parallel_for(nc * nw, [&](std::size_t k) {
        const std::size_t c = k / nw, wi = k % nw;
        const auto [m, n] = p.complexities[c];
        const Weight& W = weights[wi];
        ShiftRow row;
        row.m = m;
        row.n = n;
        row.a2 = W.a2;
        const bool check_power = p.power_stride > 0 && wi % static_cast<std::size_t>(p.power_stride) == 0;
        for (std::size_t d = 0; d < draws; ++d) {
            DyadicShift local;
            const DyadicShift* s;
            if (per_weight) {
                local = assemble_shift(t, hs, mu, m, n, worst_sign_source(t, hs, mu, W.sigma, W.w));
                s = &local;
            } else {
                s = &shifts[c][d];
            }
            const Eigen::MatrixXd M = similarity(s->matrix, W.w, mu.mass);
            const double nd = spectral_norm(M, NormMethod::Dense);
            row.norm = std::max(row.norm, nd);
            if (d == 0) {
                row.dense_first = nd;
                if (check_power) row.power_norm = spectral_norm_power(M);
                clamped[k] = s->clamped;
            }
            if (wi == 0 || per_weight) {
                const Vec ones(t.points(), 1.0);
                row.unweighted = std::max(row.unweighted, weighted_operator_norm(s->matrix, ones, mu.mass));
            }
        }
        out.rows[k] = row;
    });

    Vec cx, cy;
    for (std::size_t c = 0; c < nc; ++c) {
        ShiftComplexity sc;
        std::tie(sc.m, sc.n) = p.complexities[c];
        Vec xs, ys;
        for (std::size_t wi = 0; wi < nw; ++wi) {
            const ShiftRow& r = out.rows[c * nw + wi];
            xs.push_back(r.a2);
            ys.push_back(r.norm);
            sc.max_norm = std::max(sc.max_norm, r.norm);
            sc.unweighted = std::max(sc.unweighted, r.unweighted);
            sc.clamped += clamped[c * nw + wi];
            if (r.power_norm >= 0.0)
                out.max_power_dense_gap = std::max(out.max_power_dense_gap,
                                                   std::abs(r.power_norm - r.dense_first) / std::max(r.dense_first, 1e-300));
        }
        // a family of constant weights has no spread in [w]_2 and slope 0
        bool spread = false;
        for (double x : xs) spread = spread || std::abs(std::log(x / xs[0])) > 1e-9;
        if (spread) {
            const LinearFit f = loglog_fit(xs, ys);
            sc.slope = f.slope;
            sc.r2 = f.r2;
        }
        cx.push_back(static_cast<double>(sc.m + sc.n + 1));
        cy.push_back(sc.max_norm);
        out.complexities.push_back(sc);
    }
    out.complexity_exponent = loglog_fit(cx, cy).slope;
    return out;
}

namespace {

// Delta_K v / <v>_K
double oscillation(const CubeTree& t, const Vec& avg, int K) {
    double d = 0.0;
    for (int s : t[K].sons) d += std::abs(avg[static_cast<std::size_t>(s)] - avg[static_cast<std::size_t>(K)]);
    return d / avg[static_cast<std::size_t>(K)];
}

}  // namespace

StoppingFamily build_stopping_family(const CubeTree& t, const Measure& mu, int L, const Vec& w, const Vec& sigma,
                                     int m, int n) {
    if (t[L].generation + m > t.levels())
        throw TreeTooShallow("stopping family needs " + std::to_string(m) + " generations below the root cube");
    StoppingFamily fam;
    fam.L = L;
    fam.m = m;
    fam.n = n;
    const double N = m + n + 1;
    fam.p = 2.0 - 1.0 / N;
    const Vec aw = cube_averages(t, mu, w), as = cube_averages(t, mu, sigma);
    const int stop_gen = t[L].generation + m;
    std::vector<int> stack{L};
    while (!stack.empty()) {
        const int K = stack.back();
        stack.pop_back();
        const bool ratio = oscillation(t, aw, K) >= 1.0 / N || oscillation(t, as, K) >= 1.0 / N;
        if (ratio || t[K].generation == stop_gen) {
            fam.members.push_back({K, ratio});
            continue;
        }
        for (auto it = t[K].sons.rbegin(); it != t[K].sons.rend(); ++it) stack.push_back(*it);
    }
    std::sort(fam.members.begin(), fam.members.end(),
              [](const StoppingMember& a, const StoppingMember& b) { return a.cube < b.cube; });
    return fam;
}

double stopping_ratio_check(const CubeTree& t, const Measure& mu, const StoppingFamily& fam, const Vec& w,
                            const Vec& sigma) {
    const Vec aw = cube_averages(t, mu, w), as = cube_averages(t, mu, sigma);
    const double N = fam.m + fam.n + 1;
    double worst = 0.0;
    for (const auto& mem : fam.members) {
        for (int F = t[mem.cube].parent; F >= 0; F = t[F].parent) {
            if (!t.contains(fam.L, F)) break;
            for (int s : t[F].sons)
                for (const Vec* a : {&aw, &as}) {
                    const double r = (*a)[static_cast<std::size_t>(s)] / (*a)[static_cast<std::size_t>(F)];
                    worst = std::max(worst, N * std::abs(r - 1.0));
                }
            if (F == fam.L) break;
        }
    }
    return worst;
}

double son_ratio_constant(const CubeTree& t) {
    double k = 0.0;
    for (const Cube& q : t.cubes()) {
        double s = 0.0;
        for (int son : q.sons) s += std::max(1.0, q.mass / t[son].mass - 1.0);
        k = std::max(k, s);
    }
    return k;
}

SborReport verify_sbor(const CubeTree& t, const Measure& mu, const StoppingFamily& fam, const Vec& phi,
                       const Vec& w, const Vec& sigma, double alpha) {
    SborReport r;
    r.kappa = son_ratio_constant(t);
    r.members = fam.members.size();
    r.worst_slack = std::numeric_limits<double>::infinity();
    const Vec aw = cube_averages(t, mu, w), as = cube_averages(t, mu, sigma);
    Vec phiw(t.points()), absphiw(t.points());
    for (std::size_t x = 0; x < t.points(); ++x) {
        phiw[x] = phi[x] * w[x];
        absphiw[x] = std::abs(phiw[x]);
    }
    const Vec a_phiw = cube_averages(t, mu, phiw), a_abs = cube_averages(t, mu, absphiw);
    const Vec tau = tau_sequence(t, mu, w, sigma, alpha);
    const double N = fam.m + fam.n + 1;
    const int L = fam.L;
    const double mL = t[L].mass;
    const double scaleL = std::pow(aw[static_cast<std::size_t>(L)] * as[static_cast<std::size_t>(L)], -alpha / 2);
    const int gen = t[L].generation + fam.m;
    double holder_lhs = 0.0, holder_rhs = 0.0;
    for (const auto& mem : fam.members) {
        const int K = mem.cube;
        const auto k = static_cast<std::size_t>(K);
        double lhs = 0.0;
        for (int I : t.descendants_at(K, gen)) {
            const auto i = static_cast<std::size_t>(I);
            lhs += std::abs(a_phiw[i]) * oscillation(t, aw, I) * t[I].mass / std::sqrt(mL);
        }
        const double rhs = r.kappa * std::exp(alpha) * N * a_abs[k] * std::sqrt(t[K].mass / mL) * std::sqrt(tau[k]) * scaleL;
        r.worst_slack = std::min(r.worst_slack, rhs - lhs);
        if (rhs > 0.0) r.worst_ratio = std::max(r.worst_ratio, lhs / rhs);
        else if (lhs > 0.0) r.worst_ratio = std::numeric_limits<double>::infinity();
        const double frac = t[K].mass / mL;
        holder_lhs += a_abs[k] * a_abs[k] * frac;
        holder_rhs += std::pow(a_abs[k], fam.p) * std::pow(frac, fam.p / 2);
    }
    r.holder_slack = holder_rhs - std::pow(holder_lhs, fam.p / 2);
    return r;
}

SlRl sl_rl_functionals(const CubeTree& t, const HaarSystem& hs, const Measure& mu, int L, int k, const Vec& phi,
                       const Vec& v) {
    SlRl out;
    const int gen = t[L].generation + k;
    if (gen > t.levels()) return out;
    const double mL = t[L].mass;
    Vec phiv(t.points());
    for (std::size_t x = 0; x < t.points(); ++x) phiv[x] = phi[x] * v[x];
    double sq = 0.0, mult = 0.0;
    for (int I : t.descendants_at(L, gen)) {
        const double avg_v = cube_average(t, mu, I, v);
        const double avg_phiv = cube_average(t, mu, I, phiv);
        double osc = 0.0;
        for (int s : t[I].sons) osc += std::abs(cube_average(t, mu, s, v) - avg_v);
        out.R += std::abs(avg_phiv) * osc / avg_v * t[I].mass / std::sqrt(mL);
        for (int id : hs.of_cube(I)) {
            const auto d = weighted_haar_decomposition(t, mu, hs[static_cast<std::size_t>(id)], v);
            // (phi v, h^v)_mu from per-son sums
            double a = 0.0;
            const Cube& q = t[I];
            for (std::size_t si = 0; si < q.sons.size(); ++si)
                for (Index x : t[q.sons[si]].members) a += phiv[x] * d.hw[si] * mu.mass[x];
            out.S += std::abs(a) * std::sqrt(avg_v) * std::sqrt(t[I].mass / mL);
            sq += a * a;
            mult += avg_v * t[I].mass / mL;
        }
    }
    out.sl_rhs = std::sqrt(sq) * std::sqrt(mult);
    out.sl_rhs_literal = std::sqrt(sq) * std::sqrt(cube_average(t, mu, L, v));
    return out;
}

FourWaySplit four_way_split(const CubeTree& t, const HaarSystem& hs, const Measure& mu, const DyadicShift& s,
                            const Vec& phi, const Vec& psi, const Vec& w, const Vec& sigma) {
    FourWaySplit out;
    const std::size_t H = hs.size();
    Vec phiw(t.points()), psis(t.points());
    for (std::size_t x = 0; x < t.points(); ++x) {
        phiw[x] = phi[x] * w[x];
        psis[x] = psi[x] * sigma[x];
    }
    // per Haar function: alpha, beta, (f, h^v), int_I f, and the bound-side quantities
    struct Side {
        double alpha = 0, beta = 0, a = 0, A = 0, plain = 0;
        double s_term = 0;  // |a| sqrt(<v>_I) sqrt(mu(I))
        double r_term = 0;  // |<f>_I| (Delta_I v / <v>_I) mu(I)
    };
    auto sides = [&](const Vec& f, const Vec& v) {
        std::vector<Side> out_s(H);
        for (std::size_t id = 0; id < H; ++id) {
            const HaarFunction& h = hs[id];
            const Cube& q = t[h.cube];
            const auto d = weighted_haar_decomposition(t, mu, h, v);
            Side sd;
            sd.alpha = d.alpha;
            sd.beta = d.beta;
            for (std::size_t si = 0; si < q.sons.size(); ++si)
                for (Index x : t[q.sons[si]].members) {
                    sd.a += f[x] * d.hw[si] * mu.mass[x];
                    sd.A += f[x] * mu.mass[x];
                    sd.plain += f[x] * h.son_values[si] * mu.mass[x];
                }
            sd.s_term = std::abs(sd.a) * std::sqrt(d.avg_w) * std::sqrt(q.mass);
            sd.r_term = std::abs(sd.A / q.mass) * d.delta_w / d.avg_w * q.mass;
            out_s[id] = sd;
        }
        return out_s;
    };
    const auto P = sides(phiw, w), S = sides(psis, sigma);
    const double ch = hs.sup_constant(t);
    const double mult = std::max(1, t.max_sons() - 1);
    // Haar functions met below each L, for the S_L / R_L products
    std::map<int, std::pair<std::vector<int>, std::vector<int>>> seen;
    for (const auto& term : s.terms) {
        const Side& p = P[static_cast<std::size_t>(term.hi)];
        const Side& q = S[static_cast<std::size_t>(term.hj)];
        out.form += term.c * p.plain * q.plain;
        const double c = std::abs(term.c);
        out.exact[0] += c * std::abs(p.alpha * p.a * q.alpha * q.a);
        out.exact[1] += c * std::abs(p.beta * p.A * q.alpha * q.a);
        out.exact[2] += c * std::abs(p.alpha * p.a * q.beta * q.A);
        out.exact[3] += c * std::abs(p.beta * p.A * q.beta * q.A);
        const Cube& I = t[hs[static_cast<std::size_t>(term.hi)].cube];
        const Cube& J = t[hs[static_cast<std::size_t>(term.hj)].cube];
        const double mL = t[term.L].mass;
        const double bnd = std::sqrt(I.mass) * std::sqrt(J.mass) / mL;
        const double aI = ch * p.s_term / std::sqrt(I.mass), aJ = ch * q.s_term / std::sqrt(J.mass);
        const double bI = ch * p.r_term / std::sqrt(I.mass), bJ = ch * q.r_term / std::sqrt(J.mass);
        out.bounded[0] += bnd * aI * aJ;
        out.bounded[1] += bnd * bI * aJ;
        out.bounded[2] += bnd * aI * bJ;
        out.bounded[3] += bnd * bI * bJ;
        auto& sl = seen[term.L];
        sl.first.push_back(term.hi);
        sl.second.push_back(term.hj);
    }
    for (auto& [L, ids] : seen) {
        auto uniq = [](std::vector<int>& v) {
            std::sort(v.begin(), v.end());
            v.erase(std::unique(v.begin(), v.end()), v.end());
        };
        uniq(ids.first);
        uniq(ids.second);
        const double rmL = std::sqrt(t[L].mass);
        double sp = 0, rp = 0, ss = 0, rs = 0;
        std::vector<int> cubes_i, cubes_j;
        for (int id : ids.first) {
            sp += P[static_cast<std::size_t>(id)].s_term / rmL;
            cubes_i.push_back(hs[static_cast<std::size_t>(id)].cube);
        }
        for (int id : ids.second) {
            ss += S[static_cast<std::size_t>(id)].s_term / rmL;
            cubes_j.push_back(hs[static_cast<std::size_t>(id)].cube);
        }
        // R_L sums over cubes, not Haar functions
        uniq(cubes_i);
        uniq(cubes_j);
        for (int c : cubes_i) rp += P[static_cast<std::size_t>(hs.of_cube(c).front())].r_term / rmL;
        for (int c : cubes_j) rs += S[static_cast<std::size_t>(hs.of_cube(c).front())].r_term / rmL;
        out.products[0] += ch * ch * sp * ss;
        out.products[1] += ch * ch * mult * rp * ss;
        out.products[2] += ch * ch * mult * sp * rs;
        out.products[3] += ch * ch * mult * mult * rp * rs;
    }
    return out;
}

}  // namespace a2lab
