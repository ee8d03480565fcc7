#include "a2lab/paraproduct.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "a2lab/carleson.hpp"
#include "a2lab/linalg.hpp"
#include "a2lab/parallel.hpp"
#include "a2lab/rng.hpp"
#include "a2lab/stats.hpp"

namespace a2lab {

Vec haar_coefficients(const CubeTree& t, const HaarSystem& hs, const Measure& mu, const Vec& f) {
    Vec c(hs.size());
    for (std::size_t i = 0; i < hs.size(); ++i) c[i] = hs.coefficient(t, mu, i, f);
    return c;
}

Vec paraproduct_apply(const CubeTree& t, const HaarSystem& hs, const Measure& mu, const Paraproduct& pp, const Vec& f) {
    const std::size_t n = t.points();
    Vec out(n, 0.0);
    if (pp.kind == ParaKind::O) {
        double s = 0.0;
        for (std::size_t x = 0; x < n; ++x) s += f[x] * mu.mass[x];
        const double v = s / mu.total() * pp.m;
        std::fill(out.begin(), out.end(), v);
        return out;
    }
    for (std::size_t id = 0; id < hs.size(); ++id) {
        const HaarFunction& h = hs[id];
        const Cube& q = t[h.cube];
        if (pp.kind == ParaKind::Pi) {
            const double coef = cube_average(t, mu, h.cube, f) * pp.b[id];
            for (std::size_t si = 0; si < q.sons.size(); ++si)
                for (Index x : t[q.sons[si]].members) out[x] += coef * h.son_values[si];
        } else {
            const double coef = hs.coefficient(t, mu, id, f) * pp.b[id] / q.mass;
            for (Index x : q.members) out[x] += coef;
        }
    }
    return out;
}

Eigen::MatrixXd paraproduct_matrix(const CubeTree& t, const HaarSystem& hs, const Measure& mu, const Paraproduct& pp) {
    const auto n = static_cast<Eigen::Index>(t.points());
    const auto H = static_cast<Eigen::Index>(hs.size());
    Eigen::VectorXd d(n);
    for (Eigen::Index x = 0; x < n; ++x) d[x] = mu.mass[static_cast<std::size_t>(x)];
    if (pp.kind == ParaKind::O) {
        Eigen::MatrixXd O(n, n);
        for (Eigen::Index y = 0; y < n; ++y) O.col(y).setConstant(pp.m * d[y] / mu.total());
        return O;
    }
    const Eigen::MatrixXd Hm = hs.matrix(t);
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(n, H);  // chi_R / mu(R)
    Eigen::VectorXd b(H);
    for (Eigen::Index id = 0; id < H; ++id) {
        const Cube& q = t[hs[static_cast<std::size_t>(id)].cube];
        for (Index x : q.members) E(x, id) = 1.0 / q.mass;
        b[id] = pp.b[static_cast<std::size_t>(id)];
    }
    if (pp.kind == ParaKind::Pi) return Hm * b.asDiagonal() * E.transpose() * d.asDiagonal();
    return E * b.asDiagonal() * Hm.transpose() * d.asDiagonal();
}

Vec per_cube_squares(const CubeTree& t, const HaarSystem& hs, const Vec& b) {
    Vec a(t.size(), 0.0);
    for (std::size_t id = 0; id < hs.size(); ++id) a[static_cast<std::size_t>(hs[id].cube)] += b[id] * b[id];
    return a;
}

AinftyCheck ainfty_inequality_check(const CubeTree& t, const Measure& mu, const BallIndex& balls, const Vec& a,
                                    const Vec& w) {
    AinftyCheck r;
    r.fujii_wilson = fujii_wilson_dyadic(t, mu, w);
    r.exp_log = std::max(ainfty_characteristic(balls, mu, w), ainfty_over_cubes(t, mu, w));
    r.carleson = carleson_constant(t, a);
    const Vec avg = cube_averages(t, mu, w);
    Vec weighted(t.size());
    for (std::size_t c = 0; c < t.size(); ++c) weighted[c] = avg[c] * a[c];
    const Vec lhs = subtree_sums(t, weighted);
    for (std::size_t c = 0; c < t.size(); ++c) {
        const double wq = avg[c] * t[static_cast<int>(c)].mass;
        if (lhs[c] <= 0.0) continue;
        r.worst_ratio = std::max(r.worst_ratio, lhs[c] / (r.fujii_wilson * r.carleson * wq));
        r.worst_ratio_exp_log = std::max(r.worst_ratio_exp_log, lhs[c] / (r.exp_log * r.carleson * wq));
    }
    // M(w^{1/2} chi_R) is only needed on R: scan the balls around each x in R
    std::vector<char> inside(w.size(), 0);
    for (std::size_t c = 0; c < t.size(); ++c) {
        const Cube& q = t[static_cast<int>(c)];
        for (Index x : q.members) inside[x] = 1;
        double inf = std::numeric_limits<double>::infinity();
        for (Index x : q.members) {
            const auto& ord = balls.order(x);
            double num = 0.0, den = 0.0, best = 0.0;
            std::size_t pos = 0;
            for (Index cut : balls.cuts(x)) {
                for (; pos < static_cast<std::size_t>(cut); ++pos) {
                    const Index y = ord[pos];
                    den += mu.mass[y];
                    if (inside[y]) num += std::sqrt(w[y]) * mu.mass[y];
                }
                best = std::max(best, num / den);
            }
            inf = std::min(inf, best);
        }
        for (Index x : q.members) inside[x] = 0;
        r.chain_ratio = std::max(r.chain_ratio, avg[c] / (r.exp_log * inf * inf));
    }
    return r;
}

ParaExperiment paraproduct_norm_experiment(const CubeTree& t, const Measure& mu, const BallIndex& balls,
                                           const Eigen::MatrixXd& T, const std::vector<Weight>& weights,
                                           std::uint64_t seed) {
    ParaExperiment ex;
    const HaarSystem hs = HaarSystem::build(t, mu);
    const std::size_t n = t.points();
    const auto N = static_cast<Eigen::Index>(n);
    Eigen::VectorXd d(N), one = Eigen::VectorXd::Ones(N);
    for (Eigen::Index x = 0; x < N; ++x) d[x] = mu.mass[static_cast<std::size_t>(x)];
    // adjoint in L^2(mu): D^{-1} T^T D
    const Eigen::MatrixXd Tstar = d.cwiseInverse().asDiagonal() * T.transpose() * d.asDiagonal();
    const Eigen::VectorXd tchi = T * one, tschi = Tstar * one;
    Vec tc(tchi.data(), tchi.data() + N), tsc(tschi.data(), tschi.data() + N);
    const Vec b = haar_coefficients(t, hs, mu, tc), bs = haar_coefficients(t, hs, mu, tsc);
    double mean = 0.0;
    for (std::size_t x = 0; x < n; ++x) mean += tc[x] * mu.mass[x];
    mean /= mu.total();
    ex.carleson_b = carleson_constant(t, per_cube_squares(t, hs, b));
    ex.carleson_b_star = carleson_constant(t, per_cube_squares(t, hs, bs));
    ex.t_norm = weighted_operator_norm(T, Vec(n, 1.0), mu.mass);

    const Paraproduct pi{ParaKind::Pi, b, 0.0}, pis{ParaKind::PiStar, bs, 0.0}, o{ParaKind::O, {}, mean};
    const Paraproduct pis_shared{ParaKind::PiStar, b, 0.0};
    const Eigen::MatrixXd Pm = paraproduct_matrix(t, hs, mu, pi), Psm = paraproduct_matrix(t, hs, mu, pis),
                          Om = paraproduct_matrix(t, hs, mu, o);

    // structural checks on random functions
    Rng rng = Rng::stream(seed, {0x9a4a});
    double scale = 0.0;
    for (double v : b) scale = std::max(scale, std::abs(v));
    scale = std::max(scale, 1e-300);
    for (int rep = 0; rep < 5; ++rep) {
        Vec f(n), g(n);
        for (std::size_t x = 0; x < n; ++x) {
            f[x] = rng.normal();
            g[x] = rng.normal();
        }
        const Vec pf = paraproduct_apply(t, hs, mu, pi, f), psg = paraproduct_apply(t, hs, mu, pis_shared, g);
        double l = 0.0, r = 0.0, c = 0.0, nf = 0.0, ng = 0.0;
        for (std::size_t x = 0; x < n; ++x) {
            l += pf[x] * g[x] * mu.mass[x];
            r += f[x] * psg[x] * mu.mass[x];
            c += pf[x] * mu.mass[x];
            nf += f[x] * f[x] * mu.mass[x];
            ng += g[x] * g[x] * mu.mass[x];
        }
        const double sc = scale * std::sqrt(nf * ng) * static_cast<double>(hs.size());
        ex.adjoint_residual = std::max(ex.adjoint_residual, std::abs(l - r) / sc);
        ex.constant_residual = std::max(ex.constant_residual, std::abs(c) / sc);
        for (const auto* pp : {&pi, &pis, &o}) {
            const Eigen::MatrixXd& Mx = pp == &pi ? Pm : (pp == &pis ? Psm : Om);
            const Vec direct = paraproduct_apply(t, hs, mu, *pp, f);
            Eigen::VectorXd fv(N);
            for (Eigen::Index x = 0; x < N; ++x) fv[x] = f[static_cast<std::size_t>(x)];
            const Eigen::VectorXd viaM = Mx * fv;
            double mx = 0.0;
            for (Eigen::Index x = 0; x < N; ++x) mx = std::max(mx, std::abs(viaM[x] - direct[static_cast<std::size_t>(x)]));
            ex.matrix_residual = std::max(ex.matrix_residual, mx / (scale * std::sqrt(nf) * hs.size()));
        }
    }
    {
        const Vec pc = paraproduct_apply(t, hs, mu, pi, Vec(n, 1.0));
        double mx = 0.0, sc = 0.0;
        for (std::size_t x = 0; x < n; ++x) {
            mx = std::max(mx, std::abs(pc[x] - (tc[x] - mean)));
            sc = std::max(sc, std::abs(tc[x]));
        }
        ex.identity_residual = mx / std::max(sc, 1e-300);
    }

    const Vec a = per_cube_squares(t, hs, b);
    ex.rows.resize(weights.size());
    parallel_for(weights.size(), [&](std::size_t i) {
        const Weight& W = weights[i];
        ParaRow row;
        row.a2 = W.a2;
        row.pi = weighted_operator_norm(Pm, W.w, mu.mass);
        row.pi_star = weighted_operator_norm(Psm, W.w, mu.mass);
        row.o = weighted_operator_norm(Om, W.w, mu.mass);
        row.o_bound_mean = std::sqrt(mean * mean * W.a2);
        row.o_bound_norm = std::sqrt(ex.t_norm * ex.t_norm * W.a2);
        const AinftyCheck ac = ainfty_inequality_check(t, mu, balls, a, W.w);
        row.ainfty_ratio = ac.worst_ratio;
        row.ainfty_ratio_exp_log = ac.worst_ratio_exp_log;
        ex.rows[i] = row;
    });
    Vec xs, yp, ys;
    for (const auto& r : ex.rows) {
        xs.push_back(r.a2);
        yp.push_back(r.pi);
        ys.push_back(r.pi_star);
    }
    ex.slope_pi = loglog_fit(xs, yp).slope;
    ex.slope_pi_star = loglog_fit(xs, ys).slope;
    return ex;
}

}  // namespace a2lab
