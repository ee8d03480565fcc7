#include "a2lab/haar.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace a2lab {

HaarSystem HaarSystem::build(const CubeTree& t, const Measure& /*mu*/) {
    HaarSystem hs;
    hs.by_cube_.resize(t.size());
    for (std::size_t c = 0; c < t.size(); ++c) {
        const Cube& q = t[static_cast<int>(c)];
        const std::size_t M = q.sons.size();
        if (M < 2) continue;
        Vec m(M);
        for (std::size_t i = 0; i < M; ++i) {
            m[i] = t[q.sons[i]].mass;
            if (!(m[i] > 0.0))
                throw ZeroMassSon("son " + std::to_string(i) + " of cube " + std::to_string(q.label) + " has no mass");
        }
        auto dot = [&](const Vec& a, const Vec& b) {
            double s = 0.0;
            for (std::size_t i = 0; i < M; ++i) s += m[i] * a[i] * b[i];
            return s;
        };
        std::vector<Vec> basis{Vec(M, 1.0 / std::sqrt(q.mass))};
        for (std::size_t j = 0; j + 1 < M; ++j) {
            Vec v(M, 0.0);
            v[j] = 1.0;
            // two passes of modified Gram-Schmidt
            for (int pass = 0; pass < 2; ++pass)
                for (const Vec& b : basis) {
                    const double p = dot(v, b);
                    for (std::size_t i = 0; i < M; ++i) v[i] -= p * b[i];
                }
            const double nrm = std::sqrt(dot(v, v));
            for (double& x : v) x /= nrm;
            basis.push_back(v);
            hs.by_cube_[c].push_back(static_cast<int>(hs.funcs_.size()));
            hs.funcs_.push_back({static_cast<int>(c), static_cast<int>(j), v});
        }
    }
    return hs;
}

Vec HaarSystem::values(const CubeTree& t, std::size_t id) const {
    Vec v(t.points(), 0.0);
    const HaarFunction& h = funcs_[id];
    const Cube& q = t[h.cube];
    for (std::size_t i = 0; i < q.sons.size(); ++i)
        for (Index x : t[q.sons[i]].members) v[x] = h.son_values[i];
    return v;
}

double HaarSystem::coefficient(const CubeTree& t, const Measure& mu, std::size_t id, const Vec& f) const {
    const HaarFunction& h = funcs_[id];
    const Cube& q = t[h.cube];
    double s = 0.0;
    for (std::size_t i = 0; i < q.sons.size(); ++i) {
        double part = 0.0;
        for (Index x : t[q.sons[i]].members) part += f[x] * mu.mass[x];
        s += h.son_values[i] * part;
    }
    return s;
}

Eigen::MatrixXd HaarSystem::matrix(const CubeTree& t) const {
    Eigen::MatrixXd H = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(t.points()), static_cast<Eigen::Index>(size()));
    for (std::size_t id = 0; id < size(); ++id) {
        const HaarFunction& h = funcs_[id];
        const Cube& q = t[h.cube];
        for (std::size_t i = 0; i < q.sons.size(); ++i)
            for (Index x : t[q.sons[i]].members) H(x, static_cast<Eigen::Index>(id)) = h.son_values[i];
    }
    return H;
}

double HaarSystem::sup_constant(const CubeTree& t) const {
    double c = 0.0;
    for (const auto& h : funcs_) {
        double mx = 0.0;
        for (double v : h.son_values) mx = std::max(mx, std::abs(v));
        c = std::max(c, mx * std::sqrt(t[h.cube].mass));
    }
    return c;
}

WeightedHaarDecomposition weighted_haar_decomposition(const Vec& h, const Vec& m, const Vec& wm) {
    WeightedHaarDecomposition d;
    const std::size_t M = h.size();
    double mass = 0.0, hmax = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
        mass += m[i];
        d.w_mass += wm[i];
        d.h_pair_w += h[i] * wm[i];
        hmax = std::max(hmax, std::abs(h[i]));
    }
    if (!(d.w_mass > 0.0)) throw DegenerateWeight("w(I) = 0");
    d.avg_w = d.w_mass / mass;
    d.c_h = hmax * std::sqrt(mass);
    for (std::size_t i = 0; i < M; ++i) d.delta_w += std::abs(wm[i] / m[i] - d.avg_w);
    d.beta = d.h_pair_w / d.w_mass;
    double a2 = 0.0;
    for (std::size_t i = 0; i < M; ++i) a2 += (h[i] - d.beta) * (h[i] - d.beta) * wm[i];
    d.alpha = std::sqrt(a2);
    if (!(d.alpha > 0.0)) throw DegenerateWeight("Haar function is constant on the cube");
    d.hw.resize(M);
    for (std::size_t i = 0; i < M; ++i) d.hw[i] = (h[i] - d.beta) / d.alpha;
    double n2 = 0.0;
    for (std::size_t i = 0; i < M; ++i) {
        d.hw_pair_w += d.hw[i] * wm[i];
        n2 += d.hw[i] * d.hw[i] * wm[i];
    }
    d.hw_norm = std::sqrt(n2);
    return d;
}

WeightedHaarDecomposition weighted_haar_decomposition(const CubeTree& t, const Measure& mu, const HaarFunction& h,
                                                      const Vec& w) {
    const Cube& q = t[h.cube];
    Vec m(q.sons.size()), wm(q.sons.size(), 0.0);
    for (std::size_t i = 0; i < q.sons.size(); ++i) {
        m[i] = t[q.sons[i]].mass;
        for (Index x : t[q.sons[i]].members) wm[i] += w[x] * mu.mass[x];
    }
    return weighted_haar_decomposition(h.son_values, m, wm);
}

DecompositionCheck check_decomposition(const Vec& h, const Vec& m, const Vec& /*wm*/,
                                       const WeightedHaarDecomposition& d) {
    DecompositionCheck c;
    double mass = 0.0;
    for (double x : m) mass += x;
    for (std::size_t i = 0; i < h.size(); ++i)
        c.identity_residual = std::max(c.identity_residual, std::abs(h[i] - d.alpha * d.hw[i] - d.beta));
    c.alpha_slack = d.c_h * std::sqrt(d.avg_w) - std::abs(d.alpha);
    c.alpha_literal_slack = std::sqrt(d.avg_w) - std::abs(d.alpha);
    c.beta_slack = std::abs(d.h_pair_w) / d.w_mass - std::abs(d.beta);
    c.orthogonality = std::abs(d.hw_pair_w);
    c.norm_error = std::abs(d.hw_norm - 1.0);
    c.delta_slack = d.c_h * d.delta_w * std::sqrt(mass) - std::abs(d.h_pair_w);
    c.beta_delta_slack = d.c_h * d.delta_w / (d.avg_w * std::sqrt(mass)) - std::abs(d.beta);
    return c;
}

double delta_of(const CubeTree& t, const Measure& mu, int cube, const Vec& w) {
    const Cube& q = t[cube];
    double tot = 0.0;
    for (Index x : q.members) tot += w[x] * mu.mass[x];
    const double avg = tot / q.mass;
    double d = 0.0;
    for (int s : q.sons) {
        double ws = 0.0;
        for (Index x : t[s].members) ws += w[x] * mu.mass[x];
        d += std::abs(ws / t[s].mass - avg);
    }
    return d;
}

}  // namespace a2lab
