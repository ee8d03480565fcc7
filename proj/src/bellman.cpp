#include "a2lab/bellman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "a2lab/carleson.hpp"
#include "a2lab/haar.hpp"
#include "a2lab/parallel.hpp"
#include "a2lab/rng.hpp"
#include "a2lab/stats.hpp"

namespace a2lab {

double bellman_value(double alpha, double x, double y) { return std::pow(x * y, alpha); }

Hessian2 bellman_hessian(double alpha, double x, double y) {
    const double B = bellman_value(alpha, x, y);
    Hessian2 h;
    h.xx = alpha * (alpha - 1.0) * B / (x * x);
    h.yy = alpha * (alpha - 1.0) * B / (y * y);
    h.xy = alpha * alpha * B / (x * y);
    return h;
}

void bellman_gradient(double alpha, double x, double y, double& gx, double& gy) {
    const double B = bellman_value(alpha, x, y);
    gx = alpha * B / x;
    gy = alpha * B / y;
}

namespace {

double fd_error(double alpha, double x, double y) {
    const Hessian2 h = bellman_hessian(alpha, x, y);
    const double hx = 1e-5 * x, hy = 1e-5 * y;
    double gxp, gyp, gxm, gym;
    bellman_gradient(alpha, x + hx, y, gxp, gyp);
    bellman_gradient(alpha, x - hx, y, gxm, gym);
    const double fxx = (gxp - gxm) / (2 * hx), fyx = (gyp - gym) / (2 * hx);
    bellman_gradient(alpha, x, y + hy, gxp, gyp);
    bellman_gradient(alpha, x, y - hy, gxm, gym);
    const double fxy = (gxp - gxm) / (2 * hy), fyy = (gyp - gym) / (2 * hy);
    // compare entrywise, each entry scaled to the Hessian in log coordinates
    const double e = std::max({std::abs(fxx - h.xx) / std::abs(h.xx), std::abs(fyy - h.yy) / std::abs(h.yy),
                               std::abs(fxy - h.xy) / std::abs(h.xy), std::abs(fyx - h.xy) / std::abs(h.xy)});
    return e;
}

}  // namespace

HessianCheck bellman_hessian_check(double alpha, double Q, std::size_t samples, std::uint64_t seed) {
    if (!(alpha > 0.0 && alpha < 0.5)) throw ConfigError("alpha must lie in (0, 1/2)");
    if (!(Q > 1.0)) throw ConfigError("Q must exceed 1");
    constexpr int kDirs = 8;
    const std::size_t chunk = 4096;
    const std::size_t chunks = (samples + chunk - 1) / chunk;
    std::vector<HessianCheck> part(chunks);
    parallel_for(chunks, [&](std::size_t c) {
        Rng rng = Rng::stream(seed, {c, 0xbe11});
        HessianCheck h;
        h.worst_slack = h.worst_positivity = std::numeric_limits<double>::infinity();
        const std::size_t end = std::min(samples, (c + 1) * chunk);
        const double lq = std::log(Q);
        for (std::size_t s = c * chunk; s < end; ++s) {
            // point of Omega_Q: x log-uniform in [Q^-2, Q^2], xy log-uniform in (1, Q]
            const double x = std::exp(rng.uniform(-2 * lq, 2 * lq));
            const double prod = std::exp(lq * (1.0 - rng.uniform()));
            const double y = prod / x;
            // unconstrained point of the open quadrant for the positivity check
            const double x2 = std::exp(rng.uniform(-3 * lq, 3 * lq));
            const double y2 = std::exp(rng.uniform(-3 * lq, 3 * lq));
            const Hessian2 H = bellman_hessian(alpha, x, y);
            const Hessian2 H2 = bellman_hessian(alpha, x2, y2);
            const double B = bellman_value(alpha, x, y), B2 = bellman_value(alpha, x2, y2);
            h.max_value = std::max(h.max_value, B);
            for (int k = 0; k < kDirs; ++k) {
                const double th = k * 3.141592653589793 / kDirs;
                const double dx = std::cos(th), dy = std::sin(th);
                const double u = dx / x, v = dy / y;
                const double lhs = -H.form(dx, dy);
                const double rhs = alpha * (1 - 2 * alpha) * B * (u * u + v * v);
                h.worst_slack = std::min(h.worst_slack, (lhs - rhs) / (B * (u * u + v * v)));
                const double u2 = dx / x2, v2 = dy / y2;
                h.worst_positivity = std::min(h.worst_positivity, -H2.form(dx, dy) / (B2 * (u2 * u2 + v2 * v2)));
                ++h.evaluations;
            }
            h.max_fd_error = std::max(h.max_fd_error, fd_error(alpha, x, y));
        }
        part[c] = h;
    });
    HessianCheck out;
    out.worst_slack = out.worst_positivity = std::numeric_limits<double>::infinity();
    for (const auto& h : part) {
        out.evaluations += h.evaluations;
        out.worst_slack = std::min(out.worst_slack, h.worst_slack);
        out.worst_positivity = std::min(out.worst_positivity, h.worst_positivity);
        out.max_fd_error = std::max(out.max_fd_error, h.max_fd_error);
        out.max_value = std::max(out.max_value, h.max_value);
    }
    return out;
}

Vec tau_sequence(const CubeTree& t, const Measure& mu, const Vec& w, const Vec& sigma, double alpha) {
    Vec aw = cube_averages(t, mu, w), as = cube_averages(t, mu, sigma);
    Vec tau(t.size(), 0.0);
    for (std::size_t c = 0; c < t.size(); ++c) {
        const Cube& q = t[static_cast<int>(c)];
        double dw = 0.0, ds = 0.0;
        for (int s : q.sons) {
            dw += std::abs(aw[static_cast<std::size_t>(s)] - aw[c]);
            ds += std::abs(as[static_cast<std::size_t>(s)] - as[c]);
        }
        tau[c] = std::pow(aw[c] * as[c], alpha) * (dw * dw / (aw[c] * aw[c]) + ds * ds / (as[c] * as[c])) * q.mass;
    }
    return tau;
}

MidpointCheck midpoint_inequality_check(const CubeTree& t, const Measure& mu, int cube, const Vec& w,
                                        const Vec& sigma, double alpha, double Q) {
    const Cube& q = t[cube];
    MidpointCheck r;
    const double ax = cube_average(t, mu, cube, w), ay = cube_average(t, mu, cube, sigma);
    auto in_domain = [&](double x, double y) {
        const double p = x * y;
        return p >= 1.0 - 1e-12 && p <= Q * (1.0 + 1e-12);
    };
    if (!in_domain(ax, ay))
        throw DomainExit("cube " + std::to_string(q.label) + ": <w><sigma> = " + std::to_string(ax * ay));
    r.difference = q.mass * bellman_value(alpha, ax, ay);
    double gx = 0.0, gy = 0.0;
    double lower = 0.0;
    double dw = 0.0, ds = 0.0;
    for (int s : q.sons) {
        const double p = t[s].mass / q.mass;
        const double bx = cube_average(t, mu, s, w), by = cube_average(t, mu, s, sigma);
        if (!in_domain(bx, by))
            throw DomainExit("son of cube " + std::to_string(q.label) + ": <w><sigma> = " + std::to_string(bx * by));
        r.difference -= t[s].mass * bellman_value(alpha, bx, by);
        gx += p * (ax - bx);
        gy += p * (ay - by);
        dw += std::abs(bx - ax);
        ds += std::abs(by - ay);
        const double ex = bx - ax, ey = by - ay;
        // composite Simpson for int_0^{1/2} (1 - t)(-q'') dt
        constexpr int kSteps = 64;
        const double hstep = 0.5 / kSteps;
        double acc = 0.0;
        for (int i = 0; i <= kSteps; ++i) {
            const double tt = i * hstep;
            const double cx = ax + tt * ex, cy = ay + tt * ey;
            if (cx < ax / 2 * (1 - 1e-12) || cy < ay / 2 * (1 - 1e-12)) r.left_half_ok = false;
            const double f = (1 - tt) * -bellman_hessian(alpha, cx, cy).form(ex, ey);
            const double wgt = (i == 0 || i == kSteps) ? 1.0 : (i % 2 ? 4.0 : 2.0);
            acc += wgt * f;
        }
        lower += p * acc * hstep / 3.0;
    }
    r.gradient_residual = std::max(std::abs(gx) / ax, std::abs(gy) / ay);
    r.lower_bound = q.mass * lower;
    r.tau = std::pow(ax * ay, alpha) * (dw * dw / (ax * ax) + ds * ds / (ay * ay)) * q.mass;
    r.c_emp = r.tau > 0.0 ? r.lower_bound / r.tau : 0.0;
    return r;
}

TauResult tau_carleson_experiment(const CubeTree& t, const Measure& mu, const std::vector<Weight>& weights,
                                  double alpha) {
    TauResult res;
    res.rows.resize(weights.size());
    parallel_for(weights.size(), [&](std::size_t i) {
        const Weight& W = weights[i];
        TauRow row;
        row.a2 = W.a2;
        // averages over tree cubes can exceed the ball characteristic
        row.q_domain = std::max(W.a2, a2_over_cubes(t, mu, W.w));
        row.carleson = carleson_constant(t, tau_sequence(t, mu, W.w, W.sigma, alpha));
        row.min_c = std::numeric_limits<double>::infinity();
        row.min_difference = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < t.size(); ++c) {
            if (t[static_cast<int>(c)].sons.empty()) continue;
            auto m = midpoint_inequality_check(t, mu, static_cast<int>(c), W.w, W.sigma, alpha, row.q_domain);
            const double tol = 1e-12 * t[static_cast<int>(c)].mass * bellman_value(alpha, 1, row.q_domain);
            if (m.difference < -tol || m.difference < m.lower_bound - tol - 1e-9 * std::abs(m.lower_bound) ||
                !m.left_half_ok || m.gradient_residual > 1e-12)
                row.midpoint_ok = false;
            row.min_difference = std::min(row.min_difference, m.difference);
            if (m.tau > 0.0) row.min_c = std::min(row.min_c, m.c_emp);
        }
        res.rows[i] = row;
    });
    Vec xs, ys;
    for (const auto& r : res.rows)
        if (r.carleson > 0.0) {
            xs.push_back(r.a2);
            ys.push_back(r.carleson);
        }
    res.slope = xs.size() >= 2 ? loglog_fit(xs, ys).slope : 0.0;
    return res;
}

}  // namespace a2lab
