#pragma once
#include <cstdint>
#include <vector>

#include "a2lab/common.hpp"
#include "a2lab/cube_tree.hpp"
#include "a2lab/metric_space.hpp"
#include "a2lab/weights.hpp"

namespace a2lab {

// B(x, y) = x^alpha y^alpha
double bellman_value(double alpha, double x, double y);
struct Hessian2 {
    double xx = 0.0, xy = 0.0, yy = 0.0;
    double form(double dx, double dy) const { return xx * dx * dx + 2 * xy * dx * dy + yy * dy * dy; }
};
Hessian2 bellman_hessian(double alpha, double x, double y);
void bellman_gradient(double alpha, double x, double y, double& gx, double& gy);

struct HessianCheck {
    std::size_t evaluations = 0;
    double worst_slack = 0.0;        // min of (-d^2B - rhs) / (B (u^2 + v^2))
    double worst_positivity = 0.0;   // min of -d^2B / (B (u^2 + v^2)) over all x, y > 0
    double max_fd_error = 0.0;       // max relative error, finite differences vs analytic
    double max_value = 0.0;          // max B over the sampled domain points
};
HessianCheck bellman_hessian_check(double alpha, double Q, std::size_t samples, std::uint64_t seed = 1);

// tau_I for every cube of the tree
Vec tau_sequence(const CubeTree& t, const Measure& mu, const Vec& w, const Vec& sigma, double alpha);

struct MidpointCheck {
    double difference = 0.0;   // mu(I) B(a) - sum mu(s_i) B(b_i)
    double lower_bound = 0.0;  // mu(I) sum p_i int_0^{1/2} (1-t)(-q_i'') dt
    double tau = 0.0;
    double c_emp = 0.0;        // lower_bound / tau (0 when tau = 0)
    double gradient_residual = 0.0;  // |sum p_i (a - b_i)|
    bool left_half_ok = true;
};
// Throws DomainExit when an average pair leaves {1 <= xy <= Q}.
MidpointCheck midpoint_inequality_check(const CubeTree& t, const Measure& mu, int cube, const Vec& w,
                                        const Vec& sigma, double alpha, double Q);

struct TauRow {
    double a2 = 0.0;
    double q_domain = 0.0;
    double carleson = 0.0;
    double min_c = 0.0;
    double min_difference = 0.0;
    bool midpoint_ok = true;
};
struct TauResult {
    std::vector<TauRow> rows;
    double slope = 0.0;
};
TauResult tau_carleson_experiment(const CubeTree& t, const Measure& mu, const std::vector<Weight>& weights,
                                  double alpha);

}  // namespace a2lab
