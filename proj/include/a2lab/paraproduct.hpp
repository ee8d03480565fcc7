#pragma once
#include <vector>

#include "a2lab/common.hpp"
#include "a2lab/cube_tree.hpp"
#include "a2lab/haar.hpp"
#include "a2lab/metric_space.hpp"
#include "a2lab/weights.hpp"

namespace a2lab {

enum class ParaKind { Pi, PiStar, O };

// pi(f)   = sum_R <f>_R b_R h_R
// pi_*(f) = sum_R (f, h_R) b_R chi_R / mu(R)
// o(f)    = <f>_X m chi_X, with m = <T chi_X>
struct Paraproduct {
    ParaKind kind = ParaKind::Pi;
    Vec b;           // one entry per Haar function
    double m = 0.0;  // mean used by o
};

// (f, h_R)_mu for every Haar function
Vec haar_coefficients(const CubeTree& t, const HaarSystem& hs, const Measure& mu, const Vec& f);

// Direct evaluation as finite sums.
Vec paraproduct_apply(const CubeTree& t, const HaarSystem& hs, const Measure& mu, const Paraproduct& pp, const Vec& f);
// Operator on point values.
Eigen::MatrixXd paraproduct_matrix(const CubeTree& t, const HaarSystem& hs, const Measure& mu, const Paraproduct& pp);

// sum over Haar functions of b^2, collected per cube
Vec per_cube_squares(const CubeTree& t, const HaarSystem& hs, const Vec& b);

struct AinftyCheck {
    double fujii_wilson = 1.0;   // dyadic Fujii-Wilson constant of w
    double exp_log = 1.0;        // max of the ball and cube exp-log characteristics
    double carleson = 0.0;       // ||b||_C of the per-cube squares
    double worst_ratio = 0.0;    // max_Q lhs / (fujii_wilson ||b||_C w(Q))
    double worst_ratio_exp_log = 0.0;  // same against the exp-log constant
    double chain_ratio = 0.0;    // max_R <w>_R / (exp_log inf_R M(w^{1/2} chi_R)^2)
};
// sum_{R in Q} <w>_R a_R <= C ||a||_C w(Q) on every cube Q
AinftyCheck ainfty_inequality_check(const CubeTree& t, const Measure& mu, const BallIndex& balls, const Vec& a,
                                    const Vec& w);

struct ParaRow {
    double a2 = 1.0;
    double pi = 0.0;
    double pi_star = 0.0;
    double o = 0.0;
    double o_bound_mean = 0.0;  // sqrt(<T chi>^2 [w]_2)
    double o_bound_norm = 0.0;  // sqrt(||T||^2 [w]_2)
    double ainfty_ratio = 0.0;
    double ainfty_ratio_exp_log = 0.0;
};
struct ParaExperiment {
    std::vector<ParaRow> rows;
    double slope_pi = 0.0;
    double slope_pi_star = 0.0;
    double carleson_b = 0.0;       // B_T of b_R = (T chi_X, h_R)
    double carleson_b_star = 0.0;
    double t_norm = 0.0;           // unweighted norm of T
    double adjoint_residual = 0.0; // |(pi f, g) - (f, pi_* g)| / scale, shared b
    double identity_residual = 0.0; // |pi(chi_X) - (T chi_X - <T chi_X>)|_inf / scale
    double matrix_residual = 0.0;  // matrix vs direct evaluation
    double constant_residual = 0.0; // |(pi f, 1)| / scale
};
// T acts on point values; b and b* are computed from it.
ParaExperiment paraproduct_norm_experiment(const CubeTree& t, const Measure& mu, const BallIndex& balls,
                                           const Eigen::MatrixXd& T, const std::vector<Weight>& weights,
                                           std::uint64_t seed = 1);

}  // namespace a2lab
