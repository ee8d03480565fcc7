#pragma once
#include <string>
#include <vector>

#include "a2lab/common.hpp"
#include "a2lab/cube_tree.hpp"
#include "a2lab/metric_space.hpp"

namespace a2lab {

struct Weight {
    Vec w;
    Vec sigma;  // 1 / w
    double a2 = 1.0;
    double ainfty = 1.0;
    std::string label;
};

// sup over all balls of <w>_B <w^{-1}>_B
double a2_characteristic(const BallIndex& balls, const Measure& mu, const Vec& w);
// sup over all balls of <w>_B exp(-<log w>_B)
double ainfty_characteristic(const BallIndex& balls, const Measure& mu, const Vec& w);
// same two quantities with the sup taken over tree cubes instead of balls
double a2_over_cubes(const CubeTree& t, const Measure& mu, const Vec& w);
double ainfty_over_cubes(const CubeTree& t, const Measure& mu, const Vec& w);
// sup over cubes Q of int_Q M^d(w chi_Q) dmu / w(Q), dyadic maximal function
double fujii_wilson_dyadic(const CubeTree& t, const Measure& mu, const Vec& w);

Weight make_weight(const BallIndex& balls, const Measure& mu, Vec w, std::string label = "");

// M_nu f(x) = max over balls around x of (int |f| dnu) / nu(B)
Vec maximal_function(const BallIndex& balls, const Vec& f, const Vec& nu);

// <f>_Q with respect to mu
double cube_average(const CubeTree& t, const Measure& mu, int cube, const Vec& f);
Vec cube_averages(const CubeTree& t, const Measure& mu, const Vec& f);

// max(dist(x, center), h)^beta, h = minimal separation of X
Vec power_weight(const MetricSpace& X, double beta, Index center);

// Weight family description:
//   power:beta=B[:center=C]
//   power:beta=LO..HI[:count=K][:center=C]   (K equally spaced exponents, default 9)
//   a2:LO..HI[:per-decade=P][:center=C]      (power weights tuned by bisection so that
//                                             [w]_2 hits log-spaced targets)
//   const
std::vector<Weight> weight_family(const MetricSpace& X, const BallIndex& balls, const Measure& mu,
                                  const std::string& spec);

// exponent beta >= 0 of the power weight with [w]_2 = target (bisection)
double power_beta_for_a2(const MetricSpace& X, const BallIndex& balls, const Measure& mu, double target, Index center);

}  // namespace a2lab
