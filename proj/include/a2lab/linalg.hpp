#pragma once
#include <Eigen/Dense>
#include <cstdint>

#include "a2lab/common.hpp"

namespace a2lab {

enum class NormMethod { Dense, Power };

// Largest singular value. Dense: eigenvalues of M^T M. Power: power
// iteration on M^T M stopped on the eigen-residual; throws NoConvergence.
double spectral_norm(const Eigen::MatrixXd& M, NormMethod method = NormMethod::Dense);
double spectral_norm_power(const Eigen::MatrixXd& M, double tol = 1e-10, int max_iter = 200000,
                           std::uint64_t seed = 1);

// Norm of A on L^2(w dmu), where A acts on vectors of point values:
// || D^{1/2} A D^{-1/2} ||_2 with D = diag(w * mu).
double weighted_operator_norm(const Eigen::MatrixXd& A, const Vec& w, const Vec& mu,
                              NormMethod method = NormMethod::Dense);

// D^{1/2} A D^{-1/2}
Eigen::MatrixXd similarity(const Eigen::MatrixXd& A, const Vec& w, const Vec& mu);

}  // namespace a2lab
