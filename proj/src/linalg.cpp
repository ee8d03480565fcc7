#include "a2lab/linalg.hpp"

#include <cmath>
#include <string>

#include "a2lab/rng.hpp"

namespace a2lab {

double spectral_norm(const Eigen::MatrixXd& M, NormMethod method) {
    if (M.size() == 0) return 0.0;
    if (method == NormMethod::Power) return spectral_norm_power(M);
    if (M.rows() > 4096 || M.cols() > 4096) throw TooLarge("dense norm limited to dimension 4096");
    Eigen::MatrixXd G = M.transpose() * M;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(G, Eigen::EigenvaluesOnly);
    const double top = es.eigenvalues().maxCoeff();
    return std::sqrt(std::max(top, 0.0));
}

double spectral_norm_power(const Eigen::MatrixXd& M, double tol, int max_iter, std::uint64_t seed) {
    const Eigen::Index n = M.cols();
    if (n == 0 || M.rows() == 0) return 0.0;
    Rng rng(seed);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = rng.normal();
    v.normalize();
    double lambda = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        Eigen::VectorXd u = M * v;
        Eigen::VectorXd g = M.transpose() * u;
        lambda = v.dot(g);
        if (lambda <= 0.0) {
            if (g.norm() == 0.0) return 0.0;
        }
        // eigen-residual of the Rayleigh quotient; small residual pins the
        // eigenvalue to roughly residual^2 / gap
        const double res = (g - lambda * v).norm();
        if (res <= tol * lambda) return std::sqrt(lambda);
        v = g / g.norm();
    }
    throw NoConvergence("power iteration did not converge in " + std::to_string(max_iter) + " steps");
}

Eigen::MatrixXd similarity(const Eigen::MatrixXd& A, const Vec& w, const Vec& mu) {
    const Eigen::Index n = A.rows();
    Eigen::VectorXd s(n);
    for (Eigen::Index i = 0; i < n; ++i) s[i] = std::sqrt(w[static_cast<std::size_t>(i)] * mu[static_cast<std::size_t>(i)]);
    return s.asDiagonal() * A * s.cwiseInverse().asDiagonal();
}

double weighted_operator_norm(const Eigen::MatrixXd& A, const Vec& w, const Vec& mu, NormMethod method) {
    return spectral_norm(similarity(A, w, mu), method);
}

}  // namespace a2lab
