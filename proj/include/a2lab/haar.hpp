#pragma once
#include <Eigen/Dense>
#include <vector>

#include "a2lab/common.hpp"
#include "a2lab/cube_tree.hpp"
#include "a2lab/metric_space.hpp"

namespace a2lab {

struct HaarFunction {
    int cube = -1;
    int index = 0;       // j in 0..M-2
    Vec son_values;      // value on each son, in the cube's son order
};

// Orthonormal Haar functions: for a cube with M sons, Gram-Schmidt of the
// first M-1 son indicators against constants (and each other) in L^2(mu).
class HaarSystem {
public:
    static HaarSystem build(const CubeTree& t, const Measure& mu);

    std::size_t size() const { return funcs_.size(); }
    const HaarFunction& operator[](std::size_t i) const { return funcs_[i]; }
    const std::vector<HaarFunction>& functions() const { return funcs_; }
    // ids of the Haar functions living on a cube
    const std::vector<int>& of_cube(int cube) const { return by_cube_[static_cast<std::size_t>(cube)]; }

    // pointwise values of function id
    Vec values(const CubeTree& t, std::size_t id) const;
    // (f, h_id)_mu
    double coefficient(const CubeTree& t, const Measure& mu, std::size_t id, const Vec& f) const;
    // n x H matrix whose columns are the Haar functions
    Eigen::MatrixXd matrix(const CubeTree& t) const;
    // max over functions of ||h||_inf sqrt(mu(Q))
    double sup_constant(const CubeTree& t) const;

private:
    std::vector<HaarFunction> funcs_;
    std::vector<std::vector<int>> by_cube_;
};

// h = alpha h^w + beta chi_I on the cube I, for one Haar function.
struct WeightedHaarDecomposition {
    double alpha = 0.0;
    double beta = 0.0;
    Vec hw;                 // per-son values of h^w
    double delta_w = 0.0;   // Delta_I w = sum over sons |<w>_s - <w>_I|
    double w_mass = 0.0;    // w(I)
    double avg_w = 0.0;     // <w>_I
    double h_pair_w = 0.0;  // (h, w)_mu
    double hw_pair_w = 0.0; // (h^w, w)_mu, zero up to roundoff
    double hw_norm = 0.0;   // ||h^w||_{L^2(w dmu)}
    double c_h = 0.0;       // ||h||_inf sqrt(mu(I))
};

// Son data: masses mu(s) and weighted masses w(s) = int_s w dmu.
WeightedHaarDecomposition weighted_haar_decomposition(const Vec& son_values, const Vec& son_mass,
                                                      const Vec& son_wmass);
WeightedHaarDecomposition weighted_haar_decomposition(const CubeTree& t, const Measure& mu, const HaarFunction& h,
                                                      const Vec& w);

// Checks of the decomposition properties; each field is the worst slack (>= -tol means pass).
struct DecompositionCheck {
    double identity_residual = 0.0;   // max |h - alpha h^w - beta|
    double alpha_slack = 0.0;         // c_h sqrt(<w>) - |alpha|
    double alpha_literal_slack = 0.0; // sqrt(<w>) - |alpha|, meaningful when c_h = 1
    double beta_slack = 0.0;          // |(h,w)|/w(I) - |beta|
    double orthogonality = 0.0;       // |(h^w, 1)_{w dmu}|
    double norm_error = 0.0;          // | ||h^w||_w - 1 |
    double delta_slack = 0.0;         // c_h Delta_I w sqrt(mu(I)) - |(h,w)|
    double beta_delta_slack = 0.0;    // c_h Delta_I w / (<w> sqrt(mu(I))) - |beta|
};
DecompositionCheck check_decomposition(const Vec& son_values, const Vec& son_mass, const Vec& son_wmass,
                                       const WeightedHaarDecomposition& d);

// Delta_I applied to an arbitrary weight on a tree cube.
double delta_of(const CubeTree& t, const Measure& mu, int cube, const Vec& w);

}  // namespace a2lab
