#pragma once
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "a2lab/common.hpp"
#include "a2lab/cube_tree.hpp"
#include "a2lab/haar.hpp"
#include "a2lab/linalg.hpp"
#include "a2lab/metric_space.hpp"
#include "a2lab/weights.hpp"

namespace a2lab {

// One coefficient c_{L,I,J} between Haar functions hi (on I) and hj (on J).
struct ShiftTerm {
    int L = -1;
    int hi = -1;
    int hj = -1;
    double c = 0.0;
    double bound = 0.0;  // sqrt(mu(I)) sqrt(mu(J)) / mu(L)
};

struct DyadicShift {
    int m = 0, n = 0;
    std::vector<ShiftTerm> terms;
    std::size_t clamped = 0;   // coefficients reduced to the admissible bound
    double worst_excess = 0.0; // max |c_source| / bound before clamping
    // operator on point values: (S u)(x) = sum c h_J(x) (u, h_I)_mu
    Eigen::MatrixXd matrix;

    // max |c| / bound over stored terms
    double normalized_max() const;
};

// Coefficient source: (L, hi, hj, bound) -> c.
using CoefficientFn = std::function<double(int, int, int, double)>;

// Throws TreeTooShallow when the tree has fewer than max(m, n) + 1 generations of Haar functions.
DyadicShift assemble_shift(const CubeTree& t, const HaarSystem& hs, const Measure& mu, int m, int n,
                           const CoefficientFn& source);

// Built-in sources.
CoefficientFn random_source(std::uint64_t seed);     // uniform in [-bound, bound]
CoefficientFn sign_source(std::uint64_t seed);       // +-bound with random signs
// +-bound with signs making every term of (S f, g) nonnegative
CoefficientFn worst_sign_source(const CubeTree& t, const HaarSystem& hs, const Measure& mu, const Vec& f, const Vec& g);

struct ShiftRow {
    int m = 0, n = 0;
    double a2 = 1.0;
    double norm = 0.0;          // worst weighted norm over draws
    double unweighted = 0.0;    // worst unweighted norm over draws
    double power_norm = -1.0;   // power-iteration value on the first draw, -1 if not computed
    double dense_first = 0.0;   // dense value on the first draw
};
struct ShiftComplexity {
    int m = 0, n = 0;
    double slope = 0.0;
    double r2 = 0.0;
    double max_norm = 0.0;
    double unweighted = 0.0;
    std::size_t clamped = 0;
};
struct ShiftExperiment {
    std::vector<ShiftRow> rows;
    std::vector<ShiftComplexity> complexities;
    double complexity_exponent = 0.0;  // fitted exponent of max norm in (m+n+1)
    double max_power_dense_gap = 0.0;  // relative disagreement of the two norm methods
};

struct ShiftExperimentParams {
    std::vector<std::pair<int, int>> complexities{{0, 0}, {1, 0}, {1, 1}, {2, 2}};
    std::string source = "random";  // random | signs | worst
    int draws = 20;
    std::uint64_t seed = 1;
    int power_stride = 4;  // power-iteration cross-check on every k-th weight
};

ShiftExperiment shift_bound_experiment(const CubeTree& t, const Measure& mu, const std::vector<Weight>& weights,
                                       const ShiftExperimentParams& p);

// Stopping family below L.
struct StoppingMember {
    int cube = -1;
    bool ratio_stop = false;
};
struct StoppingFamily {
    int L = -1;
    int m = 0, n = 0;
    double p = 2.0;  // 2 - 1/(m+n+1)
    std::vector<StoppingMember> members;
};
StoppingFamily build_stopping_family(const CubeTree& t, const Measure& mu, int L, const Vec& w, const Vec& sigma,
                                     int m, int n);
// max over members and father/son pairs strictly between L and the member of
// (m+n+1) |<v>_son / <v>_father - 1|, v in {w, sigma}; < 1 is the required property
double stopping_ratio_check(const CubeTree& t, const Measure& mu, const StoppingFamily& fam, const Vec& w,
                            const Vec& sigma);

// max over cubes of sum over sons of max(1, mu(I)/mu(s) - 1); 2 on binary trees
double son_ratio_constant(const CubeTree& t);

struct SborReport {
    double worst_slack = 0.0;  // min of rhs - lhs
    double worst_ratio = 0.0;  // max of lhs / rhs
    double kappa = 2.0;
    double holder_slack = 0.0; // rhs - lhs of the p-trick inequality
    std::size_t members = 0;
};
SborReport verify_sbor(const CubeTree& t, const Measure& mu, const StoppingFamily& fam, const Vec& phi,
                       const Vec& w, const Vec& sigma, double alpha);

// S_L and R_L at generation g(L) + k for the function phi v (v = w or sigma).
struct SlRl {
    double S = 0.0;
    double R = 0.0;
    double sl_rhs = 0.0;         // sqrt(sum |(phi v, h^v)|^2) sqrt(sum_{I,i} <v>_I mu(I) / mu(L))
    double sl_rhs_literal = 0.0; // sqrt(sum |(phi v, h^v)|^2) sqrt(<v>_L)
};
SlRl sl_rl_functionals(const CubeTree& t, const HaarSystem& hs, const Measure& mu, int L, int k, const Vec& phi,
                       const Vec& v);

struct FourWaySplit {
    double form = 0.0;  // (S(phi w), psi sigma)_mu
    double exact[4] = {0, 0, 0, 0};
    double bounded[4] = {0, 0, 0, 0};
    double products[4] = {0, 0, 0, 0};  // sum_L of S/R products times C_h^2 and multiplicity factors
    double exact_sum() const { return exact[0] + exact[1] + exact[2] + exact[3]; }
    double bounded_sum() const { return bounded[0] + bounded[1] + bounded[2] + bounded[3]; }
    double products_sum() const { return products[0] + products[1] + products[2] + products[3]; }
};
FourWaySplit four_way_split(const CubeTree& t, const HaarSystem& hs, const Measure& mu, const DyadicShift& s,
                            const Vec& phi, const Vec& psi, const Vec& w, const Vec& sigma);

}  // namespace a2lab
