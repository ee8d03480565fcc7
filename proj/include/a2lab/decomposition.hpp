#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "a2lab/common.hpp"
#include "a2lab/cube_tree.hpp"
#include "a2lab/goodness.hpp"
#include "a2lab/haar.hpp"
#include "a2lab/lattice.hpp"
#include "a2lab/metric_space.hpp"
#include "a2lab/shifts.hpp"

namespace a2lab {

// Kernel bound constants measured over all admissible pairs and triples.
struct KernelReport {
    double size = 0.0;      // max |K| max(lambda(x,d), lambda(y,d))
    double holder_x = 0.0;  // max |K(x,y)-K(x',y)| d(x,y)^eps lambda(x,d(x,y)) / d(x,x')^eps, d(x,y) >= 2 d(x,x')
    double holder_y = 0.0;  // same in the second variable
    double eps = 1.0;
    std::size_t triples = 0;
};

// T[x][y] = K(x,y) mu(y), zero diagonal.
struct ModelOperator {
    std::string kernel;
    Eigen::MatrixXd K;
    Eigen::MatrixXd T;
    KernelReport report;
};

// Kernels: "inv-dist" 1/d(x,y); "hilbert" 1/(x-y) on one-dimensional
// coordinates; "zero". Throws ProfileViolation when a constant exceeds `limit`.
ModelOperator build_model_operator(const MetricSpace& X, const Measure& mu, const std::string& kernel,
                                   const KernelProfile& profile, double limit = 100.0);
KernelReport kernel_report(const MetricSpace& X, const Eigen::MatrixXd& K, const KernelProfile& profile);

// Adjoint in L^2(mu): D^{-1} T^T D.
Eigen::MatrixXd adjoint(const Eigen::MatrixXd& T, const Measure& mu);

struct Subtracted {
    Eigen::MatrixXd Ttilde;      // T - pi - pi_*
    Vec b, b_star;               // (T chi_X, h_R), (T^* chi_X, h_R)
    double disjoint_residual = 0.0;  // max over disjoint pairs of |(T~h_Q,h_R) - (T h_Q,h_R)|
    double tchi_residual = 0.0;      // max_R |(T~ chi_X, h_R)|
};
Subtracted subtract_paraproducts(const CubeTree& t, const HaarSystem& hs, const Measure& mu, const Eigen::MatrixXd& T);

// C(R, Q) = (A h_Q, h_R)_mu over Haar function ids.
Eigen::MatrixXd haar_coefficient_matrix(const CubeTree& t, const HaarSystem& hs, const Measure& mu,
                                        const Eigen::MatrixXd& A);

enum class Bucket { NestedFar, NestedNear, Disjoint };
const char* bucket_name(Bucket b);

// Geometry of cube pairs: side lengths and distances.
class PairGeometry {
public:
    PairGeometry(const MetricSpace& X, const CubeTree& t);
    double side(int q) const;
    double dist(int a, int b) const;  // dist between cubes, 0 if they meet
    double D(int q, int r) const { return side(q) + side(r) + dist(q, r); }
    // Q, R with g(Q) <= g(R)
    Bucket classify(int q, int r, int r0) const;

private:
    const CubeTree& t_;
    std::size_t n_;
    std::vector<double> d_;  // cube-by-cube distances
};

struct BucketCount {
    std::size_t far = 0, near = 0, disjoint = 0, total = 0;
    std::size_t max_near_gap = 0;
};
BucketCount count_buckets(const CubeTree& t, const PairGeometry& geo, int r0);

struct DecayRow {
    int key = 0;  // generation gap (in) or distance bin s (out)
    std::size_t pairs = 0;
    double max_ratio = 0.0;
};
struct DecayReport {
    double worst = 0.0;
    std::size_t pairs = 0;
    std::vector<DecayRow> table;
    double comparability = 1.0;  // in: max mu(Q)/mu(Q_1); out: 1
    bool monotone = true;        // table maxima do not grow along the key
};
// Pairs R in Q with gap >= r0 and R good: |C(R,Q)| / ((l(R)/l(Q))^{eps/2} (mu(R)/mu(Q_1))^{1/2})
DecayReport decay_check_in(const CubeTree& t, const HaarSystem& hs, const PairGeometry& geo,
                           const Eigen::MatrixXd& C, const std::vector<char>& good, int r0, double eps);
// Disjoint pairs with l(R) <= l(Q) and R good, against the bound with D(Q,R)
// and sup_R lambda
DecayReport decay_check_out(const CubeTree& t, const HaarSystem& hs, const PairGeometry& geo,
                            const Eigen::MatrixXd& C, const std::vector<char>& good, const KernelProfile& profile,
                            double eps);

struct IdentityResult {
    double a = 0.0;
    std::size_t events = 0;
    double lhs_ge = 0.0, rhs_ge = 0.0, residual_ge = 0.0;
    double lhs_gt = 0.0, rhs_gt = 0.0, residual_gt = 0.0;
};
// Both sides of the averaging identity over the enumerated lattices. a <= 0
// selects a = min p_Q. Throws EnumerationInfeasible.
IdentityResult averaging_identity_check(const MetricSpace& X, const Measure& mu, const HierarchyParams& hp,
                                        const GoodnessParams& gp, const Eigen::MatrixXd& T, const Vec& f,
                                        const Vec& g, double a = -1.0);
// Same with the enumeration computed once for several operators and pairs.
IdentityResult averaging_identity_check(const EnumeratedGoodness& eg, const Measure& mu, const Eigen::MatrixXd& T,
                                        const Vec& f, const Vec& g, double a);

struct ContainmentRow {
    int s0 = 0;
    double freq = 0.0;
    double stderr_ = 0.0;
    std::size_t samples = 0;  // samples with at least one qualifying pair
    double exact = -1.0;      // enumerated value, -1 when not computed
};
struct ContainmentResult {
    std::vector<ContainmentRow> rows;
    int threshold = -1;  // least s0 from which every larger s0 in the sweep passes
};
// Per-sample fraction of disjoint pairs (Q, R), l(R) <= l(Q), with R inside
// Q^{(s + s0 + offset)}, where delta^{-s} l(Q) <= D(Q,R) < delta^{-s-1} l(Q).
double containment_fraction(const CubeTree& t, const PairGeometry& geo, int s0, int offset, bool* any = nullptr);
ContainmentResult containment_probability_check(const MetricSpace& X, const HierarchyParams& hp,
                                                const std::vector<int>& s0_values, int offset, std::size_t trials,
                                                bool exact = false);

struct ExtractedFamily {
    int key = 0;       // gap n (in) or packed (t, s) (out)
    int t = 0, s = 0;
    DyadicShift shift;
    double form = 0.0;  // (S f, g) with the sign pattern, nonnegative
};
struct ExtractionReport {
    std::vector<ExtractedFamily> in, out;
    double sigma_in = 0.0, sigma_out = 0.0;  // exact sums over the extracted pairs
    double bound_in = 0.0, bound_out = 0.0;  // recombination bounds
    double c_in = 0.0, c_out = 0.0, c_lambda = 0.0, comparability = 1.0;
    double worst_normalized = 0.0;           // max normalized coefficient / bound
    std::size_t out_pairs = 0, out_contained = 0;
};
// Builds the shift families of the nested-far and disjoint sums for fixed f, g.
// Throws CoefficientOverflow when a normalized coefficient exceeds its bound.
ExtractionReport extract_shifts(const CubeTree& t, const HaarSystem& hs, const Measure& mu, const PairGeometry& geo,
                                const Eigen::MatrixXd& C, const std::vector<char>& good, const KernelProfile& profile,
                                const Vec& f, const Vec& g, int r0, int s0, int offset, double eps,
                                const DecayReport& in_report, const DecayReport& out_report);

// Shift coefficients read off T~: c_{L,I,J} = scale (T~ h_I, h_J), with the
// scale chosen so that the largest normalized coefficient equals 1.
CoefficientFn kernel_source(const CubeTree& t, const HaarSystem& hs, const Eigen::MatrixXd& C, int m, int n);

}  // namespace a2lab
