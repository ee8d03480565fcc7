#pragma once
#include <cstdint>
#include <vector>

#include "a2lab/common.hpp"
#include "a2lab/cube_tree.hpp"
#include "a2lab/lattice.hpp"
#include "a2lab/metric_space.hpp"

namespace a2lab {

struct GoodnessParams {
    double gamma = 0.25;
    int r = 1;
    double eps_cz = 1.0;
    double lambda_doubling = 2.0;
    double a = 0.0;

    // gamma = eps / (2 (eps + log2 C))
    static double gamma_from(double eps, double C);
    // eta = log(1 - a) / log(delta)
    static double eta_from(double a, double delta);
};

struct Witness {
    int cube = -1;       // larger cube Q1 (the ancestor of the classified cube)
    int generation = 0;
    bool inside = true;  // alternative "dist(Q, X \ Q1) large" held or was tested
    double distance = 0.0;
    double threshold = 0.0;
};

struct GoodnessVerdict {
    int cube = -1;
    bool is_good = true;
    std::vector<Witness> witnesses;
    bool really_good = false;
    double xi = 0.0;
    double p_q = 0.0;
};

// dist(Q, X \ A) for Q contained in the generation-n cube A; +inf if A = X.
double distance_to_complement(const MetricSpace& X, const CubeTree& t, int cube, int n);

GoodnessVerdict classify_good(const MetricSpace& X, const CubeTree& t, int cube, const GoodnessParams& gp);
std::vector<char> classify_all(const MetricSpace& X, const CubeTree& t, const GoodnessParams& gp);

struct BadRow {
    int r = 0;
    std::size_t trials = 0;
    double freq = 0.0;
    double stderr_ = 0.0;
};

// Monte Carlo bad frequency of the cube holding x at generation k (the fixed
// finest level when k < 0), for each r.
std::vector<BadRow> estimate_bad_probability(const MetricSpace& X, const HierarchyParams& hp, double gamma, Index x,
                                             int k, const std::vector<int>& r_values, std::size_t trials);
// Same quantity exactly, from the enumerated probability space.
std::vector<double> exact_bad_probability(const MetricSpace& X, const HierarchyParams& hp, double gamma, Index x, int k,
                                          const std::vector<int>& r_values);

struct BoundaryRow {
    double eps = 0.0;
    double freq = 0.0;
    double stderr_ = 0.0;
};
// Frequency of x lying in the eps-collar of some generation-k cube.
std::vector<BoundaryRow> boundary_hit_probability(const MetricSpace& X, const HierarchyParams& hp, Index x, int k,
                                                  const std::vector<double>& eps, std::size_t trials);

// Enumerated lattices with goodness, conditional good probabilities and
// the really-good weights.
struct EnumeratedGoodness {
    std::vector<LatticeSample> lattices;
    std::vector<CubeTree> trees;
    std::vector<std::vector<char>> good;  // [lattice][cube]
    // P(cube good | partition at its generation), the cube's p_Q
    std::vector<std::vector<double>> p;
    double min_p = 1.0;
};
EnumeratedGoodness enumerate_goodness(const MetricSpace& X, const Measure& mu, const HierarchyParams& hp,
                                      const GoodnessParams& gp);

// Conditional probability that a cube is really good in each lattice event:
// a / p_Q on good cubes, 0 on bad ones. Throws AExceedsP.
std::vector<std::vector<double>> really_good_adjust(const EnumeratedGoodness& eg, double a);

// Sampling variant: xi uniform per cube, really good iff good and xi <= a/p.
void really_good_sample(std::vector<GoodnessVerdict>& verdicts, double a, std::uint64_t seed, std::uint64_t trial);

}  // namespace a2lab
