#pragma once
#include <functional>
#include <string>
#include <vector>

#include "a2lab/common.hpp"

namespace a2lab {

struct ValidationReport {
    std::size_t points = 0;
    double raw_diameter = 0.0;
    double scale = 1.0;  // normalized distance = raw distance * scale
    bool rescaled = false;
    double min_separation = 0.0;  // after normalization
};

// Finite metric space with distances normalized so that the diameter is 1.
// Immutable after construction.
class MetricSpace {
public:
    MetricSpace() = default;

    // Validates symmetry, positivity and the triangle inequality, then
    // rescales to diameter 1. Throws NonSymmetric / TriangleViolation.
    static MetricSpace from_matrix(const std::vector<std::vector<double>>& d);
    static MetricSpace from_coords(const std::vector<std::vector<double>>& coords);

    std::size_t size() const { return n_; }
    double operator()(Index i, Index j) const { return d_[static_cast<std::size_t>(i) * n_ + j]; }
    const double* row(Index i) const { return d_.data() + static_cast<std::size_t>(i) * n_; }
    double diameter() const { return n_ > 1 ? 1.0 : 0.0; }
    const ValidationReport& report() const { return report_; }
    double min_separation() const { return report_.min_separation; }
    // normalized coordinates when built from coords, else empty
    const std::vector<std::vector<double>>& coords() const { return coords_; }
    std::vector<std::vector<double>> matrix() const;

    // Same space with every distance multiplied by c > 0, without
    // renormalizing. Used to check scale invariance.
    MetricSpace scaled_raw(double c) const;

private:
    std::size_t n_ = 0;
    std::vector<double> d_;
    std::vector<std::vector<double>> coords_;
    ValidationReport report_;

    static MetricSpace build(std::size_t n, std::vector<double> d, bool normalize);
};

ValidationReport validate_space(const std::vector<std::vector<double>>& d);

// Point masses. Uniform means 1/n per point.
struct Measure {
    Vec mass;
    static Measure uniform(std::size_t n);
    double total() const;
    double of(const std::vector<Index>& set) const;
};
void validate_measure(const Measure& mu, std::size_t n);

// Open ball {y : d(x,y) < r}, ascending indices.
std::vector<Index> ball(const MetricSpace& X, Index center, double r);

// Per-center ordering by distance. Every distinct open ball of X centered at
// x is a prefix of order[x] ending at a group boundary, so suprema over all
// balls become scans over these prefixes.
class BallIndex {
public:
    explicit BallIndex(const MetricSpace& X);
    std::size_t size() const { return n_; }
    // order of points by distance from x (ties by index)
    const std::vector<Index>& order(Index x) const { return order_[x]; }
    // prefix lengths of distinct balls around x, ascending (last = n)
    const std::vector<Index>& cuts(Index x) const { return cuts_[x]; }

    // Calls fn(x, prefix_len) for every distinct ball.
    template <class Fn>
    void for_each_ball(Fn&& fn) const {
        for (std::size_t x = 0; x < n_; ++x)
            for (Index c : cuts_[x]) fn(static_cast<Index>(x), c);
    }

private:
    std::size_t n_;
    std::vector<std::vector<Index>> order_;
    std::vector<std::vector<Index>> cuts_;
};

// Greedy estimate of the geometric doubling constant A.
std::size_t doubling_constant_estimate(const MetricSpace& X);

// max over balls of mu(B(x,2r)) / mu(B(x,r)), radii from pairwise distances
double measure_doubling_estimate(const MetricSpace& X, const Measure& mu);

// Scale function lambda(x, r) for kernel bounds.
struct KernelProfile {
    std::string name;
    std::function<double(Index, double)> lambda;
    double doubling_const = 2.0;
    double holder_eps = 1.0;
};

KernelProfile linear_profile();  // lambda(x,r) = r
KernelProfile measure_profile(const MetricSpace& X, const Measure& mu);  // lambda = mu(B(x,r))

struct ProfileReport {
    double doubling = 0.0;   // max lambda(x,2r)/lambda(x,r)
    double ball_ratio = 0.0; // max mu(B(x,r))/lambda(x,r)
    bool increasing = true;
};
ProfileReport check_kernel_profile(const MetricSpace& X, const Measure& mu, const KernelProfile& p);

// Built-in test spaces.
MetricSpace uniform_net(std::size_t n);              // n points on [0,1]
MetricSpace grid_net(std::size_t k);                 // k x k grid in [0,1]^2
MetricSpace random_tree_metric(std::size_t n, std::uint64_t seed);
MetricSpace random_line_points(std::size_t n, std::uint64_t seed);
MetricSpace random_plane_points(std::size_t n, std::uint64_t seed);

}  // namespace a2lab
