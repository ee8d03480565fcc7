#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "a2lab/metric_space.hpp"

using namespace a2lab;

namespace {

std::vector<std::vector<double>> line_matrix(const std::vector<double>& xs) {
    std::vector<std::vector<double>> d(xs.size(), std::vector<double>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = 0; j < xs.size(); ++j) d[i][j] = std::abs(xs[i] - xs[j]);
    return d;
}

std::vector<Index> scan_ball(const MetricSpace& X, Index c, double r) {
    std::vector<Index> out;
    for (std::size_t y = 0; y < X.size(); ++y)
        if (X(c, static_cast<Index>(y)) < r) out.push_back(static_cast<Index>(y));
    return out;
}

}  // namespace

TEST_CASE("three points on a line are valid without rescaling") {
    const MetricSpace X = MetricSpace::from_matrix(line_matrix({0.0, 0.5, 1.0}));
    CHECK(X.size() == 3);
    CHECK(X.diameter() == 1.0);
    CHECK_FALSE(X.report().rescaled);
    CHECK(X(0, 2) == doctest::Approx(1.0));
    CHECK(X.min_separation() == doctest::Approx(0.5));
}

TEST_CASE("forced triangle violation is rejected") {
    std::vector<std::vector<double>> d = {{0, 10, 1}, {10, 0, 1}, {1, 1, 0}};
    CHECK_THROWS_AS(MetricSpace::from_matrix(d), TriangleViolation);
}

TEST_CASE("asymmetric matrix is rejected") {
    std::vector<std::vector<double>> d = {{0, 1, 1}, {1.5, 0, 1}, {1, 1, 0}};
    CHECK_THROWS_AS(MetricSpace::from_matrix(d), NonSymmetric);
}

TEST_CASE("rescaling records the scale factor") {
    const MetricSpace X = MetricSpace::from_matrix(line_matrix({0.0, 2.0, 4.0}));
    CHECK(X.report().rescaled);
    CHECK(X.report().scale == doctest::Approx(0.25));
    CHECK(X(0, 1) == doctest::Approx(0.5));
}

TEST_CASE("64-point net passes a brute-force triangle scan") {
    const MetricSpace X = uniform_net(64);
    std::size_t bad = 0;
    double diam = 0.0;
    for (Index i = 0; i < 64; ++i)
        for (Index j = 0; j < 64; ++j) {
            diam = std::max(diam, X(i, j));
            for (Index k = 0; k < 64; ++k) bad += X(i, j) > X(i, k) + X(k, j) + 1e-15;
        }
    CHECK(bad == 0);
    CHECK(diam == doctest::Approx(1.0));
    CHECK(doubling_constant_estimate(X) <= 5);
}

TEST_CASE("balls are strict") {
    const MetricSpace X = MetricSpace::from_matrix(line_matrix({0.0, 0.3, 0.5, 1.0}));
    CHECK(ball(X, 1, 0.0).empty());
    CHECK(ball(X, 1, 1.5).size() == 4);
    CHECK(ball(X, 1, 0.35) == std::vector<Index>{0, 1, 2});
    CHECK(ball(X, 1, 0.35) == scan_ball(X, 1, 0.35));
    // radius equal to a distance excludes that point
    CHECK(ball(X, 0, 0.5) == std::vector<Index>{0, 1});
}

TEST_CASE("balls grow with the radius and match a direct scan") {
    const MetricSpace X = random_plane_points(20, 3);
    for (Index c = 0; c < 20; ++c) {
        std::size_t prev = 0;
        for (double r = 0.0; r <= 1.2; r += 0.05) {
            const auto b = ball(X, c, r);
            CHECK(b == scan_ball(X, c, r));
            CHECK(b.size() >= prev);
            prev = b.size();
        }
        CHECK(ball(X, c, X.diameter() + 1.0).size() == 20);
    }
}

TEST_CASE("ball index prefixes are exactly the distinct balls") {
    const MetricSpace X = random_tree_metric(15, 2);
    const BallIndex bi(X);
    for (Index x = 0; x < 15; ++x) {
        CHECK(bi.cuts(x).back() == 15);
        for (Index c : bi.cuts(x)) {
            std::vector<Index> prefix(bi.order(x).begin(), bi.order(x).begin() + c);
            std::sort(prefix.begin(), prefix.end());
            double r = c < 15 ? X(x, bi.order(x)[static_cast<std::size_t>(c)]) : 2.0;
            CHECK(prefix == scan_ball(X, x, r));
        }
    }
}

TEST_CASE("doubling estimate on small spaces and under refinement") {
    CHECK(doubling_constant_estimate(MetricSpace::from_matrix(line_matrix({0.0, 1.0}))) == 2);
    const std::size_t a64 = doubling_constant_estimate(uniform_net(64));
    const std::size_t a128 = doubling_constant_estimate(uniform_net(128));
    CHECK(a64 <= 5);
    CHECK(a128 <= 5);
}

TEST_CASE("doubling estimate ignores the raw scale") {
    auto d = line_matrix({0.0, 0.1, 0.15, 0.4, 0.9, 1.0});
    const std::size_t a = doubling_constant_estimate(MetricSpace::from_matrix(d));
    for (auto& row : d)
        for (auto& v : row) v *= 7.5;
    CHECK(doubling_constant_estimate(MetricSpace::from_matrix(d)) == a);
}

TEST_CASE("measure helpers") {
    const Measure mu = Measure::uniform(4);
    CHECK(mu.total() == doctest::Approx(1.0));
    CHECK(mu.of({0, 2}) == doctest::Approx(0.5));
    Measure bad{{0.5, -0.1}};
    CHECK_THROWS(validate_measure(bad, 2));
}

TEST_CASE("kernel profiles are doubling") {
    const MetricSpace X = uniform_net(32);
    const Measure mu = Measure::uniform(32);
    const auto lin = check_kernel_profile(X, mu, linear_profile());
    CHECK(lin.increasing);
    CHECK(lin.doubling <= 2.0 + 1e-12);
    const auto meas = check_kernel_profile(X, mu, measure_profile(X, mu));
    CHECK(meas.increasing);
    CHECK(meas.ball_ratio <= 1.0 + 1e-12);
}
