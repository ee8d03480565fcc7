#include <doctest.h>

#include <cmath>
#include <limits>

#include "a2lab/carleson.hpp"
#include "a2lab/cube_tree.hpp"
#include "a2lab/haar.hpp"
#include "a2lab/lattice.hpp"
#include "a2lab/rng.hpp"
#include "a2lab/weights.hpp"

using namespace a2lab;

namespace {

// Root with sons {0} and {1, 2}, then singletons.
CubeTree three_point_tree(const Measure& mu) {
    return CubeTree::from_labels({{0, 0, 0}, {0, 1, 1}, {0, 1, 2}}, 0.25, mu);
}

MetricSpace two_points() { return MetricSpace::from_matrix({{0.0, 1.0}, {1.0, 0.0}}); }

// sup over every ball B(x, r), radii from the distance set plus the whole space
double brute_a2(const MetricSpace& X, const Measure& mu, const Vec& w) {
    double best = 0.0;
    for (Index x = 0; x < static_cast<Index>(X.size()); ++x)
        for (Index y = 0; y < static_cast<Index>(X.size()); ++y)
            for (double r : {X(x, y) + 1e-12, 2.0}) {
                double m = 0, a = 0, b = 0;
                for (Index z : ball(X, x, r)) {
                    m += mu.mass[z];
                    a += w[z] * mu.mass[z];
                    b += mu.mass[z] / w[z];
                }
                best = std::max(best, a * b / (m * m));
            }
    return best;
}

}  // namespace

TEST_CASE("Haar function with son masses one third and two thirds") {
    const Measure mu{{1.0 / 3, 1.0 / 3, 1.0 / 3}};
    const CubeTree t = three_point_tree(mu);
    const HaarSystem hs = HaarSystem::build(t, mu);
    REQUIRE(hs.of_cube(t.root()).size() == 1);
    const HaarFunction& h = hs[static_cast<std::size_t>(hs.of_cube(t.root())[0])];
    CHECK(std::abs(h.son_values[0]) == doctest::Approx(std::sqrt(2.0)));
    CHECK(std::abs(h.son_values[1]) == doctest::Approx(std::sqrt(2.0) / 2));
    CHECK(h.son_values[0] * h.son_values[1] < 0.0);
}

TEST_CASE("equal-mass sons give plus or minus one over the root of the mass") {
    const Measure mu = Measure::uniform(8);
    const CubeTree t = CubeTree::regular(8, 2, 3, 0.5, mu);
    const HaarSystem hs = HaarSystem::build(t, mu);
    CHECK(hs.size() == 7);
    for (std::size_t i = 0; i < hs.size(); ++i) {
        const double m = t[hs[i].cube].mass;
        for (double v : hs[i].son_values) CHECK(std::abs(v) == doctest::Approx(1.0 / std::sqrt(m)));
    }
}

TEST_CASE("Parseval on a three-level tree with a random measure") {
    Rng rng(4);
    Measure mu{Vec(27)};
    for (auto& m : mu.mass) m = rng.uniform(0.1, 2.0);
    const CubeTree t = CubeTree::regular(27, 3, 3, 1.0 / 3, mu);
    const HaarSystem hs = HaarSystem::build(t, mu);
    CHECK(hs.size() == 26);
    for (int i = 0; i < 100; ++i) {
        Vec f(27);
        for (auto& v : f) v = rng.normal();
        double norm2 = 0.0, integral = 0.0;
        for (std::size_t x = 0; x < 27; ++x) {
            norm2 += f[x] * f[x] * mu.mass[x];
            integral += f[x] * mu.mass[x];
        }
        double sum = integral * integral / mu.total();
        for (std::size_t h = 0; h < hs.size(); ++h) sum += std::pow(hs.coefficient(t, mu, h, f), 2);
        CHECK(sum == doctest::Approx(norm2).epsilon(1e-10));
    }
}

TEST_CASE("zero-mass son is rejected") {
    const Measure mu{{0.5, 0.0, 0.5}};
    CHECK_THROWS_AS(HaarSystem::build(three_point_tree(mu), mu), ZeroMassSon);
}

TEST_CASE("unit weight leaves the Haar function unchanged") {
    const Vec vals = {1.0, -1.0}, mass = {0.5, 0.5};
    const auto d = weighted_haar_decomposition(vals, mass, mass);
    CHECK(d.alpha == doctest::Approx(1.0));
    CHECK(d.beta == doctest::Approx(0.0));
    CHECK(d.hw[0] == doctest::Approx(1.0));
    CHECK(d.hw[1] == doctest::Approx(-1.0));
}

TEST_CASE("two-son decomposition with w = (4, 1) in closed form") {
    // h = (1, -1) on sons of mass 1/2; projection onto constants in L2(w) is 0.6,
    // the remainder (0.4, -1.6) has weighted norm sqrt(1.6)
    const Vec vals = {1.0, -1.0}, mass = {0.5, 0.5}, wmass = {2.0, 0.5};
    const auto d = weighted_haar_decomposition(vals, mass, wmass);
    CHECK(d.alpha == doctest::Approx(std::sqrt(1.6)));
    CHECK(d.beta == doctest::Approx(0.6));
    CHECK(d.hw[0] == doctest::Approx(0.4 / std::sqrt(1.6)));
    CHECK(d.hw[1] == doctest::Approx(-1.6 / std::sqrt(1.6)));
    CHECK(d.delta_w == doctest::Approx(3.0));  // |4 - 2.5| + |1 - 2.5|
    const auto c = check_decomposition(vals, mass, wmass, d);
    CHECK(c.identity_residual < 1e-14);
    CHECK(c.alpha_slack > 0.0);
    CHECK(c.beta_slack >= -1e-15);
    CHECK(c.delta_slack >= -1e-15);
    CHECK(c.beta_delta_slack > 0.0);
    CHECK(c.norm_error < 1e-14);
    CHECK(c.orthogonality < 1e-14);
}

TEST_CASE("zero weight mass is degenerate") {
    CHECK_THROWS_AS(weighted_haar_decomposition(Vec{1.0, -1.0}, Vec{0.5, 0.5}, Vec{0.0, 0.0}), DegenerateWeight);
}

TEST_CASE("A2 characteristic of constant and two-point weights") {
    const MetricSpace X = two_points();
    const BallIndex bi(X);
    const Measure mu = Measure::uniform(2);
    CHECK(a2_characteristic(bi, mu, {3.0, 3.0}) == doctest::Approx(1.0));
    CHECK(a2_characteristic(bi, mu, {4.0, 0.25}) == doctest::Approx(4.515625));
    CHECK(ainfty_characteristic(bi, mu, {4.0, 0.25}) == doctest::Approx(2.125));
    CHECK(ainfty_characteristic(bi, mu, {3.0, 3.0}) == doctest::Approx(1.0));
}

TEST_CASE("A2 matches a brute-force ball scan and its symmetries") {
    Rng rng(9);
    for (int i = 0; i < 20; ++i) {
        const MetricSpace X = random_plane_points(12, static_cast<std::uint64_t>(i + 1));
        const BallIndex bi(X);
        Measure mu{Vec(12)};
        for (auto& m : mu.mass) m = rng.uniform(0.2, 1.0);
        Vec w(12), inv(12), scaled(12);
        for (std::size_t x = 0; x < 12; ++x) {
            w[x] = std::exp(2.0 * rng.normal());
            inv[x] = 1.0 / w[x];
            scaled[x] = 7.0 * w[x];
        }
        const double a2 = a2_characteristic(bi, mu, w);
        CHECK(a2 == doctest::Approx(brute_a2(X, mu, w)).epsilon(1e-12));
        CHECK(a2_characteristic(bi, mu, inv) == doctest::Approx(a2).epsilon(1e-12));
        CHECK(a2_characteristic(bi, mu, scaled) == doctest::Approx(a2).epsilon(1e-12));
        const double ainf = ainfty_characteristic(bi, mu, w);
        CHECK(ainf >= 1.0 - 1e-12);
        CHECK(ainf <= a2 * (1 + 1e-12));
    }
}

TEST_CASE("maximal function") {
    const MetricSpace X = uniform_net(20);
    const BallIndex bi(X);
    const Vec nu(20, 0.05);
    const Vec c(20, -2.5);
    for (double v : maximal_function(bi, c, nu)) CHECK(v == doctest::Approx(2.5));
    Vec spike(20, 0.0);
    spike[0] = 1.0;
    const Vec m = maximal_function(bi, spike, nu);
    CHECK(m[0] == doctest::Approx(1.0));
    for (std::size_t x = 1; x < 20; ++x) {
        // the smallest ball around x reaching point 0 is symmetric: 2x + 1 points, clipped to X
        CHECK(m[x] == doctest::Approx(1.0 / static_cast<double>(std::min<std::size_t>(2 * x + 1, 20))));
        CHECK(m[x] <= m[x - 1]);
    }
    Rng rng(2);
    Vec f(20);
    for (auto& v : f) v = rng.normal();
    const Vec mf = maximal_function(bi, f, nu);
    for (std::size_t x = 0; x < 20; ++x) CHECK(mf[x] >= std::abs(f[x]) - 1e-15);
}

TEST_CASE("Carleson constant") {
    const Measure mu = Measure::uniform(16);
    const CubeTree t = CubeTree::regular(16, 2, 4, 0.5, mu);
    CHECK(carleson_constant(t, Vec(t.size(), 0.0)) == 0.0);
    Vec a(t.size(), 0.0);
    const int leaf = t.generation(4)[3];
    a[static_cast<std::size_t>(leaf)] = t[leaf].mass;
    CHECK(carleson_constant(t, a) == doctest::Approx(1.0));
    Rng rng(1);
    for (auto& v : a) v = rng.uniform();
    double brute = 0.0;
    for (std::size_t q = 0; q < t.size(); ++q) {
        double s = 0.0;
        for (int r : t.subtree(static_cast<int>(q))) s += a[static_cast<std::size_t>(r)];
        brute = std::max(brute, s / t[static_cast<int>(q)].mass);
    }
    CHECK(carleson_constant(t, a) == doctest::Approx(brute));
}

TEST_CASE("Carleson embedding with constant F and along a chain") {
    const Measure mu = Measure::uniform(32);
    const CubeTree t = CubeTree::regular(32, 2, 5, 0.5, mu);
    Rng rng(6);
    Vec alpha(t.size());
    for (auto& a : alpha) a = rng.uniform() * 0.01;
    const auto r = carleson_embedding_check(t, mu, alpha, Vec(32, 1.0));
    double sum = 0.0;
    for (double a : alpha) sum += a;
    CHECK(r.lhs1 == doctest::Approx(sum));
    CHECK(r.lhs1 <= r.B * mu.total() + 1e-15);
    CHECK(r.ok1);
    // alpha = mu on the chain of cubes holding point 0, F its indicator
    Vec chain(t.size(), 0.0);
    for (int k = 0; k <= 5; ++k) chain[static_cast<std::size_t>(t.cube_of(k, 0))] = t[t.cube_of(k, 0)].mass;
    Vec F(32, 0.0);
    F[0] = 1.0;
    const auto c = carleson_embedding_check(t, mu, chain, F);
    CHECK(c.ok1);
    CHECK(c.lhs1 >= 0.5 * c.rhs_unit);
}

TEST_CASE("random embeddings with sigma hold") {
    const Measure mu = Measure::uniform(64);
    const CubeTree t = CubeTree::regular(64, 2, 6, 0.5, mu);
    Rng rng(12);
    for (int i = 0; i < 200; ++i) {
        Vec alpha(t.size()), F(64), sigma(64);
        for (std::size_t c = 0; c < t.size(); ++c)
            alpha[c] = rng.uniform() < 0.3 ? rng.uniform() * t[static_cast<int>(c)].mass : 0.0;
        for (auto& v : F) v = std::exp(rng.normal());
        for (auto& v : sigma) v = std::exp(2.0 * rng.normal());
        const auto r = carleson_embedding_check(t, mu, alpha, F, &sigma);
        CHECK(r.ok1);
        CHECK(r.ok2);
    }
}

TEST_CASE("power weights hit their A2 targets") {
    const MetricSpace X = uniform_net(128);
    const BallIndex bi(X);
    const Measure mu = Measure::uniform(128);
    for (double target : {2.0, 10.0, 100.0}) {
        const double beta = power_beta_for_a2(X, bi, mu, target, 0);
        const double got = a2_characteristic(bi, mu, power_weight(X, beta, 0));
        CHECK(got == doctest::Approx(target).epsilon(1e-6));
    }
    const auto fam = weight_family(X, bi, mu, "a2:1..100:per-decade=4");
    CHECK(fam.size() >= 9);
    CHECK(fam.front().a2 == doctest::Approx(1.0));
    CHECK(fam.back().a2 == doctest::Approx(100.0).epsilon(1e-6));
}

TEST_CASE("cube characteristics are bounded by ball ones on nets") {
    const MetricSpace X = uniform_net(64);
    const BallIndex bi(X);
    const Measure mu = Measure::uniform(64);
    const CubeTree t = CubeTree::regular(64, 2, 6, 0.5, mu);
    const Vec w = power_weight(X, 0.6, 0);
    CHECK(ainfty_over_cubes(t, mu, w) <= a2_over_cubes(t, mu, w) * (1 + 1e-12));
    CHECK(fujii_wilson_dyadic(t, mu, w) >= 1.0 - 1e-12);
    CHECK(delta_of(t, mu, t.root(), Vec(64, 2.0)) == doctest::Approx(0.0));
}
