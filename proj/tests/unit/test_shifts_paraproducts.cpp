#include <doctest.h>

#include <cmath>

#include "a2lab/cube_tree.hpp"
#include "a2lab/decomposition.hpp"
#include "a2lab/haar.hpp"
#include "a2lab/linalg.hpp"
#include "a2lab/paraproduct.hpp"
#include "a2lab/rng.hpp"
#include "a2lab/shifts.hpp"
#include "a2lab/weights.hpp"

using namespace a2lab;

namespace {

struct Fixture {
    Measure mu;
    CubeTree t;
    HaarSystem hs;
    explicit Fixture(std::size_t n = 64, int levels = 6) : mu(Measure::uniform(n)) {
        t = CubeTree::regular(n, 2, levels, 0.5, mu);
        hs = HaarSystem::build(t, mu);
    }
};

Vec random_weight(Rng& rng, std::size_t n, double spread) {
    Vec w(n);
    for (auto& v : w) v = std::exp(spread * rng.normal());
    return w;
}

Vec inverse(const Vec& w) {
    Vec s(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) s[i] = 1.0 / w[i];
    return s;
}

double pair(const Vec& a, const Vec& b, const Measure& mu) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i] * mu.mass[i];
    return s;
}

}  // namespace

TEST_CASE("zero coefficients give the zero operator") {
    Fixture f;
    const auto s = assemble_shift(f.t, f.hs, f.mu, 1, 1, [](int, int, int, double) { return 0.0; });
    CHECK(s.matrix.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("Haar multiplier with unit signs has norm one") {
    Fixture f;
    const auto s = assemble_shift(f.t, f.hs, f.mu, 0, 0, sign_source(3));
    const Vec one(64, 1.0);
    CHECK(weighted_operator_norm(s.matrix, one, f.mu.mass) == doctest::Approx(1.0).epsilon(1e-10));
    CHECK(s.normalized_max() == doctest::Approx(1.0));
}

TEST_CASE("stored coefficients respect the admissible bound") {
    Fixture f;
    for (auto [m, n] : std::vector<std::pair<int, int>>{{0, 0}, {1, 0}, {1, 1}, {2, 2}}) {
        const auto s = assemble_shift(f.t, f.hs, f.mu, m, n, random_source(7));
        CHECK(s.normalized_max() <= 1.0 + 1e-12);
        for (const auto& term : s.terms) {
            const double mI = f.t[f.hs[static_cast<std::size_t>(term.hi)].cube].mass;
            const double mJ = f.t[f.hs[static_cast<std::size_t>(term.hj)].cube].mass;
            CHECK(term.bound == doctest::Approx(std::sqrt(mI) * std::sqrt(mJ) / f.t[term.L].mass));
        }
        // unweighted norm stays within the complexity scale
        CHECK(weighted_operator_norm(s.matrix, Vec(64, 1.0), f.mu.mass) <= (m + n + 1) * 2.0);
    }
    // oversized sources are clamped and reported
    const auto big = assemble_shift(f.t, f.hs, f.mu, 0, 0, [](int, int, int, double b) { return 3.0 * b; });
    CHECK(big.clamped == big.terms.size());
    CHECK(big.worst_excess == doctest::Approx(3.0));
    CHECK(big.normalized_max() <= 1.0 + 1e-12);
}

TEST_CASE("shallow trees are rejected") {
    Fixture f(8, 3);
    CHECK_THROWS_AS(assemble_shift(f.t, f.hs, f.mu, 3, 0, random_source(1)), TreeTooShallow);
}

TEST_CASE("weighted norm: identity, unit weight, scaling and method agreement") {
    Fixture f;
    Rng rng(5);
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(64, 64);
    const Vec w = random_weight(rng, 64, 1.5);
    CHECK(weighted_operator_norm(I, w, f.mu.mass) == doctest::Approx(1.0));
    const auto s = assemble_shift(f.t, f.hs, f.mu, 1, 1, random_source(2));
    const double plain = spectral_norm(s.matrix);  // uniform mu: similarity is trivial
    CHECK(weighted_operator_norm(s.matrix, Vec(64, 1.0), f.mu.mass) == doctest::Approx(plain).epsilon(1e-10));
    Vec w7 = w;
    for (auto& v : w7) v *= 7.0;
    const double nw = weighted_operator_norm(s.matrix, w, f.mu.mass);
    CHECK(weighted_operator_norm(s.matrix, w7, f.mu.mass) == doctest::Approx(nw).epsilon(1e-10));
    const double np = weighted_operator_norm(s.matrix, w, f.mu.mass, NormMethod::Power);
    CHECK(std::abs(np - nw) <= 1e-6 * nw);
    // dense value against a direct sup over random test functions
    const Eigen::MatrixXd M = similarity(s.matrix, w, f.mu.mass);
    for (int i = 0; i < 20; ++i) {
        Eigen::VectorXd x = Eigen::VectorXd::NullaryExpr(64, [&](Eigen::Index) { return rng.normal(); });
        CHECK((M * x).norm() <= nw * x.norm() * (1 + 1e-12));
    }
}

TEST_CASE("constant weights leave shift norms unweighted") {
    Fixture f;
    const MetricSpace X = uniform_net(64);
    const BallIndex bi(X);
    const auto weights = weight_family(X, bi, f.mu, "const");
    ShiftExperimentParams p;
    p.complexities = {{0, 0}};
    p.draws = 2;
    const auto res = shift_bound_experiment(f.t, f.mu, weights, p);
    for (const auto& row : res.rows) CHECK(row.norm == doctest::Approx(row.unweighted));
}

TEST_CASE("stopping family: generation stops for constant weights") {
    Fixture f;
    const Vec one(64, 1.0);
    const int L = f.t.generation(1)[0];
    const auto fam = build_stopping_family(f.t, f.mu, L, one, one, 2, 1);
    CHECK(fam.p == doctest::Approx(2.0 - 1.0 / 4.0));
    REQUIRE(fam.members.size() == 4);
    for (const auto& m : fam.members) {
        CHECK_FALSE(m.ratio_stop);
        CHECK(f.t[m.cube].generation == 3);
    }
}

TEST_CASE("stopping family: a spike forces a ratio stop") {
    Fixture f;
    Vec w(64, 1.0);
    for (std::size_t x = 0; x < 8; ++x) w[x] = 1000.0;
    const auto fam = build_stopping_family(f.t, f.mu, f.t.root(), w, inverse(w), 4, 0);
    bool any_ratio = false;
    for (const auto& m : fam.members) any_ratio = any_ratio || m.ratio_stop;
    CHECK(any_ratio);
}

TEST_CASE("stopping ratios stay inside the band and the stopping bound holds") {
    Fixture f;
    Rng rng(8);
    std::size_t checked = 0;
    for (int i = 0; i < 200; ++i) {
        const Vec w = random_weight(rng, 64, rng.uniform(0.0, 1.5));
        const Vec sigma = inverse(w);
        Vec phi(64);
        for (auto& v : phi) v = rng.normal();
        const int m = static_cast<int>(rng.below(3)), n = static_cast<int>(rng.below(3));
        const auto& gen = f.t.generation(static_cast<int>(rng.below(3)));
        const int L = gen[rng.below(gen.size())];
        const auto fam = build_stopping_family(f.t, f.mu, L, w, sigma, m, n);
        CHECK(stopping_ratio_check(f.t, f.mu, fam, w, sigma) < 1.0);
        const auto rep = verify_sbor(f.t, f.mu, fam, phi, w, sigma, 0.25);
        CHECK(rep.worst_slack >= -1e-9);
        CHECK(rep.holder_slack >= -1e-9);
        checked += rep.members;
    }
    CHECK(checked > 0);
}

TEST_CASE("stopping bound is trivial for zero phi and constant weight") {
    Fixture f;
    Rng rng(1);
    const Vec w = random_weight(rng, 64, 1.0);
    const auto fam = build_stopping_family(f.t, f.mu, f.t.root(), w, inverse(w), 2, 0);
    CHECK(verify_sbor(f.t, f.mu, fam, Vec(64, 0.0), w, inverse(w), 0.25).worst_ratio == 0.0);
    const Vec one(64, 1.0);
    Vec phi(64);
    for (auto& v : phi) v = rng.normal();
    const auto fam1 = build_stopping_family(f.t, f.mu, f.t.root(), one, one, 2, 0);
    CHECK(verify_sbor(f.t, f.mu, fam1, phi, one, one, 0.25).worst_ratio == 0.0);
}

TEST_CASE("S_L and R_L functionals") {
    Fixture f;
    Rng rng(4);
    const Vec one(64, 1.0);
    Vec phi(64);
    for (auto& v : phi) v = rng.normal();
    const int L = f.t.generation(1)[1];
    const auto flat = sl_rl_functionals(f.t, f.hs, f.mu, L, 2, phi, one);
    CHECK(flat.R == doctest::Approx(0.0));
    const auto zero = sl_rl_functionals(f.t, f.hs, f.mu, L, 2, Vec(64, 0.0), random_weight(rng, 64, 1.0));
    CHECK(zero.S == 0.0);
    CHECK(zero.R == 0.0);
    for (int i = 0; i < 50; ++i) {
        const Vec w = random_weight(rng, 64, 1.0);
        const auto r = sl_rl_functionals(f.t, f.hs, f.mu, L, static_cast<int>(rng.below(3)), phi, w);
        CHECK(r.S <= r.sl_rhs * (1 + 1e-12) + 1e-15);
    }
}

TEST_CASE("four-way split dominates the shift form") {
    Fixture f;
    Rng rng(10);
    for (int i = 0; i < 30; ++i) {
        const int m = static_cast<int>(rng.below(3)), n = static_cast<int>(rng.below(3));
        const auto s = assemble_shift(f.t, f.hs, f.mu, m, n, random_source(static_cast<std::uint64_t>(i)));
        const Vec w = random_weight(rng, 64, 1.0);
        Vec phi(64), psi(64);
        for (auto& v : phi) v = rng.normal();
        for (auto& v : psi) v = rng.normal();
        const auto split = four_way_split(f.t, f.hs, f.mu, s, phi, psi, w, inverse(w));
        CHECK(split.exact_sum() >= std::abs(split.form) - 1e-10);
        CHECK(split.bounded_sum() >= split.exact_sum() - 1e-10);
        // the form is the weighted pairing (S(phi w), psi sigma)
        Eigen::VectorXd pw(64);
        for (std::size_t x = 0; x < 64; ++x) pw[static_cast<Eigen::Index>(x)] = phi[x] * w[x];
        const Eigen::VectorXd Spw = s.matrix * pw;
        double direct = 0.0;
        for (std::size_t x = 0; x < 64; ++x) direct += Spw[static_cast<Eigen::Index>(x)] * psi[x] / w[x] * f.mu.mass[x];
        CHECK(split.form == doctest::Approx(direct).epsilon(1e-10));
    }
}

TEST_CASE("paraproducts: zero symbol, adjointness and the constant identity") {
    Fixture f;
    const MetricSpace X = uniform_net(64);
    const ModelOperator op = build_model_operator(X, f.mu, "hilbert", linear_profile());
    Eigen::VectorXd ones = Eigen::VectorXd::Ones(64);
    const Eigen::VectorXd tchi = op.T * ones;
    Vec tchi_v(tchi.data(), tchi.data() + 64);
    Paraproduct pi{ParaKind::Pi, haar_coefficients(f.t, f.hs, f.mu, tchi_v), 0.0};
    Paraproduct zero{ParaKind::Pi, Vec(f.hs.size(), 0.0), 0.0};
    Rng rng(3);
    Vec g(64), h(64);
    for (auto& v : g) v = rng.normal();
    for (auto& v : h) v = rng.normal();
    for (double v : paraproduct_apply(f.t, f.hs, f.mu, zero, g)) CHECK(v == 0.0);
    // pi(chi_X) = T chi_X - <T chi_X>
    const Vec pc = paraproduct_apply(f.t, f.hs, f.mu, pi, Vec(64, 1.0));
    double mean = 0.0;
    for (std::size_t x = 0; x < 64; ++x) mean += tchi_v[x] * f.mu.mass[x];
    for (std::size_t x = 0; x < 64; ++x) CHECK(pc[x] == doctest::Approx(tchi_v[x] - mean).epsilon(1e-10));
    // (pi g, h) = (g, pi_* h) with the same symbol
    Paraproduct star = pi;
    star.kind = ParaKind::PiStar;
    const double lhs = pair(paraproduct_apply(f.t, f.hs, f.mu, pi, g), h, f.mu);
    const double rhs = pair(g, paraproduct_apply(f.t, f.hs, f.mu, star, h), f.mu);
    CHECK(std::abs(lhs - rhs) <= 1e-10 * (std::abs(lhs) + 1.0));
    // matrix form agrees with direct evaluation
    const Eigen::MatrixXd P = paraproduct_matrix(f.t, f.hs, f.mu, pi);
    const Vec direct = paraproduct_apply(f.t, f.hs, f.mu, pi, g);
    const Eigen::VectorXd viaM = P * Eigen::Map<const Eigen::VectorXd>(g.data(), 64);
    for (std::size_t x = 0; x < 64; ++x) CHECK(viaM[static_cast<Eigen::Index>(x)] == doctest::Approx(direct[x]));
}

TEST_CASE("A-infinity inequality holds for model symbols and power weights") {
    Fixture f;
    const MetricSpace X = uniform_net(64);
    const BallIndex bi(X);
    const ModelOperator op = build_model_operator(X, f.mu, "inv-dist", linear_profile());
    const Eigen::VectorXd tchi = op.T * Eigen::VectorXd::Ones(64);
    const Vec b = haar_coefficients(f.t, f.hs, f.mu, Vec(tchi.data(), tchi.data() + 64));
    const Vec a = per_cube_squares(f.t, f.hs, b);
    for (double beta : {0.0, 0.3, 0.7}) {
        const auto chk = ainfty_inequality_check(f.t, f.mu, bi, a, power_weight(X, beta, 0));
        CHECK(chk.worst_ratio <= 1.0 + 1e-12);
    }
}
