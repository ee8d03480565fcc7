#include <doctest.h>

#include <cmath>
#include <set>

#include "a2lab/coloring.hpp"

using namespace a2lab;

namespace {

MetricSpace line(const std::vector<double>& xs) {
    std::vector<std::vector<double>> d(xs.size(), std::vector<double>(xs.size()));
    for (std::size_t i = 0; i < xs.size(); ++i)
        for (std::size_t j = 0; j < xs.size(); ++j) d[i][j] = std::abs(xs[i] - xs[j]);
    return MetricSpace::from_matrix(d);
}

// Proper: red points pairwise at distance >= unit, every green point within unit of a red one.
bool brute_proper(const MetricSpace& Y, double unit, Coloring red) {
    const std::size_t n = Y.size();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            if ((red >> i & 1u) && (red >> j & 1u) && Y(static_cast<Index>(i), static_cast<Index>(j)) < unit)
                return false;
    for (std::size_t i = 0; i < n; ++i) {
        if (red >> i & 1u) continue;
        bool covered = false;
        for (std::size_t j = 0; j < n; ++j)
            if ((red >> j & 1u) && Y(static_cast<Index>(i), static_cast<Index>(j)) < unit) covered = true;
        if (!covered) return false;
    }
    return true;
}

}  // namespace

TEST_CASE("one point has one coloring") {
    const MetricSpace Y = MetricSpace::from_matrix({{0.0}});
    Census c{Y, 1.0};
    const auto cols = c.proper_colorings();
    REQUIRE(cols.size() == 1);
    CHECK(cols[0] == 1u);
    CHECK(c.membership_fraction(0) == doctest::Approx(1.0));
    const auto rep = verify_injectivity(c, 0);
    CHECK(rep.fraction == doctest::Approx(1.0));
}

TEST_CASE("three-point line colorings and membership") {
    const MetricSpace Y = line({0.0, 0.9, 1.8});
    Census c{Y, 1.0 / 1.8};
    const auto cols = c.proper_colorings();
    std::set<Coloring> got(cols.begin(), cols.end());
    CHECK(got == std::set<Coloring>{0b101u, 0b010u});
    CHECK(c.membership_fraction(1) == doctest::Approx(0.5));
    CHECK(c.membership_fraction(0) == doctest::Approx(0.5));
}

TEST_CASE("enumeration agrees with a brute-force scan of all subsets") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const MetricSpace Y = seed % 2 ? random_plane_points(6, seed) : random_tree_metric(6, seed);
        for (double unit : {0.3, 0.5, 0.8}) {
            Census c{Y, unit};
            const auto cols = c.proper_colorings();
            std::set<Coloring> got(cols.begin(), cols.end());
            CHECK(got.size() == cols.size());
            for (Coloring m = 1; m < (1u << 6); ++m) {
                CHECK(brute_proper(Y, unit, m) == (got.count(m) == 1));
                CHECK(c.is_proper(m) == brute_proper(Y, unit, m));
            }
        }
    }
}

TEST_CASE("recolor hand trace on the three-point line") {
    const MetricSpace Y = line({0.0, 0.9, 1.8});
    Census c{Y, 1.0 / 1.8};
    // coloring {0, 1.8} red, v = 0.9; the ball around v holds both red points
    const auto inst = make_instance(c, 1, 0b101u);
    const Coloring out = recolor(c, inst, 0b101u);
    CHECK((out >> 1 & 1u) == 1u);
    CHECK(c.is_proper(out));
    CHECK(out == 0b010u);
}

TEST_CASE("recolor only touches the ball around v and the collar of S") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        const MetricSpace Y = random_plane_points(7, seed);
        Census c{Y, 0.4};
        for (Coloring col : c.proper_colorings())
            for (Index v = 0; v < 7; ++v) {
                if (col >> v & 1u) continue;
                const auto inst = make_instance(c, v, col & c.near_mask(v));
                // a green v in a proper coloring always sees a red point
                CHECK(inst.S != 0u);
                const Coloring out = recolor(c, inst, col);
                const Coloring touched = inst.ball | inst.S_tilde | (1u << v);
                CHECK((out & ~touched & 0x7fu) == (col & ~touched & 0x7fu));
            }
    }
}

TEST_CASE("recolor rejects colorings outside W_S") {
    const MetricSpace Y = line({0.0, 0.9, 1.8});
    Census c{Y, 1.0 / 1.8};
    const auto inst = make_instance(c, 1, 0b101u);
    CHECK_THROWS_AS(recolor(c, inst, 0b010u), NotInWS);
    CHECK_THROWS_AS(recolor(c, inst, 0b111u), NotInWS);
}

TEST_CASE("recolor is injective on each W_S and lands in B") {
    for (std::uint64_t seed = 1; seed <= 30; ++seed) {
        const MetricSpace Y = seed % 3 == 0 ? random_tree_metric(7, seed) : random_plane_points(7, seed);
        Census c{Y, 0.45};
        const auto cols = c.proper_colorings();
        for (Index v = 0; v < 7; ++v) {
            const Coloring ball = c.near_mask(v);
            std::set<Coloring> seen_s;
            for (Coloring col : cols) {
                if (col >> v & 1u) continue;
                const Coloring S = col & ball;
                if (!seen_s.insert(S).second) continue;
                const auto inst = make_instance(c, v, S);
                std::set<Coloring> images;
                std::size_t members = 0;
                for (Coloring other : cols) {
                    if ((other >> v & 1u) || (other & ball) != S) continue;
                    ++members;
                    const Coloring img = recolor(c, inst, other);
                    CHECK(c.is_proper(img));
                    CHECK((img >> v & 1u) == 1u);
                    images.insert(img);
                }
                CHECK(images.size() == members);
            }
            const auto rep = verify_injectivity(c, v);
            CHECK(rep.fraction >= std::ldexp(1.0, 1 - static_cast<int>(rep.occupancy)) - 1e-12);
            std::size_t sum_ws = 0;
            for (const auto& row : rep.rows) {
                CHECK(row.card_image == row.card_ws);
                sum_ws += row.card_ws;
            }
            // W_S cover the colorings with v green
            CHECK(sum_ws == rep.total - rep.card_b);
            CHECK(static_cast<double>(sum_ws) <= std::ldexp(1.0, static_cast<int>(rep.occupancy) - 1) * rep.card_b);
        }
    }
}

TEST_CASE("census cap is enforced") {
    const MetricSpace Y = uniform_net(25);
    Census c{Y, 0.1, 20};
    CHECK_THROWS_AS(c.proper_colorings(), TooLarge);
}

TEST_CASE("grid membership fraction meets the occupancy bound") {
    for (std::uint64_t seed = 1; seed <= 10; ++seed) {
        const MetricSpace X = random_line_points(7, seed);
        for (Index x = 0; x < 7; ++x) {
            const auto gm = grid_membership_fraction(X, 0.3, x);
            CHECK(gm.bound == doctest::Approx(std::ldexp(1.0, 1 - static_cast<int>(gm.d))));
            CHECK(gm.fraction >= gm.bound - 1e-12);
            CHECK(gm.fraction <= 1.0 + 1e-12);
        }
    }
}
