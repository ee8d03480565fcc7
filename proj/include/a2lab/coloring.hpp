#pragma once
#include <cstdint>
#include <vector>

#include "a2lab/common.hpp"
#include "a2lab/metric_space.hpp"

namespace a2lab {

// A coloring of a space with at most 32 points: bit i set = point i red.
using Coloring = std::uint32_t;

// Unit of separation for colorings. Spaces are normalized to diameter 1, so
// "distance 1" of the combinatorial lemma is passed in explicitly.
struct Census {
    const MetricSpace& Y;
    double unit = 1.0;
    std::size_t cap = 20;

    bool near(Index a, Index b) const { return Y(a, b) < unit; }
    Coloring near_mask(Index a) const;  // points other than a at distance < unit
    bool is_proper(Coloring red) const;
    // largest number of points in an open ball of radius unit
    std::size_t occupancy() const;

    // All proper colorings (maximal unit-separated red sets). TooLarge past cap.
    std::vector<Coloring> proper_colorings() const;
    double membership_fraction(Index v) const;
};

struct RecolorInstance {
    Index v = 0;
    Coloring ball = 0;     // B(v, unit) \ {v}
    Coloring S = 0;        // red part of the ball
    Coloring S_tilde = 0;  // outside B(v, unit), within unit of S
};

RecolorInstance make_instance(const Census& c, Index v, Coloring S);

// Steps 1-6: v red, S green, yellow points greedily recolored in index
// order. Throws NotInWS if the coloring is not proper or not in W_S.
Coloring recolor(const Census& c, const RecolorInstance& inst, Coloring coloring);

struct InjectivityRow {
    Coloring S = 0;
    std::size_t card_ws = 0;
    std::size_t card_image = 0;
};
struct InjectivityReport {
    Index v = 0;
    std::size_t occupancy = 0;
    std::size_t total = 0;   // proper colorings
    std::size_t card_b = 0;  // colorings with v red
    double fraction = 0.0;
    std::vector<InjectivityRow> rows;  // one per S with W_S nonempty
};

// Throws InjectivityFailure when two colorings of one W_S collide, and
// ViolationReport when an image is improper or leaves B.
InjectivityReport verify_injectivity(const Census& c, Index v);

// Fraction of maximal separated grids (pairwise > threshold) inside X that
// contain x, over the uniform distribution, together with the lower bound
// 2^{-d+1} where d is the largest closed threshold-ball population.
struct GridMembership {
    double fraction = 0.0;
    double bound = 0.0;
    std::size_t d = 0;
};
GridMembership grid_membership_fraction(const MetricSpace& X, double threshold, Index x);

}  // namespace a2lab
