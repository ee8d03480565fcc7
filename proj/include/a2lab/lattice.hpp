#pragma once
#include <cstdint>
#include <vector>

#include "a2lab/common.hpp"
#include "a2lab/metric_space.hpp"
#include "a2lab/rng.hpp"

namespace a2lab {

struct HierarchyParams {
    double delta = 0.25;
    int levels = -1;                 // finest generation N; -1 picks auto_levels
    std::uint64_t seed = 0;
    std::size_t exact_cap = 1024;    // max grids enumerated for exact uniform choice
    std::size_t event_cap = 10000000;  // max elementary events in enumerate mode
    int max_auto_levels = 12;
};

// Smallest N with delta^N below the minimal separation, so G_N = X.
int auto_levels(const MetricSpace& X, double delta, int max_levels = 12);
int resolve_levels(const MetricSpace& X, const HierarchyParams& p);
void check_params(const HierarchyParams& p);

// One realization of the random nested grids.
struct LatticeSample {
    double delta = 0.25;
    int levels = 0;
    std::vector<std::vector<Index>> grids;       // grids[k], ascending point indices
    std::vector<std::vector<Index>> parent;      // parent[k][y] in G_{k-1} for y in G_k, else -1 (k >= 1)
    std::vector<std::vector<Index>> assignment;  // assignment[k][x] = label of the cube holding x
    double weight = 1.0;                         // probability of this sample (enumeration) or 0 if unknown
    bool approximate = false;                    // some level used greedy instead of exact uniform choice

    double side(int k) const;
};

// Maximal subsets of `candidates` with pairwise distances > threshold.
bool is_separated(const MetricSpace& X, const std::vector<Index>& set, double threshold);
bool is_maximal(const MetricSpace& X, const std::vector<Index>& set, const std::vector<Index>& candidates,
                double threshold);
std::vector<Index> greedy_grid(const MetricSpace& X, const std::vector<Index>& candidates, double threshold);
// All maximal separated subsets; throws EnumerationTooLarge past `cap`.
std::vector<std::vector<Index>> enumerate_maximal_grids(const MetricSpace& X, const std::vector<Index>& candidates,
                                                        double threshold, std::size_t cap);

struct GridChoice {
    std::vector<Index> grid;
    std::size_t count = 0;  // number of maximal grids, 0 when unknown
    bool approximate = false;
};
// Uniform choice among all maximal grids when there are at most `cap`,
// otherwise random-order greedy (flagged approximate).
GridChoice build_k_grid(const MetricSpace& X, const std::vector<Index>& candidates, double threshold, Rng& rng,
                        std::size_t cap);

// Admissible parents of each child (indexed like `children`): the unique
// parent within scale/4 if any, else all parents within 3*scale.
std::vector<std::vector<Index>> parent_options(const MetricSpace& X, const std::vector<Index>& children,
                                               const std::vector<Index>& parents, double scale);

LatticeSample build_hierarchy(const MetricSpace& X, const HierarchyParams& p, std::uint64_t trial = 0);
std::vector<LatticeSample> enumerate_hierarchies(const MetricSpace& X, const HierarchyParams& p);

// Fills sample.assignment from grids and parents.
void build_cubes(const MetricSpace& X, LatticeSample& s);

struct CoverReport {
    std::size_t generations = 0;
    double worst_proximity = 0.0;  // max |y_k x| / delta^k
    double worst_grid_cover = 0.0; // max_x min_{y in G_k} |xy| / delta^k
};
// Throws CoverGap / ProximityViolation.
CoverReport verify_cover(const MetricSpace& X, const LatticeSample& s);

struct GridLawReport {
    std::size_t separation_violations = 0;
    std::size_t maximality_violations = 0;
    std::size_t nesting_violations = 0;
    std::size_t parent_rule_violations = 0;
    std::size_t cover3_violations = 0;
    std::size_t chain_qualifying = 0;
    std::size_t chain_violations = 0;
    std::size_t total() const {
        return separation_violations + maximality_violations + nesting_violations + parent_rule_violations +
               cover3_violations + chain_violations;
    }
};
GridLawReport verify_grid_laws(const MetricSpace& X, const LatticeSample& s);

// dist(x, X \ cube of x at generation k), +inf when the cube is X.
std::vector<double> distance_to_outside(const MetricSpace& X, const std::vector<Index>& labels);

// Points within eps*side of both `members` and its complement.
std::vector<Index> boundary_layer(const MetricSpace& X, const std::vector<Index>& members, double side, double eps);

}  // namespace a2lab
