#pragma once
#include <vector>

#include "a2lab/common.hpp"
#include "a2lab/cube_tree.hpp"
#include "a2lab/metric_space.hpp"

namespace a2lab {

// sup over cubes Q of (sum of a_R over the subtree of Q) / mu(Q)
double carleson_constant(const CubeTree& t, const Vec& a);
// same, normalized by nu(Q) = int_Q v dmu instead of mu(Q)
double carleson_constant_weighted(const CubeTree& t, const Measure& mu, const Vec& a, const Vec& v);
// per-cube subtree sums
Vec subtree_sums(const CubeTree& t, const Vec& a);

struct EmbeddingReport {
    double B = 0.0;
    double lhs1 = 0.0, rhs1 = 0.0;  // sum inf_L F alpha_L  vs  2 B int F
    double rhs_unit = 0.0;          // B int F, the sharp layer-cake bound
    double lhs2 = 0.0, rhs2 = 0.0;  // sum inf_L F alpha_L / <sigma>_L  vs  C B int F / sigma
    double c2 = 0.0;                // C used in the second inequality
    bool ok1 = true, ok2 = true, ok_unit = true;
};

// Checks both embedding inequalities. The constant in the second one is the
// Carleson constant of <w>_L alpha_L with respect to w dmu divided by B,
// which makes the layer-cake argument apply verbatim.
EmbeddingReport carleson_embedding_check(const CubeTree& t, const Measure& mu, const Vec& alpha, const Vec& F,
                                         const Vec* sigma = nullptr);

}  // namespace a2lab
