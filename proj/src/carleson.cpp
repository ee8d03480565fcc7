#include "a2lab/carleson.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "a2lab/weights.hpp"

namespace a2lab {

Vec subtree_sums(const CubeTree& t, const Vec& a) {
    Vec s = a;
    // ids increase with generation, so children come after parents
    for (std::size_t c = t.size(); c-- > 1;) s[static_cast<std::size_t>(t[static_cast<int>(c)].parent)] += s[c];
    return s;
}

double carleson_constant(const CubeTree& t, const Vec& a) {
    Vec s = subtree_sums(t, a);
    double B = 0.0;
    for (std::size_t c = 0; c < t.size(); ++c) B = std::max(B, s[c] / t[static_cast<int>(c)].mass);
    return B;
}

double carleson_constant_weighted(const CubeTree& t, const Measure& mu, const Vec& a, const Vec& v) {
    Vec s = subtree_sums(t, a);
    double B = 0.0;
    for (std::size_t c = 0; c < t.size(); ++c) {
        double vm = 0.0;
        for (Index x : t[static_cast<int>(c)].members) vm += v[x] * mu.mass[x];
        B = std::max(B, s[c] / vm);
    }
    return B;
}

EmbeddingReport carleson_embedding_check(const CubeTree& t, const Measure& mu, const Vec& alpha, const Vec& F,
                                         const Vec* sigma) {
    EmbeddingReport r;
    r.B = carleson_constant(t, alpha);
    Vec inf(t.size(), std::numeric_limits<double>::infinity());
    for (std::size_t c = 0; c < t.size(); ++c)
        for (Index x : t[static_cast<int>(c)].members) inf[c] = std::min(inf[c], F[x]);
    double intF = 0.0;
    for (std::size_t x = 0; x < F.size(); ++x) intF += F[x] * mu.mass[x];
    for (std::size_t c = 0; c < t.size(); ++c) r.lhs1 += inf[c] * alpha[c];
    r.rhs1 = 2.0 * r.B * intF;
    r.rhs_unit = r.B * intF;
    const double tol = 1e-12 * std::max(1.0, r.rhs1);
    r.ok1 = r.lhs1 <= r.rhs1 + tol;
    r.ok_unit = r.lhs1 <= r.rhs_unit + tol;
    if (sigma) {
        Vec w(sigma->size());
        for (std::size_t x = 0; x < w.size(); ++x) w[x] = 1.0 / (*sigma)[x];
        Vec avg_s = cube_averages(t, mu, *sigma);
        Vec avg_w = cube_averages(t, mu, w);
        Vec beta(t.size());
        for (std::size_t c = 0; c < t.size(); ++c) {
            r.lhs2 += inf[c] * alpha[c] / avg_s[c];
            beta[c] = avg_w[c] * alpha[c];
        }
        const double Bw = carleson_constant_weighted(t, mu, beta, w);
        r.c2 = r.B > 0.0 ? Bw / r.B : 0.0;
        double intFw = 0.0;
        for (std::size_t x = 0; x < F.size(); ++x) intFw += F[x] * w[x] * mu.mass[x];
        r.rhs2 = r.c2 * r.B * intFw;
        r.ok2 = r.lhs2 <= r.rhs2 + 1e-12 * std::max(1.0, r.rhs2);
    }
    return r;
}

}  // namespace a2lab
