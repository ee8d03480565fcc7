#include "a2lab/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "a2lab/parallel.hpp"
#include "a2lab/paraproduct.hpp"

namespace a2lab {

KernelReport kernel_report(const MetricSpace& X, const Eigen::MatrixXd& K, const KernelProfile& profile) {
    KernelReport r;
    r.eps = profile.holder_eps;
    const auto n = static_cast<Index>(X.size());
    std::vector<KernelReport> part(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), [&](std::size_t xi) {
        const auto x = static_cast<Index>(xi);
        KernelReport p;
        for (Index y = 0; y < n; ++y) {
            if (y == x) continue;
            const double d = X(x, y);
            const double lx = profile.lambda(x, d), ly = profile.lambda(y, d);
            p.size = std::max(p.size, std::abs(K(x, y)) * std::max(lx, ly));
            for (Index z = 0; z < n; ++z) {
                // z plays x' (first variable) and y' (second variable)
                if (z == x || z == y) continue;
                const double dz = X(x, z);
                if (d >= 2.0 * dz) {
                    const double scale = std::pow(d, r.eps) * lx / std::pow(dz, r.eps);
                    p.holder_x = std::max(p.holder_x, std::abs(K(x, y) - K(z, y)) * scale);
                    ++p.triples;
                }
                const double dy = X(y, z);
                if (d >= 2.0 * dy) {
                    const double scale = std::pow(d, r.eps) * lx / std::pow(dy, r.eps);
                    p.holder_y = std::max(p.holder_y, std::abs(K(x, y) - K(x, z)) * scale);
                }
            }
        }
        part[xi] = p;
    });
    for (const auto& p : part) {
        r.size = std::max(r.size, p.size);
        r.holder_x = std::max(r.holder_x, p.holder_x);
        r.holder_y = std::max(r.holder_y, p.holder_y);
        r.triples += p.triples;
    }
    return r;
}

ModelOperator build_model_operator(const MetricSpace& X, const Measure& mu, const std::string& kernel,
                                   const KernelProfile& profile, double limit) {
    validate_measure(mu, X.size());
    const auto n = static_cast<Eigen::Index>(X.size());
    ModelOperator op;
    op.kernel = kernel;
    op.K = Eigen::MatrixXd::Zero(n, n);
    if (kernel == "inv-dist") {
        for (Eigen::Index x = 0; x < n; ++x)
            for (Eigen::Index y = 0; y < n; ++y)
                if (x != y) op.K(x, y) = 1.0 / X(static_cast<Index>(x), static_cast<Index>(y));
    } else if (kernel == "hilbert") {
        const auto& c = X.coords();
        if (c.empty() || c[0].size() != 1) throw ConfigError("kernel 'hilbert' needs a one-dimensional point set");
        for (Eigen::Index x = 0; x < n; ++x)
            for (Eigen::Index y = 0; y < n; ++y)
                if (x != y) op.K(x, y) = 1.0 / (c[static_cast<std::size_t>(x)][0] - c[static_cast<std::size_t>(y)][0]);
    } else if (kernel != "zero") {
        throw ConfigError("unknown kernel '" + kernel + "'");
    }
    op.T = op.K;
    for (Eigen::Index y = 0; y < n; ++y) op.T.col(y) *= mu.mass[static_cast<std::size_t>(y)];
    op.report = kernel_report(X, op.K, profile);
    const double worst = std::max({op.report.size, op.report.holder_x, op.report.holder_y});
    if (worst > limit)
        throw ProfileViolation("kernel '" + kernel + "' constant " + std::to_string(worst) + " exceeds " +
                               std::to_string(limit) + " for profile " + profile.name);
    return op;
}

Eigen::MatrixXd adjoint(const Eigen::MatrixXd& T, const Measure& mu) {
    const auto n = T.rows();
    Eigen::VectorXd d(n);
    for (Eigen::Index x = 0; x < n; ++x) d[x] = mu.mass[static_cast<std::size_t>(x)];
    return d.cwiseInverse().asDiagonal() * T.transpose() * d.asDiagonal();
}

Eigen::MatrixXd haar_coefficient_matrix(const CubeTree& t, const HaarSystem& hs, const Measure& mu,
                                        const Eigen::MatrixXd& A) {
    const Eigen::MatrixXd H = hs.matrix(t);
    Eigen::VectorXd d(static_cast<Eigen::Index>(t.points()));
    for (std::size_t x = 0; x < t.points(); ++x) d[static_cast<Eigen::Index>(x)] = mu.mass[x];
    return H.transpose() * d.asDiagonal() * A * H;
}

Subtracted subtract_paraproducts(const CubeTree& t, const HaarSystem& hs, const Measure& mu, const Eigen::MatrixXd& T) {
    Subtracted s;
    const auto n = static_cast<Eigen::Index>(t.points());
    const Eigen::VectorXd one = Eigen::VectorXd::Ones(n);
    const Eigen::MatrixXd Ts = adjoint(T, mu);
    const Eigen::VectorXd tc = T * one, tsc = Ts * one;
    s.b = haar_coefficients(t, hs, mu, Vec(tc.data(), tc.data() + n));
    s.b_star = haar_coefficients(t, hs, mu, Vec(tsc.data(), tsc.data() + n));
    const Eigen::MatrixXd P = paraproduct_matrix(t, hs, mu, {ParaKind::Pi, s.b, 0.0});
    const Eigen::MatrixXd Ps = paraproduct_matrix(t, hs, mu, {ParaKind::PiStar, s.b_star, 0.0});
    s.Ttilde = T - P - Ps;
    const Eigen::MatrixXd C = haar_coefficient_matrix(t, hs, mu, T);
    const Eigen::MatrixXd Ct = haar_coefficient_matrix(t, hs, mu, s.Ttilde);
    for (std::size_t q = 0; q < hs.size(); ++q)
        for (std::size_t r = 0; r < hs.size(); ++r) {
            const int cq = hs[q].cube, cr = hs[r].cube;
            if (t.contains(cq, cr) || t.contains(cr, cq)) continue;
            const auto i = static_cast<Eigen::Index>(r), j = static_cast<Eigen::Index>(q);
            s.disjoint_residual = std::max(s.disjoint_residual, std::abs(Ct(i, j) - C(i, j)));
        }
    const Eigen::VectorXd ttc = s.Ttilde * one;
    const Vec coef = haar_coefficients(t, hs, mu, Vec(ttc.data(), ttc.data() + n));
    for (double c : coef) s.tchi_residual = std::max(s.tchi_residual, std::abs(c));
    return s;
}

const char* bucket_name(Bucket b) {
    switch (b) {
        case Bucket::NestedFar: return "nested-far";
        case Bucket::NestedNear: return "nested-near";
        case Bucket::Disjoint: return "disjoint";
    }
    return "?";
}

PairGeometry::PairGeometry(const MetricSpace& X, const CubeTree& t) : t_(t), n_(t.size()), d_(n_ * n_, 0.0) {
    const std::size_t np = X.size();
    // point-to-cube distances, then cube-to-cube as a min over members
    std::vector<double> pd(n_ * np, std::numeric_limits<double>::infinity());
    parallel_for(n_, [&](std::size_t b) {
        for (Index y : t[static_cast<int>(b)].members) {
            const double* row = X.row(y);
            for (std::size_t x = 0; x < np; ++x) pd[b * np + x] = std::min(pd[b * np + x], row[x]);
        }
    });
    parallel_for(n_, [&](std::size_t a) {
        for (std::size_t b = 0; b < n_; ++b) {
            double m = std::numeric_limits<double>::infinity();
            for (Index x : t[static_cast<int>(a)].members) m = std::min(m, pd[b * np + static_cast<std::size_t>(x)]);
            d_[a * n_ + b] = m;
        }
    });
}

double PairGeometry::side(int q) const { return t_.side(t_[q].generation); }
double PairGeometry::dist(int a, int b) const { return d_[static_cast<std::size_t>(a) * n_ + static_cast<std::size_t>(b)]; }

Bucket PairGeometry::classify(int q, int r, int r0) const {
    if (t_.contains(q, r)) return t_[r].generation - t_[q].generation >= r0 ? Bucket::NestedFar : Bucket::NestedNear;
    return Bucket::Disjoint;
}

BucketCount count_buckets(const CubeTree& t, const PairGeometry& geo, int r0) {
    BucketCount c;
    for (std::size_t q = 0; q < t.size(); ++q)
        for (std::size_t r = 0; r < t.size(); ++r) {
            const int Q = static_cast<int>(q), R = static_cast<int>(r);
            if (t[Q].generation > t[R].generation) continue;
            ++c.total;
            switch (geo.classify(Q, R, r0)) {
                case Bucket::NestedFar: ++c.far; break;
                case Bucket::NestedNear:
                    ++c.near;
                    c.max_near_gap = std::max<std::size_t>(c.max_near_gap, static_cast<std::size_t>(t[R].generation - t[Q].generation));
                    break;
                case Bucket::Disjoint: ++c.disjoint; break;
            }
        }
    return c;
}

namespace {

double max_coefficient(const HaarSystem& hs, const Eigen::MatrixXd& C, int Q, int R) {
    double m = 0.0;
    for (int hq : hs.of_cube(Q))
        for (int hr : hs.of_cube(R)) m = std::max(m, std::abs(C(hr, hq)));
    return m;
}

void finish_table(DecayReport& rep, std::map<int, DecayRow>& rows) {
    double prev = std::numeric_limits<double>::infinity();
    for (auto& [k, row] : rows) {
        row.key = k;
        rep.table.push_back(row);
        if (row.max_ratio > prev * (1.0 + 1e-9)) rep.monotone = false;
        prev = row.max_ratio;
    }
}

int distance_bin(double D, double side, double delta) {
    // delta^{-s} side <= D < delta^{-s-1} side
    const double v = std::log(D / side) / std::log(1.0 / delta);
    return std::max(0, static_cast<int>(std::floor(v + 1e-12)));
}

}  // namespace

DecayReport decay_check_in(const CubeTree& t, const HaarSystem& hs, const PairGeometry& geo, const Eigen::MatrixXd& C,
                           const std::vector<char>& good, int r0, double eps) {
    DecayReport rep;
    std::map<int, DecayRow> rows;
    for (std::size_t r = 0; r < t.size(); ++r) {
        const int R = static_cast<int>(r);
        if (!good[r] || hs.of_cube(R).empty()) continue;
        const int gr = t[R].generation;
        for (int gap = std::max(r0, 1); gap <= gr; ++gap) {
            const int Q = t.ancestor(R, gap);
            if (hs.of_cube(Q).empty()) continue;
            const int Q1 = t.ancestor(R, gap - 1);
            const double bound = std::pow(geo.side(R) / geo.side(Q), eps / 2) * std::sqrt(t[R].mass / t[Q1].mass);
            const double ratio = max_coefficient(hs, C, Q, R) / bound;
            rep.comparability = std::max(rep.comparability, t[Q].mass / t[Q1].mass);
            auto& row = rows[gap];
            ++row.pairs;
            row.max_ratio = std::max(row.max_ratio, ratio);
            rep.worst = std::max(rep.worst, ratio);
            ++rep.pairs;
        }
    }
    finish_table(rep, rows);
    return rep;
}

DecayReport decay_check_out(const CubeTree& t, const HaarSystem& hs, const PairGeometry& geo, const Eigen::MatrixXd& C,
                            const std::vector<char>& good, const KernelProfile& profile, double eps) {
    DecayReport rep;
    std::map<int, DecayRow> rows;
    for (std::size_t q = 0; q < t.size(); ++q) {
        const int Q = static_cast<int>(q);
        if (hs.of_cube(Q).empty()) continue;
        for (std::size_t r = 0; r < t.size(); ++r) {
            const int R = static_cast<int>(r);
            if (!good[r] || t[R].generation < t[Q].generation || hs.of_cube(R).empty() || t.contains(Q, R))
                continue;
            const double D = geo.D(Q, R);
            double lam = 0.0;
            for (Index z : t[R].members) lam = std::max(lam, profile.lambda(z, D));
            const double bound = std::pow(geo.side(Q) * geo.side(R), eps / 2) / (std::pow(D, eps) * lam) *
                                 std::sqrt(t[Q].mass) * std::sqrt(t[R].mass);
            const double ratio = max_coefficient(hs, C, Q, R) / bound;
            auto& row = rows[distance_bin(D, geo.side(Q), t.delta())];
            ++row.pairs;
            row.max_ratio = std::max(row.max_ratio, ratio);
            rep.worst = std::max(rep.worst, ratio);
            ++rep.pairs;
        }
    }
    finish_table(rep, rows);
    return rep;
}

IdentityResult averaging_identity_check(const EnumeratedGoodness& eg, const Measure& mu, const Eigen::MatrixXd& T,
                                        const Vec& f, const Vec& g, double a) {
    IdentityResult res;
    res.a = a;
    res.events = eg.lattices.size();
    const auto rg = really_good_adjust(eg, a);
    for (std::size_t i = 0; i < eg.lattices.size(); ++i) {
        const CubeTree& t = eg.trees[i];
        const double P = eg.lattices[i].weight;
        const HaarSystem hs = HaarSystem::build(t, mu);
        const Vec cf = haar_coefficients(t, hs, mu, f), cg = haar_coefficients(t, hs, mu, g);
        const Eigen::MatrixXd C = haar_coefficient_matrix(t, hs, mu, T);
        double ge = 0.0, gt = 0.0, rge = 0.0, rgt = 0.0;
        for (std::size_t q = 0; q < hs.size(); ++q)
            for (std::size_t r = 0; r < hs.size(); ++r) {
                const int gq = t[hs[q].cube].generation, gr = t[hs[r].cube].generation;
                if (gq > gr) continue;
                const double term = C(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(q)) * cf[q] * cg[r];
                const double really = rg[i][static_cast<std::size_t>(hs[r].cube)];
                ge += term;
                rge += really * term;
                if (gq < gr) {
                    gt += term;
                    rgt += really * term;
                }
            }
        res.lhs_ge += P * a * ge;
        res.rhs_ge += P * rge;
        res.lhs_gt += P * a * gt;
        res.rhs_gt += P * rgt;
    }
    res.residual_ge = std::abs(res.lhs_ge - res.rhs_ge);
    res.residual_gt = std::abs(res.lhs_gt - res.rhs_gt);
    return res;
}

IdentityResult averaging_identity_check(const MetricSpace& X, const Measure& mu, const HierarchyParams& hp,
                                        const GoodnessParams& gp, const Eigen::MatrixXd& T, const Vec& f,
                                        const Vec& g, double a) {
    EnumeratedGoodness eg;
    try {
        eg = enumerate_goodness(X, mu, hp, gp);
    } catch (const EnumerationTooLarge& e) {
        throw EnumerationInfeasible(e.what());
    }
    for (const auto& s : eg.lattices)
        if (s.approximate) throw EnumerationInfeasible("grid choice fell back to the greedy approximation");
    return averaging_identity_check(eg, mu, T, f, g, a > 0.0 ? a : eg.min_p);
}

double containment_fraction(const CubeTree& t, const PairGeometry& geo, int s0, int offset, bool* any) {
    std::size_t pairs = 0, inside = 0;
    for (std::size_t q = 0; q < t.size(); ++q)
        for (std::size_t r = 0; r < t.size(); ++r) {
            const int Q = static_cast<int>(q), R = static_cast<int>(r);
            if (t[R].generation < t[Q].generation || t.contains(Q, R)) continue;
            const int s = distance_bin(geo.D(Q, R), geo.side(Q), t.delta());
            const int A = t.ancestor(Q, s + s0 + offset);
            ++pairs;
            if (t.contains(A, R)) ++inside;
        }
    if (any) *any = pairs > 0;
    return pairs ? static_cast<double>(inside) / static_cast<double>(pairs) : 0.0;
}

ContainmentResult containment_probability_check(const MetricSpace& X, const HierarchyParams& hp,
                                                const std::vector<int>& s0_values, int offset, std::size_t trials,
                                                bool exact) {
    const Measure mu = Measure::uniform(X.size());
    const std::size_t ns = s0_values.size();
    std::vector<Vec> frac(trials, Vec(ns, 0.0));
    std::vector<char> has(trials, 0);
    parallel_for(trials, [&](std::size_t tr) {
        const LatticeSample s = build_hierarchy(X, hp, tr);
        const CubeTree t = CubeTree::from_sample(s, mu);
        const PairGeometry geo(X, t);
        for (std::size_t i = 0; i < ns; ++i) {
            bool any = false;
            frac[tr][i] = containment_fraction(t, geo, s0_values[i], offset, &any);
            has[tr] = any;
        }
    });
    ContainmentResult res;
    for (std::size_t i = 0; i < ns; ++i) {
        ContainmentRow row;
        row.s0 = s0_values[i];
        double sum = 0.0, sq = 0.0;
        for (std::size_t tr = 0; tr < trials; ++tr)
            if (has[tr]) {
                sum += frac[tr][i];
                sq += frac[tr][i] * frac[tr][i];
                ++row.samples;
            }
        if (row.samples > 0) {
            const double k = static_cast<double>(row.samples);
            row.freq = sum / k;
            const double var = std::max(0.0, sq / k - row.freq * row.freq);
            row.stderr_ = row.samples > 1 ? std::sqrt(var / (k - 1.0)) : 0.0;
        }
        res.rows.push_back(row);
    }
    if (exact) {
        std::vector<LatticeSample> all;
        try {
            all = enumerate_hierarchies(X, hp);
        } catch (const EnumerationTooLarge& e) {
            throw EnumerationInfeasible(e.what());
        }
        Vec num(ns, 0.0);
        double den = 0.0;
        for (const auto& s : all) {
            const CubeTree t = CubeTree::from_sample(s, mu);
            const PairGeometry geo(X, t);
            bool any = false;
            Vec f(ns);
            for (std::size_t i = 0; i < ns; ++i) f[i] = containment_fraction(t, geo, s0_values[i], offset, &any);
            if (!any) continue;
            den += s.weight;
            for (std::size_t i = 0; i < ns; ++i) num[i] += s.weight * f[i];
        }
        for (std::size_t i = 0; i < ns; ++i) res.rows[i].exact = den > 0.0 ? num[i] / den : 0.0;
    }
    // threshold: start of the final run of passing s0 values
    for (std::size_t i = ns; i-- > 0;) {
        const auto& row = res.rows[i];
        if (row.freq < 0.5 - 3.0 * row.stderr_) break;
        res.threshold = row.s0;
    }
    return res;
}

ExtractionReport extract_shifts(const CubeTree& t, const HaarSystem& hs, const Measure& mu, const PairGeometry& geo,
                                const Eigen::MatrixXd& C, const std::vector<char>& good, const KernelProfile& profile,
                                const Vec& f, const Vec& g, int r0, int s0, int offset, double eps,
                                const DecayReport& in_report, const DecayReport& out_report) {
    ExtractionReport rep;
    rep.c_in = in_report.worst;
    rep.c_out = out_report.worst;
    rep.comparability = in_report.comparability;
    const Vec cf = haar_coefficients(t, hs, mu, f), cg = haar_coefficients(t, hs, mu, g);
    const double delta = t.delta();
    auto sgn = [](double v) { return v >= 0.0 ? 1.0 : -1.0; };

    std::map<int, ExtractedFamily> in;
    for (std::size_t r = 0; r < t.size(); ++r) {
        const int R = static_cast<int>(r);
        if (!good[r] || hs.of_cube(R).empty()) continue;
        for (int gap = std::max(r0, 1); gap <= t[R].generation; ++gap) {
            const int Q = t.ancestor(R, gap);
            const double bound = std::sqrt(t[R].mass / t[Q].mass);
            const double scale = rep.c_in * std::sqrt(rep.comparability) * std::pow(delta, gap * eps / 2);
            auto& fam = in[gap];
            fam.key = fam.t = gap;
            fam.shift.m = 0;
            fam.shift.n = gap;
            for (int hq : hs.of_cube(Q))
                for (int hr : hs.of_cube(R)) {
                    const auto iq = static_cast<std::size_t>(hq), ir = static_cast<std::size_t>(hr);
                    const double v = C(hr, hq);
                    const double prod = cf[iq] * cg[ir];
                    fam.shift.terms.push_back({Q, hq, hr, sgn(prod) * bound, bound});
                    fam.form += bound * std::abs(prod);
                    rep.sigma_in += v * prod;
                    rep.bound_in += scale * bound * std::abs(prod);
                    if (scale > 0.0) rep.worst_normalized = std::max(rep.worst_normalized, std::abs(v) / scale / bound);
                    else if (v != 0.0) rep.worst_normalized = std::numeric_limits<double>::infinity();
                }
        }
    }
    for (auto& [k, fam] : in) rep.in.push_back(std::move(fam));

    struct OutPair {
        int Q, R, A, tg, s;
        double lam;
    };
    std::vector<OutPair> pairs;
    for (std::size_t q = 0; q < t.size(); ++q) {
        const int Q = static_cast<int>(q);
        if (hs.of_cube(Q).empty()) continue;
        for (std::size_t r = 0; r < t.size(); ++r) {
            const int R = static_cast<int>(r);
            if (!good[r] || t[R].generation < t[Q].generation || hs.of_cube(R).empty() || t.contains(Q, R)) continue;
            const double D = geo.D(Q, R);
            const int s = distance_bin(D, geo.side(Q), delta);
            const int A = t.ancestor(Q, s + s0 + offset);
            ++rep.out_pairs;
            if (!t.contains(A, R)) continue;
            ++rep.out_contained;
            double lam = 0.0;
            for (Index z : t[R].members) lam = std::max(lam, profile.lambda(z, D));
            rep.c_lambda = std::max(rep.c_lambda, t[A].mass / lam);
            pairs.push_back({Q, R, A, t[R].generation - t[Q].generation, s, lam});
        }
    }
    std::map<std::pair<int, int>, ExtractedFamily> out;
    for (const auto& p : pairs) {
        const double bound = std::sqrt(t[p.Q].mass) * std::sqrt(t[p.R].mass) / t[p.A].mass;
        const double scale = rep.c_out * rep.c_lambda * std::pow(delta, p.tg * eps / 2) * std::pow(delta, p.s * eps);
        auto& fam = out[{p.tg, p.s}];
        fam.t = p.tg;
        fam.s = p.s;
        fam.key = p.tg * 1000 + p.s;
        fam.shift.m = std::max(fam.shift.m, t[p.Q].generation - t[p.A].generation);
        fam.shift.n = std::max(fam.shift.n, t[p.R].generation - t[p.A].generation);
        for (int hq : hs.of_cube(p.Q))
            for (int hr : hs.of_cube(p.R)) {
                const auto iq = static_cast<std::size_t>(hq), ir = static_cast<std::size_t>(hr);
                const double v = C(hr, hq);
                const double prod = cf[iq] * cg[ir];
                fam.shift.terms.push_back({p.A, hq, hr, sgn(prod) * bound, bound});
                fam.form += bound * std::abs(prod);
                rep.sigma_out += v * prod;
                rep.bound_out += scale * bound * std::abs(prod);
                if (scale > 0.0) rep.worst_normalized = std::max(rep.worst_normalized, std::abs(v) / scale / bound);
                else if (v != 0.0) rep.worst_normalized = std::numeric_limits<double>::infinity();
            }
    }
    for (auto& [k, fam] : out) rep.out.push_back(std::move(fam));
    if (rep.worst_normalized > 1.0 + 1e-9)
        throw CoefficientOverflow("normalized shift coefficient " + std::to_string(rep.worst_normalized) +
                                  " exceeds the admissible bound");
    return rep;
}

CoefficientFn kernel_source(const CubeTree& t, const HaarSystem& hs, const Eigen::MatrixXd& C, int m, int n) {
    double worst = 0.0;
    for (int g = 0; g + std::max(m, n) < t.levels(); ++g)
        for (int L : t.generation(g))
            for (int I : t.descendants_at(L, g + m))
                for (int J : t.descendants_at(L, g + n)) {
                    const double bound = std::sqrt(t[I].mass) * std::sqrt(t[J].mass) / t[L].mass;
                    for (int hi : hs.of_cube(I))
                        for (int hj : hs.of_cube(J)) worst = std::max(worst, std::abs(C(hj, hi)) / bound);
                }
    const double scale = worst > 0.0 ? 1.0 / worst : 0.0;
    return [C, scale](int, int hi, int hj, double) { return scale * C(hj, hi); };
}

}  // namespace a2lab
