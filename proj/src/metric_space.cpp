#include "a2lab/metric_space.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "a2lab/rng.hpp"

namespace a2lab {

const char* version() { return A2LAB_VERSION; }

namespace {

std::string triple(std::size_t i, std::size_t j, std::size_t k) {
    std::ostringstream os;
    os << "(" << i << "," << j << "," << k << ")";
    return os.str();
}

}  // namespace

ValidationReport validate_space(const std::vector<std::vector<double>>& d) {
    const std::size_t n = d.size();
    if (n == 0) throw InvalidSpace("empty space");
    for (std::size_t i = 0; i < n; ++i)
        if (d[i].size() != n) throw InvalidSpace("distance matrix is not square");
    ValidationReport rep;
    rep.points = n;
    for (std::size_t i = 0; i < n; ++i) {
        if (d[i][i] != 0.0) throw InvalidSpace("nonzero diagonal at " + std::to_string(i));
        for (std::size_t j = 0; j < n; ++j) {
            if (!std::isfinite(d[i][j])) throw InvalidSpace("non-finite distance");
            if (d[i][j] != d[j][i])
                throw NonSymmetric("dist(" + std::to_string(i) + "," + std::to_string(j) + ") != dist(" +
                                   std::to_string(j) + "," + std::to_string(i) + ")");
            if (i != j && !(d[i][j] > 0.0))
                throw InvalidSpace("distinct points " + std::to_string(i) + "," + std::to_string(j) +
                                   " at distance 0");
            rep.raw_diameter = std::max(rep.raw_diameter, d[i][j]);
        }
    }
    // relative slack for roundoff in inputs computed from coordinates
    const double tol = 1e-12 * rep.raw_diameter;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t k = 0; k < n; ++k)
                if (d[i][k] > d[i][j] + d[j][k] + tol)
                    throw TriangleViolation("triangle inequality fails for " + triple(i, j, k));
    if (n > 1) {
        rep.scale = 1.0 / rep.raw_diameter;
        rep.rescaled = rep.raw_diameter != 1.0;
        double ms = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) ms = std::min(ms, d[i][j] * rep.scale);
        rep.min_separation = ms;
    }
    return rep;
}

MetricSpace MetricSpace::build(std::size_t n, std::vector<double> d, bool normalize) {
    MetricSpace s;
    s.n_ = n;
    s.d_ = std::move(d);
    double diam = 0.0, ms = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            diam = std::max(diam, s.d_[i * n + j]);
            ms = std::min(ms, s.d_[i * n + j]);
        }
    s.report_.points = n;
    s.report_.raw_diameter = diam;
    if (normalize && n > 1) {
        s.report_.scale = 1.0 / diam;
        s.report_.rescaled = diam != 1.0;
        if (s.report_.rescaled)
            for (double& v : s.d_) v *= s.report_.scale;
        ms *= s.report_.scale;
    }
    s.report_.min_separation = n > 1 ? ms : 0.0;
    return s;
}

MetricSpace MetricSpace::from_matrix(const std::vector<std::vector<double>>& d) {
    ValidationReport rep = validate_space(d);
    const std::size_t n = d.size();
    std::vector<double> flat(n * n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) flat[i * n + j] = d[i][j];
    MetricSpace s = build(n, std::move(flat), true);
    s.report_ = rep;
    return s;
}

MetricSpace MetricSpace::from_coords(const std::vector<std::vector<double>>& coords) {
    const std::size_t n = coords.size();
    if (n == 0) throw InvalidSpace("empty space");
    const std::size_t dim = coords[0].size();
    for (const auto& c : coords)
        if (c.size() != dim) throw InvalidSpace("coordinates of mixed dimension");
    std::vector<double> flat(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            double s = 0.0;
            for (std::size_t k = 0; k < dim; ++k) {
                double t = coords[i][k] - coords[j][k];
                s += t * t;
            }
            double v = std::sqrt(s);
            if (!(v > 0.0))
                throw InvalidSpace("coincident points " + std::to_string(i) + "," + std::to_string(j));
            flat[i * n + j] = flat[j * n + i] = v;
        }
    // euclidean distances satisfy the triangle inequality; skip the cubic scan
    MetricSpace s = build(n, std::move(flat), true);
    s.coords_ = coords;
    for (auto& c : s.coords_)
        for (double& v : c) v *= s.report_.scale;
    return s;
}

std::vector<std::vector<double>> MetricSpace::matrix() const {
    std::vector<std::vector<double>> m(n_, std::vector<double>(n_));
    for (std::size_t i = 0; i < n_; ++i)
        for (std::size_t j = 0; j < n_; ++j) m[i][j] = d_[i * n_ + j];
    return m;
}

MetricSpace MetricSpace::scaled_raw(double c) const {
    std::vector<double> d = d_;
    for (double& v : d) v *= c;
    MetricSpace s = build(n_, std::move(d), false);
    return s;
}

Measure Measure::uniform(std::size_t n) { return Measure{Vec(n, 1.0 / static_cast<double>(n))}; }

double Measure::total() const {
    double t = 0.0;
    for (double m : mass) t += m;
    return t;
}

double Measure::of(const std::vector<Index>& set) const {
    double t = 0.0;
    for (Index i : set) t += mass[i];
    return t;
}

void validate_measure(const Measure& mu, std::size_t n) {
    if (mu.mass.size() != n) throw InvalidSpace("measure size does not match space");
    for (double m : mu.mass)
        if (!(m > 0.0) || !std::isfinite(m)) throw InvalidSpace("point masses must be positive");
}

std::vector<Index> ball(const MetricSpace& X, Index center, double r) {
    std::vector<Index> out;
    const double* row = X.row(center);
    for (std::size_t y = 0; y < X.size(); ++y)
        if (row[y] < r) out.push_back(static_cast<Index>(y));
    return out;
}

BallIndex::BallIndex(const MetricSpace& X) : n_(X.size()), order_(n_), cuts_(n_) {
    for (std::size_t x = 0; x < n_; ++x) {
        auto& ord = order_[x];
        ord.resize(n_);
        for (std::size_t y = 0; y < n_; ++y) ord[y] = static_cast<Index>(y);
        const double* row = X.row(static_cast<Index>(x));
        std::stable_sort(ord.begin(), ord.end(), [&](Index a, Index b) { return row[a] < row[b]; });
        for (std::size_t i = 1; i <= n_; ++i)
            if (i == n_ || row[ord[i]] != row[ord[i - 1]]) cuts_[x].push_back(static_cast<Index>(i));
    }
}

std::size_t doubling_constant_estimate(const MetricSpace& X) {
    const std::size_t n = X.size();
    BallIndex bi(X);
    std::size_t best = n > 0 ? 1 : 0;
    std::vector<Index> chosen;
    for (std::size_t x = 0; x < n; ++x) {
        const auto& ord = bi.order(static_cast<Index>(x));
        const double* row = X.row(static_cast<Index>(x));
        for (Index cut : bi.cuts(static_cast<Index>(x))) {
            // closed ball of radius r = largest distance in the prefix
            const double r = row[ord[cut - 1]];
            chosen.clear();
            for (Index i = 0; i < cut; ++i) {
                Index y = ord[i];
                bool ok = true;
                for (Index z : chosen)
                    if (!(X(y, z) > r / 2)) {
                        ok = false;
                        break;
                    }
                if (ok) chosen.push_back(y);
            }
            best = std::max(best, chosen.size());
        }
    }
    return best;
}

namespace {

// sorted distances and prefix masses around every center
struct RadialMass {
    std::vector<std::vector<double>> dist;
    std::vector<std::vector<double>> cum;  // cum[x][i] = mass of first i points

    RadialMass(const MetricSpace& X, const Measure& mu) {
        BallIndex bi(X);
        const std::size_t n = X.size();
        dist.resize(n);
        cum.resize(n);
        for (std::size_t x = 0; x < n; ++x) {
            const auto& ord = bi.order(static_cast<Index>(x));
            cum[x].assign(n + 1, 0.0);
            dist[x].resize(n);
            for (std::size_t i = 0; i < n; ++i) {
                dist[x][i] = X(static_cast<Index>(x), ord[i]);
                cum[x][i + 1] = cum[x][i] + mu.mass[ord[i]];
            }
        }
    }

    // mu(B(x, r)) for the open ball
    double ball_mass(Index x, double r) const {
        const auto& d = dist[x];
        std::size_t k = static_cast<std::size_t>(std::lower_bound(d.begin(), d.end(), r) - d.begin());
        return cum[x][k];
    }
};

}  // namespace

double measure_doubling_estimate(const MetricSpace& X, const Measure& mu) {
    RadialMass rm(X, mu);
    double best = 1.0;
    for (std::size_t x = 0; x < X.size(); ++x)
        for (std::size_t i = 1; i < X.size(); ++i) {
            double r = rm.dist[x][i];
            double small = rm.ball_mass(static_cast<Index>(x), r);
            double big = rm.ball_mass(static_cast<Index>(x), 2 * r);
            best = std::max(best, big / small);
        }
    return best;
}

KernelProfile linear_profile() {
    KernelProfile p;
    p.name = "linear";
    p.lambda = [](Index, double r) { return r; };
    p.doubling_const = 2.0;
    p.holder_eps = 1.0;
    return p;
}

KernelProfile measure_profile(const MetricSpace& X, const Measure& mu) {
    auto rm = std::make_shared<RadialMass>(X, mu);
    KernelProfile p;
    p.name = "measure";
    p.lambda = [rm](Index x, double r) { return rm->ball_mass(x, r); };
    p.doubling_const = measure_doubling_estimate(X, mu);
    p.holder_eps = 1.0;
    return p;
}

ProfileReport check_kernel_profile(const MetricSpace& X, const Measure& mu, const KernelProfile& p) {
    RadialMass rm(X, mu);
    ProfileReport rep;
    rep.doubling = 1.0;
    for (std::size_t x = 0; x < X.size(); ++x) {
        double prev = 0.0;
        for (std::size_t i = 1; i < X.size(); ++i) {
            double r = rm.dist[x][i];
            double l = p.lambda(static_cast<Index>(x), r);
            if (l < prev) rep.increasing = false;
            prev = l;
            rep.doubling = std::max(rep.doubling, p.lambda(static_cast<Index>(x), 2 * r) / l);
            rep.ball_ratio = std::max(rep.ball_ratio, rm.ball_mass(static_cast<Index>(x), r) / l);
        }
    }
    return rep;
}

MetricSpace uniform_net(std::size_t n) {
    std::vector<std::vector<double>> c(n);
    for (std::size_t i = 0; i < n; ++i) c[i] = {n > 1 ? static_cast<double>(i) / static_cast<double>(n - 1) : 0.0};
    return MetricSpace::from_coords(c);
}

MetricSpace grid_net(std::size_t k) {
    std::vector<std::vector<double>> c;
    const double h = k > 1 ? 1.0 / static_cast<double>(k - 1) : 0.0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = 0; j < k; ++j) c.push_back({i * h, j * h});
    return MetricSpace::from_coords(c);
}

MetricSpace random_tree_metric(std::size_t n, std::uint64_t seed) {
    Rng rng = Rng::stream(seed, {0x7472ee});
    std::vector<std::size_t> parent(n, 0);
    std::vector<double> len(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) {
        parent[i] = static_cast<std::size_t>(rng.below(i));
        len[i] = 1.0 - rng.uniform();  // (0, 1]
    }
    // depth-from-root distances plus lowest common ancestor by walking up
    std::vector<double> depth(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) depth[i] = depth[parent[i]] + len[i];
    std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j) {
            std::size_t a = i, b = j;
            while (a != b) {
                if (a > b) a = parent[a];
                else b = parent[b];
            }
            d[i][j] = d[j][i] = depth[i] + depth[j] - 2 * depth[a];
        }
    return MetricSpace::from_matrix(d);
}

MetricSpace random_line_points(std::size_t n, std::uint64_t seed) {
    Rng rng = Rng::stream(seed, {0x11e});
    std::vector<std::vector<double>> c(n);
    for (auto& p : c) p = {rng.uniform()};
    return MetricSpace::from_coords(c);
}

MetricSpace random_plane_points(std::size_t n, std::uint64_t seed) {
    Rng rng = Rng::stream(seed, {0x91a7e});
    std::vector<std::vector<double>> c(n);
    for (auto& p : c) p = {rng.uniform(), rng.uniform()};
    return MetricSpace::from_coords(c);
}

}  // namespace a2lab
