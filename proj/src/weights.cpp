#include "a2lab/weights.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace a2lab {

double a2_characteristic(const BallIndex& balls, const Measure& mu, const Vec& w) {
    double best = 0.0;
    for (std::size_t x = 0; x < balls.size(); ++x) {
        const auto& ord = balls.order(static_cast<Index>(x));
        double m = 0.0, sw = 0.0, ss = 0.0;
        std::size_t i = 0;
        for (Index cut : balls.cuts(static_cast<Index>(x))) {
            for (; i < static_cast<std::size_t>(cut); ++i) {
                const Index y = ord[i];
                m += mu.mass[y];
                sw += w[y] * mu.mass[y];
                ss += mu.mass[y] / w[y];
            }
            best = std::max(best, (sw / m) * (ss / m));
        }
    }
    return best;
}

double ainfty_characteristic(const BallIndex& balls, const Measure& mu, const Vec& w) {
    double best = 0.0;
    for (std::size_t x = 0; x < balls.size(); ++x) {
        const auto& ord = balls.order(static_cast<Index>(x));
        double m = 0.0, sw = 0.0, sl = 0.0;
        std::size_t i = 0;
        for (Index cut : balls.cuts(static_cast<Index>(x))) {
            for (; i < static_cast<std::size_t>(cut); ++i) {
                const Index y = ord[i];
                m += mu.mass[y];
                sw += w[y] * mu.mass[y];
                sl += std::log(w[y]) * mu.mass[y];
            }
            best = std::max(best, (sw / m) * std::exp(-sl / m));
        }
    }
    return best;
}

double a2_over_cubes(const CubeTree& t, const Measure& mu, const Vec& w) {
    double best = 0.0;
    for (const Cube& q : t.cubes()) {
        double sw = 0.0, ss = 0.0;
        for (Index x : q.members) {
            sw += w[x] * mu.mass[x];
            ss += mu.mass[x] / w[x];
        }
        best = std::max(best, sw * ss / (q.mass * q.mass));
    }
    return best;
}

double ainfty_over_cubes(const CubeTree& t, const Measure& mu, const Vec& w) {
    double best = 0.0;
    for (const Cube& q : t.cubes()) {
        double sw = 0.0, sl = 0.0;
        for (Index x : q.members) {
            sw += w[x] * mu.mass[x];
            sl += std::log(w[x]) * mu.mass[x];
        }
        best = std::max(best, sw / q.mass * std::exp(-sl / q.mass));
    }
    return best;
}

double fujii_wilson_dyadic(const CubeTree& t, const Measure& mu, const Vec& w) {
    Vec avg = cube_averages(t, mu, w);
    double best = 0.0;
    for (std::size_t c = 0; c < t.size(); ++c) {
        const Cube& q = t[static_cast<int>(c)];
        // M^d(w chi_Q)(x) = max of averages over cubes R with x in R subset Q
        double integral = 0.0, wq = 0.0;
        for (Index x : q.members) {
            double m = 0.0;
            for (int g = q.generation; g <= t.levels(); ++g) m = std::max(m, avg[static_cast<std::size_t>(t.cube_of(g, x))]);
            integral += m * mu.mass[x];
            wq += w[x] * mu.mass[x];
        }
        best = std::max(best, integral / wq);
    }
    return best;
}

Weight make_weight(const BallIndex& balls, const Measure& mu, Vec w, std::string label) {
    Weight out;
    out.sigma.resize(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (!(w[i] > 0.0) || !std::isfinite(w[i])) throw DegenerateWeight("weight must be positive and finite");
        out.sigma[i] = 1.0 / w[i];
    }
    out.a2 = a2_characteristic(balls, mu, w);
    out.ainfty = ainfty_characteristic(balls, mu, w);
    out.w = std::move(w);
    out.label = std::move(label);
    return out;
}

Vec maximal_function(const BallIndex& balls, const Vec& f, const Vec& nu) {
    Vec out(balls.size(), 0.0);
    for (std::size_t x = 0; x < balls.size(); ++x) {
        const auto& ord = balls.order(static_cast<Index>(x));
        double m = 0.0, s = 0.0, best = 0.0;
        std::size_t i = 0;
        for (Index cut : balls.cuts(static_cast<Index>(x))) {
            for (; i < static_cast<std::size_t>(cut); ++i) {
                m += nu[ord[i]];
                s += std::abs(f[ord[i]]) * nu[ord[i]];
            }
            best = std::max(best, s / m);
        }
        out[x] = best;
    }
    return out;
}

double cube_average(const CubeTree& t, const Measure& mu, int cube, const Vec& f) {
    double s = 0.0;
    for (Index x : t[cube].members) s += f[x] * mu.mass[x];
    return s / t[cube].mass;
}

Vec cube_averages(const CubeTree& t, const Measure& mu, const Vec& f) {
    Vec out(t.size());
    for (std::size_t c = 0; c < t.size(); ++c) out[c] = cube_average(t, mu, static_cast<int>(c), f);
    return out;
}

Vec power_weight(const MetricSpace& X, double beta, Index center) {
    Vec w(X.size());
    const double h = X.size() > 1 ? X.min_separation() : 1.0;
    for (std::size_t x = 0; x < X.size(); ++x) w[x] = std::pow(std::max(X(center, static_cast<Index>(x)), h), beta);
    return w;
}

double power_beta_for_a2(const MetricSpace& X, const BallIndex& balls, const Measure& mu, double target, Index center) {
    if (target <= 1.0) return 0.0;
    double lo = 0.0, hi = 1.0;
    while (a2_characteristic(balls, mu, power_weight(X, hi, center)) < target) {
        lo = hi;
        hi *= 2.0;
        if (hi > 1024.0) throw ConfigError("[w]_2 target " + std::to_string(target) + " out of reach");
    }
    for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (a2_characteristic(balls, mu, power_weight(X, mid, center)) < target) lo = mid;
        else hi = mid;
    }
    return 0.5 * (lo + hi);
}

namespace {

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(item);
    return out;
}

std::pair<double, double> parse_range(const std::string& s) {
    auto pos = s.find("..");
    if (pos == std::string::npos) {
        double v = std::stod(s);
        return {v, v};
    }
    return {std::stod(s.substr(0, pos)), std::stod(s.substr(pos + 2))};
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

}  // namespace

std::vector<Weight> weight_family(const MetricSpace& X, const BallIndex& balls, const Measure& mu,
                                  const std::string& spec) {
    auto parts = split(spec, ':');
    if (parts.empty()) throw ConfigError("empty weight family");
    std::vector<Weight> out;
    try {
        if (parts[0] == "const") {
            out.push_back(make_weight(balls, mu, Vec(X.size(), 1.0), "const"));
            return out;
        }
        Index center = 0;
        int count = 9, per_decade = 8;
        std::pair<double, double> range{0.0, 0.0};
        bool have_range = false;
        for (std::size_t i = 1; i < parts.size(); ++i) {
            const auto& p = parts[i];
            auto eq = p.find('=');
            std::string key = eq == std::string::npos ? "" : p.substr(0, eq);
            std::string val = eq == std::string::npos ? p : p.substr(eq + 1);
            if (key == "center") center = static_cast<Index>(std::stol(val));
            else if (key == "count") count = std::stoi(val);
            else if (key == "per-decade") per_decade = std::stoi(val);
            else if (key == "beta" || (key.empty() && parts[0] == "a2")) {
                range = parse_range(val);
                have_range = true;
            } else throw ConfigError("unknown weight family field '" + p + "'");
        }
        if (!have_range) throw ConfigError("weight family needs a range: " + spec);
        if (center < 0 || static_cast<std::size_t>(center) >= X.size()) throw ConfigError("weight center out of range");
        if (parts[0] == "power") {
            const int k = range.first == range.second ? 1 : std::max(count, 2);
            for (int i = 0; i < k; ++i) {
                double b = k == 1 ? range.first : range.first + (range.second - range.first) * i / (k - 1);
                out.push_back(make_weight(balls, mu, power_weight(X, b, center), "power:beta=" + fmt(b)));
            }
        } else if (parts[0] == "a2") {
            const double l0 = std::log10(range.first), l1 = std::log10(range.second);
            const int k = std::max(2, static_cast<int>(std::ceil((l1 - l0) * per_decade)) + 1);
            for (int i = 0; i < k; ++i) {
                const double target = std::pow(10.0, l0 + (l1 - l0) * i / (k - 1));
                const double b = power_beta_for_a2(X, balls, mu, target, center);
                out.push_back(make_weight(balls, mu, power_weight(X, b, center), "power:beta=" + fmt(b)));
            }
        } else {
            throw ConfigError("unknown weight family '" + parts[0] + "'");
        }
    } catch (const std::invalid_argument&) {
        throw ConfigError("malformed weight family: " + spec);
    }
    return out;
}

}  // namespace a2lab
