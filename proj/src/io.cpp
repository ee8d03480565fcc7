#include "a2lab/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace a2lab {

Json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    try {
        return Json::parse(in);
    } catch (const Json::exception& e) {
        throw IoError(path + ": " + e.what());
    }
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path);
    out << text;
    if (!out) throw IoError("write failed: " + path);
}

void write_json(const std::string& path, const Json& j) { write_text(path, j.dump(2) + "\n"); }

static std::vector<std::vector<double>> matrix_of(const Json& j, const char* field) {
    if (!j.is_array()) throw IoError(std::string(field) + " must be an array of arrays");
    std::vector<std::vector<double>> m;
    for (const auto& row : j) {
        if (!row.is_array()) throw IoError(std::string(field) + " must be an array of arrays");
        std::vector<double> r;
        for (const auto& v : row) {
            if (!v.is_number()) throw IoError(std::string(field) + " entries must be numbers");
            r.push_back(v.get<double>());
        }
        m.push_back(std::move(r));
    }
    return m;
}

MetricSpace space_from_json(const Json& j) {
    if (j.contains("distance_matrix")) return MetricSpace::from_matrix(matrix_of(j["distance_matrix"], "distance_matrix"));
    if (j.contains("coords")) {
        std::string metric = j.value("metric", std::string("euclidean"));
        if (metric != "euclidean") throw IoError("unsupported metric " + metric);
        return MetricSpace::from_coords(matrix_of(j["coords"], "coords"));
    }
    throw IoError("space needs coords or distance_matrix");
}

Json space_to_json(const MetricSpace& X) {
    Json j;
    if (!X.coords().empty()) {
        j["coords"] = X.coords();
        j["metric"] = "euclidean";
    } else {
        j["distance_matrix"] = X.matrix();
    }
    return j;
}

static Vec vector_of(const Json& j, const char* field, std::size_t n) {
    if (!j.is_array()) throw IoError(std::string(field) + " must be an array");
    Vec v;
    for (const auto& x : j) {
        if (!x.is_number()) throw IoError(std::string(field) + " entries must be numbers");
        v.push_back(x.get<double>());
    }
    if (v.size() != n)
        throw IoError(std::string(field) + " has " + std::to_string(v.size()) + " entries, expected " +
                      std::to_string(n));
    return v;
}

Measure measure_from_json(const Json& j, std::size_t n) {
    if (j.is_null() || !j.contains("mass")) return Measure::uniform(n);
    Measure mu{vector_of(j["mass"], "mass", n)};
    validate_measure(mu, n);
    return mu;
}

Vec weight_from_json(const Json& j, std::size_t n) {
    if (!j.contains("w")) throw IoError("weight needs field w");
    Vec w = vector_of(j["w"], "w", n);
    for (double x : w)
        if (!(x > 0)) throw DegenerateWeight("weight entries must be positive");
    return w;
}

Json sample_to_json(const LatticeSample& s, const MetricSpace& X, const Measure& mu) {
    Json j;
    j["delta"] = s.delta;
    j["levels"] = s.levels;
    j["approximate"] = s.approximate;
    j["grids"] = s.grids;
    j["parents"] = s.parent;
    j["cubes"] = s.assignment;
    j["space"] = space_to_json(X);
    j["mass"] = mu.mass;
    return j;
}

LoadedSample sample_from_json(const Json& j) {
    for (const char* f : {"delta", "levels", "grids", "parents", "cubes", "space"})
        if (!j.contains(f)) throw IoError(std::string("sample needs field ") + f);
    LoadedSample out;
    out.space = space_from_json(j["space"]);
    out.mu = measure_from_json(j.contains("mass") ? Json{{"mass", j["mass"]}} : Json(), out.space.size());
    auto& s = out.sample;
    s.delta = j["delta"].get<double>();
    s.levels = j["levels"].get<int>();
    s.approximate = j.value("approximate", false);
    s.grids = j["grids"].get<std::vector<std::vector<Index>>>();
    s.parent = j["parents"].get<std::vector<std::vector<Index>>>();
    s.assignment = j["cubes"].get<std::vector<std::vector<Index>>>();
    if (s.assignment.size() != static_cast<std::size_t>(s.levels) + 1)
        throw IoError("sample cubes must have levels + 1 rows");
    for (const auto& row : s.assignment)
        if (row.size() != out.space.size()) throw IoError("sample cube rows must cover every point");
    return out;
}

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

CsvTable& CsvTable::row() {
    rows_.emplace_back();
    return *this;
}

CsvTable& CsvTable::add(const std::string& cell) {
    if (rows_.empty()) rows_.emplace_back();
    rows_.back().push_back(cell);
    return *this;
}

std::string CsvTable::str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < header_.size(); ++i) os << (i ? "," : "") << header_[i];
    os << "\n";
    for (const auto& r : rows_) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
        os << "\n";
    }
    return os.str();
}

std::string json_hash(const Json& j) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : j.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

}  // namespace a2lab
