#pragma once
#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

#include "a2lab/common.hpp"
#include "a2lab/lattice.hpp"
#include "a2lab/metric_space.hpp"

namespace a2lab {

using Json = nlohmann::ordered_json;

// Throw IoError on unreadable files or malformed JSON.
Json read_json(const std::string& path);
void write_json(const std::string& path, const Json& j);
void write_text(const std::string& path, const std::string& text);

// {"coords": [[...]], "metric": "euclidean"} or {"distance_matrix": [[...]]}
MetricSpace space_from_json(const Json& j);
Json space_to_json(const MetricSpace& X);
// {"mass": [...]}; a missing or null document gives the uniform measure
Measure measure_from_json(const Json& j, std::size_t n);
// {"w": [...]}
Vec weight_from_json(const Json& j, std::size_t n);

// Sample with the space and masses embedded so it can be reloaded alone.
Json sample_to_json(const LatticeSample& s, const MetricSpace& X, const Measure& mu);
struct LoadedSample {
    MetricSpace space;
    Measure mu;
    LatticeSample sample;
};
LoadedSample sample_from_json(const Json& j);

// %.17g
std::string fmt(double v);

// Comma separated table with a fixed header; cells are preformatted.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
    CsvTable& row();
    CsvTable& add(const std::string& cell);
    CsvTable& add(double v) { return add(fmt(v)); }
    CsvTable& add(int v) { return add(std::to_string(v)); }
    CsvTable& add(std::size_t v) { return add(std::to_string(v)); }
    std::string str() const;
    std::size_t rows() const { return rows_.size(); }
    const std::vector<std::string>& header() const { return header_; }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

// FNV-1a of the compact dump, as 16 hex digits.
std::string json_hash(const Json& j);

}  // namespace a2lab
