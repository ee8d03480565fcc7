#pragma once
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "a2lab/common.hpp"
#include "a2lab/cube_tree.hpp"
#include "a2lab/io.hpp"
#include "a2lab/lattice.hpp"
#include "a2lab/metric_space.hpp"

namespace a2lab {

// Space specs: "net1d:N", "net2d:K", "tree:N:SEED", "line:N:SEED",
// "plane:N:SEED", "file:PATH".
MetricSpace space_from_spec(const std::string& spec);

// Tree specs: "regular:N:B" (contiguous blocks over net1d:N, delta = 1/B),
// "file:SAMPLE.json", or an object {"space", "delta", "levels", "trial", "seed"}
// describing one random lattice.
struct TreeBundle {
    MetricSpace X;
    Measure mu;
    CubeTree tree;
};
TreeBundle tree_from_spec(const Json& spec, std::uint64_t seed);

struct ExperimentResult {
    std::string type;
    bool pass = true;
    Json quantities = Json::object();
    std::vector<std::pair<std::string, CsvTable>> tables;
    double runtime = 0.0;  // seconds; JSON only
};

struct Report {
    std::string version;
    std::string config_hash;
    std::uint64_t seed = 0;
    std::vector<ExperimentResult> experiments;
    bool pass() const;
};

// Throws ConfigError naming the offending field, e.g. "experiments[2].trials".
void validate_config(const Json& config);

// One experiment entry, already validated.
ExperimentResult run_experiment(const Json& entry, std::uint64_t seed);

// Validates and runs every experiment in order. Module errors are rethrown
// as ExperimentFailed with the experiment index and type prepended.
Report run_config(const Json& config);

Json report_to_json(const Report& r);
// report.json plus one CSV per table, named NN_type_table.csv.
void emit_report(const Report& r, const std::string& out_dir);

}  // namespace a2lab
