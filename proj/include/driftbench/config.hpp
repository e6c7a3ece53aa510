#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "driftbench/data.hpp"
#include "driftbench/model.hpp"
#include "driftbench/schedule.hpp"

namespace driftbench {

// Synthetic-source parameters (used when dataset.source == "synthetic").
struct SynthesisParams {
    std::size_t num_classes = 8;
    std::size_t per_class = 250;
    std::size_t feature_dim = 16;
    // Kept low enough that the classes overlap: a model that fits the train
    // split has to memorize individual points, which is the regime where
    // membership leakage moves together with train accuracy.
    double class_separation = 1.0;
    std::uint64_t seed = 101;
};

struct DatasetSection {
    bool synthetic = true;
    std::string path;  // file source only
    DatasetFormat format = DatasetFormat::csv;
    SynthesisParams synthesis;
};

struct PartitionSection {
    double alpha = 0.5;
    double test_fraction = 0.2;
    std::uint64_t seed = 202;
};

struct ScheduleSection {
    std::size_t permutation_count = 8;
    std::vector<Paradigm> paradigms = {Paradigm::uniform, Paradigm::additive};
    std::uint64_t seed = 303;
};

struct FederationSection {
    std::vector<std::size_t> client_counts = {1, 2, 5, 10};
    std::size_t rounds_per_phase = 5;
    std::size_t local_epochs = 2;
    std::size_t batch_size = 32;
};

struct ModelSection {
    std::vector<std::size_t> hidden_dims = {64, 64};
    Activation activation = Activation::relu;
    OptimizerKind optimizer = OptimizerKind::adam;
    OptimizerHyper hyper{};
};

struct AttackSection {
    std::size_t per_side_cap = 1000;
    std::uint64_t seed = 404;
};

struct ExperimentConfig {
    DatasetSection dataset;
    std::vector<int> coarsen;  // optional fine -> coarse label table; empty = none
    PartitionSection partition;
    ScheduleSection schedule;
    FederationSection federation;
    ModelSection model;
    AttackSection attack;
    std::string out_dir = "results";
};

// Strict parse: unknown keys anywhere are ConfigError; omitted keys take the
// defaults above; all values are range-checked.
ExperimentConfig parse_config(const nlohmann::ordered_json& j);

// Reads a .json or .toml config file (dispatch by extension).
ExperimentConfig load_config_file(const std::filesystem::path& path);

// Canonical JSON echo of the effective config, every field explicit. Two
// configs behave identically iff their effective JSON dumps are identical.
nlohmann::ordered_json effective_config_json(const ExperimentConfig& cfg);

// 16-hex-char fingerprint of the effective config, excluding out_dir: the
// same experiment written to two places is still the same experiment.
std::string config_digest(const ExperimentConfig& cfg);

// Replaces the four experiment seeds with streams derived from `seed`, so one
// flag re-seeds a whole run without touching the config file.
void apply_seed_override(ExperimentConfig& cfg, std::uint64_t seed);

}  // namespace driftbench
