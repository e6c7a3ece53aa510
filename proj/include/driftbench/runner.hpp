#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "driftbench/config.hpp"
#include "driftbench/data.hpp"

namespace driftbench {

// Loads or synthesizes the dataset named by the config, applying the coarsen
// table when one is given.
Dataset build_dataset(const ExperimentConfig& cfg);

// Non-IID partition of `dataset` under the config's partition section,
// validated before return.
SplitSet build_splitset(const ExperimentConfig& cfg, const Dataset& dataset);

// Writes <out_dir>/splits.json and <out_dir>/class_histogram.csv
// (header: class,A,B,C,D; counts cover both halves of each split).
void cmd_partition(const ExperimentConfig& cfg);

struct CellFailure {
    std::string paradigm;
    std::size_t clients = 0;
    std::string order;
    std::string error;
};

struct RunOutcome {
    bool all_ok = true;
    std::vector<CellFailure> failures;
    std::filesystem::path out_dir;
};

// Full protocol matrix (paradigms x client counts x permutations), cells
// independent and run on up to `jobs` threads. Outputs under cfg.out_dir:
// metrics.csv, per-(paradigm, client count) drift report JSON + CSV,
// per-cell round traces (JSONL), and manifest.json written last. A failed
// cell is recorded and skipped; the rest still run.
RunOutcome cmd_run(const ExperimentConfig& cfg, std::size_t jobs);

}  // namespace driftbench
