#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "driftbench/schedule.hpp"

namespace driftbench {

struct DriftDelta {
    std::size_t phase_index = 0;  // >= 1: the transition into this phase
    double delta_auc = 0.0;
    double delta_train_acc = 0.0;
};

struct FiveNumberSummary {
    double min = 0.0;
    double q1 = 0.0;
    double median = 0.0;
    double q3 = 0.0;
    double max = 0.0;
};

// One permutation's line in the report.
struct PermutationResult {
    PhasePlan plan;
    std::vector<PhaseMetrics> phases;
    // Missing when the train-accuracy or AUC series was constant.
    std::optional<double> pearson_train_auc;
    std::vector<DriftDelta> deltas;
};

struct DriftReport {
    std::string config_digest;
    Paradigm paradigm = Paradigm::uniform;
    std::size_t client_count = 0;
    std::vector<PermutationResult> permutations;  // sorted by order code
    std::array<double, 4> mean_train_acc = {};
    std::array<double, 4> mean_test_acc = {};
    std::array<double, 4> mean_mia_auc = {};
    // Over the per-permutation Pearson values that exist; missing if none do.
    std::optional<FiveNumberSummary> correlation_summary;
    std::size_t degenerate_count = 0;  // permutations excluded from the summary
    // Pearson over all (train_acc, mia_auc) points pooled across permutations,
    // for comparison against the per-permutation summary.
    std::optional<double> pooled_pearson;
};

// Sample Pearson correlation, clamped to [-1, 1]. A constant series has no
// defined correlation and raises DegenerateSeriesError rather than yielding
// NaN.
double pearson(const std::vector<double>& x, const std::vector<double>& y);

// Consecutive differences of mia_auc and train_accuracy between phases.
std::vector<DriftDelta> drift_deltas(const std::vector<PhaseMetrics>& metrics);

// Quantile by linear interpolation between order statistics: rank h=(n-1)p.
// `sorted` must be ascending and nonempty; p in [0, 1].
double quantile_linear(const std::vector<double>& sorted, double p);

FiveNumberSummary five_number_summary(std::vector<double> values);

struct PermutationRun {
    PhasePlan plan;
    std::vector<PhaseMetrics> phases;
};

// Cross-permutation aggregation: per-phase means, per-permutation Pearson
// (degenerate ones excluded with a count), and the five-number summary of the
// surviving correlations. Input order does not matter; entries are
// canonicalized by order code.
DriftReport aggregate(const std::vector<PermutationRun>& runs, std::size_t client_count,
                      const std::string& config_digest);

}  // namespace driftbench
