#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

#include "driftbench/tensor.hpp"

namespace driftbench {

using ExampleId = std::uint64_t;

struct LabeledExample {
    ExampleId id = 0;
    std::vector<double> features;
    int label = 0;
};

struct Dataset {
    std::vector<LabeledExample> examples;
    std::size_t num_classes = 0;
    std::size_t feature_dim = 0;
    std::unordered_map<ExampleId, std::size_t> index;  // id -> position in examples

    // Validates invariants (unique ids, consistent feature_dim, labels in
    // range) and builds the id index.
    static Dataset make(std::vector<LabeledExample> examples, std::size_t num_classes,
                        std::size_t feature_dim);

    const LabeledExample& by_id(ExampleId id) const;
    std::size_t size() const { return examples.size(); }

    // Content fingerprint used for split provenance.
    std::uint64_t digest() const;
};

enum class SplitId : int { A = 0, B = 1, C = 2, D = 3 };

inline constexpr std::array<SplitId, 4> kAllSplits = {SplitId::A, SplitId::B, SplitId::C,
                                                      SplitId::D};

char split_name(SplitId s);
SplitId split_from_name(char c);

struct SplitHalves {
    std::vector<ExampleId> train;
    std::vector<ExampleId> test;
};

struct SplitProvenance {
    std::uint64_t seed = 0;
    double alpha = 0.0;
    std::uint64_t dataset_digest = 0;
};

// The four mutually exclusive non-IID partitions, each with train/test halves.
struct SplitSet {
    std::array<SplitHalves, 4> splits;
    SplitProvenance provenance;

    const SplitHalves& at(SplitId s) const { return splits[static_cast<std::size_t>(s)]; }
    SplitHalves& at(SplitId s) { return splits[static_cast<std::size_t>(s)]; }
};

struct ClientShards {
    std::vector<std::vector<ExampleId>> shards;  // indexed by client id
    std::uint64_t seed = 0;
};

enum class DatasetFormat { csv, binary_cifar };

// CSV: one example per row, label first. Binary CIFAR: records of
// 1 coarse-label byte + 1 fine-label byte + 3072 pixel bytes; pixels are
// scaled to [0,1] and the coarse byte becomes the label (20 classes).
Dataset load_dataset(const std::string& path, DatasetFormat format);

// Seeded Gaussian blobs, one mean per class, pairwise mean distance at least
// class_separation (unit standard deviation per coordinate).
Dataset synthesize_dataset(std::size_t num_classes, std::size_t per_class,
                           std::size_t feature_dim, double class_separation, std::uint64_t seed);

// Replaces labels via a fine->coarse table (entry -1 marks an unmapped fine
// label). Coarse labels must form a contiguous range [0, K).
Dataset coarsen_labels(const Dataset& dataset, const std::vector<int>& fine_to_coarse);

// Per class, draws split proportions from Dirichlet(alpha,...) and assigns
// examples by largest-remainder rounding; a stratified seeded holdout of
// test_fraction per class forms each split's test half.
SplitSet partition_noniid(const Dataset& dataset, std::size_t num_splits, double alpha,
                          double test_fraction, std::uint64_t seed);

// Seeded shuffle then round-robin; shard sizes differ by at most one.
// A single client receives the input list unshuffled.
ClientShards shard_for_clients(const std::vector<ExampleId>& split_train,
                               std::size_t num_clients, std::uint64_t seed);

// Structural check of SplitSet invariants (disjointness, full coverage,
// nonempty halves). Throws PartitionError on violation.
void validate_splitset(const Dataset& dataset, const SplitSet& splitset);

// Materializes (features, labels) for the given ids, in id-list order.
struct EvalSet {
    Tensor features;
    std::vector<int> labels;
};

EvalSet gather(const Dataset& dataset, const std::vector<ExampleId>& ids);

}  // namespace driftbench
