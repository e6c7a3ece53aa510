#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "driftbench/data.hpp"
#include "driftbench/model.hpp"

namespace driftbench {

enum class Paradigm { uniform, additive };

std::string paradigm_name(Paradigm p);
Paradigm paradigm_from_name(const std::string& name);

// A training order: the four splits, each exactly once.
using SplitOrder = std::array<SplitId, 4>;

struct PhasePlan {
    SplitOrder permutation = kAllSplits;
    Paradigm paradigm = Paradigm::uniform;
};

// "BADC"-style label of an order.
std::string order_name(const SplitOrder& order);

// Injective numeric code of an order (base-4 digits), used to derive
// per-permutation seed streams. Deliberately paradigm-free: the trained model
// sequence must not depend on how it is tested.
std::uint64_t order_code(const SplitOrder& order);

struct PhaseMetrics {
    std::size_t phase_index = 0;
    double train_accuracy = 0.0;  // on the cumulative member set
    double test_accuracy = 0.0;   // on the paradigm's phase test set
    double mia_auc = 0.0;
    std::size_t member_count = 0;     // membership records actually evaluated
    std::size_t nonmember_count = 0;  // balanced, so equal to member_count
};

// Seeded sample of `count` distinct orders out of all 24.
std::vector<SplitOrder> enumerate_permutations(std::size_t count, std::uint64_t seed);

// Uniform: every test half, every phase. Additive: test halves of the first
// phase_index+1 splits of the order. Ids come grouped by split in A..D order,
// so at the final phase both paradigms return the identical list.
std::vector<ExampleId> test_set_for_phase(const SplitSet& splitset, const PhasePlan& plan,
                                          std::size_t phase_index);

// Train halves encountered so far: union over permutation[0..phase_index],
// grouped by split in A..D order.
std::vector<ExampleId> member_set_for_phase(const SplitSet& splitset, const PhasePlan& plan,
                                            std::size_t phase_index);

struct ScheduleConfig {
    ArchitectureSpec arch;
    OptimizerKind optimizer = OptimizerKind::adam;
    OptimizerHyper hyper{};
    std::uint64_t init_seed = 0;    // model initialization stream
    std::uint64_t attack_seed = 0;  // membership-evaluation subsampling stream
    std::size_t attack_per_side_cap = 1000;
};

// Trains the carried-over model on the ids of one split; the phase index is
// provided so the trainer can derive per-phase seed streams.
using PhaseTrainer =
    std::function<ModelState(ModelState, const std::vector<ExampleId>&, std::size_t)>;

// One full incremental run: phase k trains on split permutation[k] starting
// from the phase k-1 model (phase 0 from a fresh init), then records train
// accuracy over all members so far, test accuracy on the paradigm's test set,
// and membership AUC over a balanced seeded sample (non-member pool: the test
// halves of all four splits). Errors are annotated with (order, phase).
std::vector<PhaseMetrics> run_incremental(const ScheduleConfig& cfg, const Dataset& dataset,
                                          const SplitSet& splitset, const PhasePlan& plan,
                                          const PhaseTrainer& trainer);

}  // namespace driftbench
