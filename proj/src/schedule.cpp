#include "driftbench/schedule.hpp"

#include <algorithm>

#include "driftbench/attack.hpp"
#include "driftbench/errors.hpp"
#include "driftbench/rng.hpp"

namespace driftbench {

std::string paradigm_name(Paradigm p) {
    return p == Paradigm::uniform ? "uniform" : "additive";
}

Paradigm paradigm_from_name(const std::string& name) {
    if (name == "uniform") {
        return Paradigm::uniform;
    }
    if (name == "additive") {
        return Paradigm::additive;
    }
    throw ConfigError("unknown paradigm \"" + name + "\" (expected uniform or additive)");
}

std::string order_name(const SplitOrder& order) {
    std::string out;
    for (SplitId s : order) {
        out.push_back(split_name(s));
    }
    return out;
}

std::uint64_t order_code(const SplitOrder& order) {
    std::uint64_t code = 0;
    for (SplitId s : order) {
        code = code * 4 + static_cast<std::uint64_t>(s);
    }
    return code;
}

std::vector<SplitOrder> enumerate_permutations(std::size_t count, std::uint64_t seed) {
    if (count < 1 || count > 24) {
        throw ConfigError("permutation count " + std::to_string(count) +
                          " is outside [1, 24]");
    }
    std::array<int, 4> idx = {0, 1, 2, 3};
    std::vector<SplitOrder> all;
    all.reserve(24);
    do {
        all.push_back({static_cast<SplitId>(idx[0]), static_cast<SplitId>(idx[1]),
                       static_cast<SplitId>(idx[2]), static_cast<SplitId>(idx[3])});
    } while (std::next_permutation(idx.begin(), idx.end()));
    Rng rng(seed);
    rng.shuffle(all);
    all.resize(count);
    return all;
}

namespace {

// Concatenates the chosen half of the selected splits, visiting splits in
// canonical A..D order so the result is independent of the order the splits
// were encountered in.
std::vector<ExampleId> collect_half(const SplitSet& splitset, const std::array<bool, 4>& selected,
                                    bool train_half) {
    std::vector<ExampleId> out;
    for (SplitId s : kAllSplits) {
        if (!selected[static_cast<std::size_t>(s)]) {
            continue;
        }
        const SplitHalves& halves = splitset.at(s);
        const std::vector<ExampleId>& ids = train_half ? halves.train : halves.test;
        out.insert(out.end(), ids.begin(), ids.end());
    }
    return out;
}

std::array<bool, 4> prefix_mask(const SplitOrder& order, std::size_t phase_index) {
    std::array<bool, 4> selected = {false, false, false, false};
    for (std::size_t k = 0; k <= phase_index; ++k) {
        selected[static_cast<std::size_t>(order[k])] = true;
    }
    return selected;
}

void check_phase_index(std::size_t phase_index) {
    if (phase_index >= 4) {
        throw ConfigError("phase index " + std::to_string(phase_index) + " is outside [0, 4)");
    }
}

}  // namespace

std::vector<ExampleId> test_set_for_phase(const SplitSet& splitset, const PhasePlan& plan,
                                          std::size_t phase_index) {
    check_phase_index(phase_index);
    if (plan.paradigm == Paradigm::uniform) {
        return collect_half(splitset, {true, true, true, true}, false);
    }
    return collect_half(splitset, prefix_mask(plan.permutation, phase_index), false);
}

std::vector<ExampleId> member_set_for_phase(const SplitSet& splitset, const PhasePlan& plan,
                                            std::size_t phase_index) {
    check_phase_index(phase_index);
    return collect_half(splitset, prefix_mask(plan.permutation, phase_index), true);
}

std::vector<PhaseMetrics> run_incremental(const ScheduleConfig& cfg, const Dataset& dataset,
                                          const SplitSet& splitset, const PhasePlan& plan,
                                          const PhaseTrainer& trainer) {
    if (!trainer) {
        throw ConfigError("run_incremental: trainer is empty");
    }
    ModelState model = init_model(cfg.arch, cfg.init_seed, cfg.optimizer, cfg.hyper);

    std::vector<ExampleId> nonmembers = collect_half(splitset, {true, true, true, true}, false);

    std::vector<PhaseMetrics> out;
    out.reserve(4);
    for (std::size_t phase = 0; phase < 4; ++phase) {
        try {
            const SplitId split = plan.permutation[phase];
            model = trainer(std::move(model), splitset.at(split).train, phase);

            const std::vector<ExampleId> members = member_set_for_phase(splitset, plan, phase);
            const std::vector<ExampleId> test_ids = test_set_for_phase(splitset, plan, phase);
            const EvalSet member_eval = gather(dataset, members);
            const EvalSet test_eval = gather(dataset, test_ids);

            PhaseMetrics pm;
            pm.phase_index = phase;
            pm.train_accuracy = accuracy(model, member_eval.features, member_eval.labels);
            pm.test_accuracy = accuracy(model, test_eval.features, test_eval.labels);

            const std::size_t per_side =
                std::min({members.size(), nonmembers.size(), cfg.attack_per_side_cap});
            const std::vector<MIARecord> records = build_eval_records(
                model, dataset, members, nonmembers, per_side,
                seed_mix(cfg.attack_seed, {order_code(plan.permutation), phase}));
            const AucResult auc = roc_auc(records);
            pm.mia_auc = auc.auc;
            pm.member_count = auc.num_members;
            pm.nonmember_count = auc.num_nonmembers;
            out.push_back(pm);
        } catch (...) {
            rethrow_annotated("order " + order_name(plan.permutation) + ", phase " +
                              std::to_string(phase) + ": ");
        }
    }
    return out;
}

}  // namespace driftbench
