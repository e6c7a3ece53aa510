#include "driftbench/attack.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "driftbench/errors.hpp"
#include "driftbench/rng.hpp"
#include "driftbench/textio.hpp"

namespace driftbench {

double mia_score(const ModelState& model, const LabeledExample& example) {
    if (example.label < 0 || static_cast<std::size_t>(example.label) >= model.arch.num_classes) {
        throw DataError("mia_score: label " + std::to_string(example.label) + " is outside [0, " +
                        std::to_string(model.arch.num_classes) + ")");
    }
    Tensor features({example.features.size()}, example.features);
    const ConfidenceVector cv = predict_confidences(model, features);
    return cv.probs[static_cast<std::size_t>(example.label)];
}

std::vector<MIARecord> build_eval_records(const ModelState& model, const Dataset& dataset,
                                          const std::vector<ExampleId>& member_ids,
                                          const std::vector<ExampleId>& nonmember_ids,
                                          std::size_t per_side, std::uint64_t seed) {
    if (member_ids.empty() || nonmember_ids.empty()) {
        throw EvaluationError("build_eval_records: both pools must be nonempty");
    }
    if (per_side == 0 || per_side > std::min(member_ids.size(), nonmember_ids.size())) {
        throw EvaluationError("build_eval_records: per_side " + std::to_string(per_side) +
                              " exceeds a pool size (" + std::to_string(member_ids.size()) +
                              " members, " + std::to_string(nonmember_ids.size()) +
                              " non-members)");
    }

    std::vector<ExampleId> members = member_ids;
    std::vector<ExampleId> nonmembers = nonmember_ids;
    std::sort(members.begin(), members.end());
    std::sort(nonmembers.begin(), nonmembers.end());
    {
        std::vector<ExampleId> overlap;
        std::set_intersection(members.begin(), members.end(), nonmembers.begin(),
                              nonmembers.end(), std::back_inserter(overlap));
        if (!overlap.empty()) {
            throw EvaluationError("build_eval_records: pools overlap (e.g. id " +
                                  std::to_string(overlap.front()) + ")");
        }
    }

    Rng rng(seed);
    rng.shuffle(members);
    rng.shuffle(nonmembers);

    std::vector<MIARecord> records;
    records.reserve(2 * per_side);
    for (std::size_t i = 0; i < per_side; ++i) {
        records.push_back({members[i], mia_score(model, dataset.by_id(members[i])), true});
    }
    for (std::size_t i = 0; i < per_side; ++i) {
        records.push_back({nonmembers[i], mia_score(model, dataset.by_id(nonmembers[i])), false});
    }
    return records;
}

AucResult roc_auc(const std::vector<MIARecord>& records) {
    AucResult out;
    for (const auto& r : records) {
        if (!std::isfinite(r.score)) {
            throw EvaluationError("roc_auc: non-finite score for example " +
                                  std::to_string(r.example_id));
        }
        (r.is_member ? out.num_members : out.num_nonmembers) += 1;
    }
    if (out.num_members == 0 || out.num_nonmembers == 0) {
        throw EvaluationError("roc_auc: need at least one member and one non-member record");
    }

    // Descending-score sweep over tie groups. Doubling the pair counts keeps
    // the half-credit tie term integral, so the worked fixtures are exact.
    std::vector<const MIARecord*> sorted;
    sorted.reserve(records.size());
    for (const auto& r : records) {
        sorted.push_back(&r);
    }
    std::sort(sorted.begin(), sorted.end(),
              [](const MIARecord* a, const MIARecord* b) { return a->score > b->score; });

    unsigned long long twice_wins = 0;  // 2*[m > n] + 1*[m == n], summed over pairs
    unsigned long long ties = 0;
    std::size_t members_above = 0;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        std::size_t group_members = 0;
        std::size_t group_nonmembers = 0;
        while (j < sorted.size() && sorted[j]->score == sorted[i]->score) {
            (sorted[j]->is_member ? group_members : group_nonmembers) += 1;
            ++j;
        }
        twice_wins += static_cast<unsigned long long>(group_nonmembers) *
                      (2ULL * members_above + group_members);
        ties += static_cast<unsigned long long>(group_members) * group_nonmembers;
        members_above += group_members;
        i = j;
    }

    out.tie_count = static_cast<std::size_t>(ties);
    out.auc = static_cast<double>(twice_wins) /
              (2.0 * static_cast<double>(out.num_members) *
               static_cast<double>(out.num_nonmembers));
    return out;
}

std::string mia_records_to_csv(const std::vector<MIARecord>& records) {
    std::string out = "example_id,score,is_member\n";
    for (const auto& r : records) {
        out += std::to_string(r.example_id);
        out += ',';
        out += format_double(r.score);
        out += ',';
        out += r.is_member ? "true" : "false";
        out += '\n';
    }
    return out;
}

}  // namespace driftbench
