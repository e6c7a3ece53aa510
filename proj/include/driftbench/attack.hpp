#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "driftbench/data.hpp"
#include "driftbench/model.hpp"

namespace driftbench {

struct MIARecord {
    ExampleId example_id = 0;
    double score = 0.0;
    bool is_member = false;
};

struct AucResult {
    double auc = 0.0;
    std::size_t num_members = 0;
    std::size_t num_nonmembers = 0;
    std::size_t tie_count = 0;  // member/non-member pairs with equal scores
};

// Attack score for one example: the confidence the model assigns to the true
// label. Reads the model exclusively through predict_confidences — the
// adversary is query-only and never sees parameters or gradients.
double mia_score(const ModelState& model, const LabeledExample& example);

// Balanced evaluation set: a seeded subsample of per_side ids from each pool
// (pools are sorted before sampling, so only their id sets matter), scored
// through mia_score.
std::vector<MIARecord> build_eval_records(const ModelState& model, const Dataset& dataset,
                                          const std::vector<ExampleId>& member_ids,
                                          const std::vector<ExampleId>& nonmember_ids,
                                          std::size_t per_side, std::uint64_t seed);

// Mann-Whitney AUC with half credit for ties; identical to the trapezoidal
// area under the descending-score ROC sweep. The arithmetic uses only rank
// counts, so any strictly increasing transform of the scores leaves the
// result bit-unchanged.
AucResult roc_auc(const std::vector<MIARecord>& records);

// CSV serialization, columns: example_id,score,is_member.
std::string mia_records_to_csv(const std::vector<MIARecord>& records);

}  // namespace driftbench
