#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "driftbench/data.hpp"
#include "driftbench/federation.hpp"
#include "driftbench/metrics.hpp"

namespace driftbench {

using ordered_json = nlohmann::ordered_json;

// Canonical dump: 2-space indent, trailing newline. All writers go through
// this so identical values always produce identical bytes.
std::string dump_json(const ordered_json& j);

// {"seed":..., "alpha":..., "dataset_digest":"hex", "splits":{"A":{"train":
// [ids],"test":[ids]},...}}. Round-trips bit-exactly.
ordered_json splitset_to_json(const SplitSet& splitset);
SplitSet splitset_from_json(const ordered_json& j);

ordered_json drift_report_to_json(const DriftReport& report);
DriftReport drift_report_from_json(const ordered_json& j);

// Flat per-permutation-phase rows:
// permutation,phase,train_acc,test_acc,mia_auc
std::string drift_report_to_csv(const DriftReport& report);

// {"round":..., "clients":[{"shard_size":...,"param_digest":"hex"}],
//  "aggregate_digest":"hex"}
ordered_json round_trace_to_json(const RoundTrace& trace);

// One JSON object per round, newline-terminated.
std::string round_traces_to_jsonl(const std::vector<RoundTrace>& traces);

}  // namespace driftbench
