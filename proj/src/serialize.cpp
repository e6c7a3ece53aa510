#include "driftbench/serialize.hpp"

#include <set>

#include "driftbench/digest.hpp"
#include "driftbench/errors.hpp"
#include "driftbench/textio.hpp"

namespace driftbench {

std::string dump_json(const ordered_json& j) {
    return j.dump(2) + "\n";
}

namespace {

void require_keys(const ordered_json& j, const std::set<std::string>& required,
                  const std::set<std::string>& optional, const std::string& where) {
    if (!j.is_object()) {
        throw ParseError(where + ": expected a JSON object");
    }
    for (const auto& item : j.items()) {
        if (!required.count(item.key()) && !optional.count(item.key())) {
            throw ParseError(where + ": unknown key \"" + item.key() + "\"");
        }
    }
    for (const std::string& key : required) {
        if (!j.contains(key)) {
            throw ParseError(where + ": missing key \"" + key + "\"");
        }
    }
}

std::vector<ExampleId> id_list(const ordered_json& j, const std::string& where) {
    if (!j.is_array()) {
        throw ParseError(where + ": expected an array of ids");
    }
    std::vector<ExampleId> out;
    out.reserve(j.size());
    for (const auto& v : j) {
        if (!v.is_number_unsigned()) {
            throw ParseError(where + ": ids must be unsigned integers");
        }
        out.push_back(v.get<ExampleId>());
    }
    return out;
}

double finite_number(const ordered_json& j, const std::string& where) {
    if (!j.is_number()) {
        throw ParseError(where + ": expected a number");
    }
    return j.get<double>();
}

}  // namespace

ordered_json splitset_to_json(const SplitSet& splitset) {
    ordered_json j;
    j["seed"] = splitset.provenance.seed;
    j["alpha"] = splitset.provenance.alpha;
    j["dataset_digest"] = to_hex(splitset.provenance.dataset_digest);
    ordered_json splits;
    for (SplitId s : kAllSplits) {
        const SplitHalves& halves = splitset.at(s);
        ordered_json half;
        half["train"] = halves.train;
        half["test"] = halves.test;
        splits[std::string(1, split_name(s))] = std::move(half);
    }
    j["splits"] = std::move(splits);
    return j;
}

SplitSet splitset_from_json(const ordered_json& j) {
    require_keys(j, {"seed", "alpha", "splits"}, {"dataset_digest"}, "splits file");
    SplitSet out;
    if (!j["seed"].is_number_unsigned()) {
        throw ParseError("splits file: seed must be an unsigned integer");
    }
    out.provenance.seed = j["seed"].get<std::uint64_t>();
    out.provenance.alpha = finite_number(j["alpha"], "splits file alpha");
    if (j.contains("dataset_digest")) {
        if (!j["dataset_digest"].is_string()) {
            throw ParseError("splits file: dataset_digest must be a hex string");
        }
        const std::string hex = j["dataset_digest"].get<std::string>();
        try {
            out.provenance.dataset_digest = std::stoull(hex, nullptr, 16);
        } catch (const std::exception&) {
            throw ParseError("splits file: bad dataset_digest \"" + hex + "\"");
        }
    }
    const ordered_json& splits = j["splits"];
    require_keys(splits, {"A", "B", "C", "D"}, {}, "splits object");
    for (SplitId s : kAllSplits) {
        const std::string name(1, split_name(s));
        const ordered_json& half = splits[name];
        require_keys(half, {"train", "test"}, {}, "split " + name);
        out.at(s).train = id_list(half["train"], "split " + name + " train");
        out.at(s).test = id_list(half["test"], "split " + name + " test");
    }
    return out;
}

namespace {

ordered_json phase_to_json(const PhaseMetrics& pm) {
    ordered_json j;
    j["phase"] = pm.phase_index;
    j["train_acc"] = pm.train_accuracy;
    j["test_acc"] = pm.test_accuracy;
    j["mia_auc"] = pm.mia_auc;
    j["member_count"] = pm.member_count;
    j["nonmember_count"] = pm.nonmember_count;
    return j;
}

PhaseMetrics phase_from_json(const ordered_json& j) {
    require_keys(j, {"phase", "train_acc", "test_acc", "mia_auc", "member_count",
                     "nonmember_count"},
                 {}, "phase record");
    PhaseMetrics pm;
    pm.phase_index = j["phase"].get<std::size_t>();
    pm.train_accuracy = finite_number(j["train_acc"], "train_acc");
    pm.test_accuracy = finite_number(j["test_acc"], "test_acc");
    pm.mia_auc = finite_number(j["mia_auc"], "mia_auc");
    pm.member_count = j["member_count"].get<std::size_t>();
    pm.nonmember_count = j["nonmember_count"].get<std::size_t>();
    return pm;
}

SplitOrder order_from_name(const std::string& name) {
    if (name.size() != 4) {
        throw ParseError("bad split order \"" + name + "\"");
    }
    SplitOrder order{};
    std::array<bool, 4> seen = {false, false, false, false};
    for (std::size_t i = 0; i < 4; ++i) {
        const SplitId s = split_from_name(name[i]);
        order[i] = s;
        if (seen[static_cast<std::size_t>(s)]) {
            throw ParseError("split order \"" + name + "\" repeats a split");
        }
        seen[static_cast<std::size_t>(s)] = true;
    }
    return order;
}

ordered_json summary_to_json(const FiveNumberSummary& s) {
    ordered_json j;
    j["min"] = s.min;
    j["q1"] = s.q1;
    j["median"] = s.median;
    j["q3"] = s.q3;
    j["max"] = s.max;
    return j;
}

FiveNumberSummary summary_from_json(const ordered_json& j) {
    require_keys(j, {"min", "q1", "median", "q3", "max"}, {}, "correlation_summary");
    return {finite_number(j["min"], "min"), finite_number(j["q1"], "q1"),
            finite_number(j["median"], "median"), finite_number(j["q3"], "q3"),
            finite_number(j["max"], "max")};
}

}  // namespace

ordered_json drift_report_to_json(const DriftReport& report) {
    ordered_json j;
    j["config_digest"] = report.config_digest;
    j["paradigm"] = paradigm_name(report.paradigm);
    j["client_count"] = report.client_count;
    j["phase_means"] = {{"train_acc", report.mean_train_acc},
                        {"test_acc", report.mean_test_acc},
                        {"mia_auc", report.mean_mia_auc}};
    j["correlation_summary"] = report.correlation_summary
                                   ? summary_to_json(*report.correlation_summary)
                                   : ordered_json(nullptr);
    j["degenerate_count"] = report.degenerate_count;
    j["pooled_pearson"] =
        report.pooled_pearson ? ordered_json(*report.pooled_pearson) : ordered_json(nullptr);
    ordered_json perms = ordered_json::array();
    for (const PermutationResult& p : report.permutations) {
        ordered_json e;
        e["order"] = order_name(p.plan.permutation);
        e["pearson_train_auc"] =
            p.pearson_train_auc ? ordered_json(*p.pearson_train_auc) : ordered_json(nullptr);
        ordered_json phases = ordered_json::array();
        for (const PhaseMetrics& pm : p.phases) {
            phases.push_back(phase_to_json(pm));
        }
        e["phases"] = std::move(phases);
        ordered_json deltas = ordered_json::array();
        for (const DriftDelta& d : p.deltas) {
            ordered_json dj;
            dj["phase"] = d.phase_index;
            dj["delta_auc"] = d.delta_auc;
            dj["delta_train_acc"] = d.delta_train_acc;
            deltas.push_back(std::move(dj));
        }
        e["deltas"] = std::move(deltas);
        perms.push_back(std::move(e));
    }
    j["permutations"] = std::move(perms);
    return j;
}

DriftReport drift_report_from_json(const ordered_json& j) {
    require_keys(j,
                 {"config_digest", "paradigm", "client_count", "phase_means",
                  "correlation_summary", "degenerate_count", "pooled_pearson", "permutations"},
                 {}, "drift report");
    DriftReport report;
    report.config_digest = j["config_digest"].get<std::string>();
    report.paradigm = paradigm_from_name(j["paradigm"].get<std::string>());
    report.client_count = j["client_count"].get<std::size_t>();
    const ordered_json& means = j["phase_means"];
    require_keys(means, {"train_acc", "test_acc", "mia_auc"}, {}, "phase_means");
    for (const char* key : {"train_acc", "test_acc", "mia_auc"}) {
        if (!means[key].is_array() || means[key].size() != 4) {
            throw ParseError(std::string("phase_means.") + key + ": expected 4 numbers");
        }
    }
    for (std::size_t k = 0; k < 4; ++k) {
        report.mean_train_acc[k] = finite_number(means["train_acc"][k], "mean train_acc");
        report.mean_test_acc[k] = finite_number(means["test_acc"][k], "mean test_acc");
        report.mean_mia_auc[k] = finite_number(means["mia_auc"][k], "mean mia_auc");
    }
    if (!j["correlation_summary"].is_null()) {
        report.correlation_summary = summary_from_json(j["correlation_summary"]);
    }
    report.degenerate_count = j["degenerate_count"].get<std::size_t>();
    if (!j["pooled_pearson"].is_null()) {
        report.pooled_pearson = finite_number(j["pooled_pearson"], "pooled_pearson");
    }
    if (!j["permutations"].is_array() || j["permutations"].empty()) {
        throw ParseError("drift report: permutations must be a nonempty array");
    }
    for (const ordered_json& e : j["permutations"]) {
        require_keys(e, {"order", "pearson_train_auc", "phases", "deltas"}, {},
                     "permutation entry");
        PermutationResult p;
        p.plan.permutation = order_from_name(e["order"].get<std::string>());
        p.plan.paradigm = report.paradigm;
        if (!e["pearson_train_auc"].is_null()) {
            p.pearson_train_auc = finite_number(e["pearson_train_auc"], "pearson_train_auc");
        }
        if (!e["phases"].is_array()) {
            throw ParseError("permutation entry: phases must be an array");
        }
        for (const ordered_json& pj : e["phases"]) {
            p.phases.push_back(phase_from_json(pj));
        }
        if (!e["deltas"].is_array()) {
            throw ParseError("permutation entry: deltas must be an array");
        }
        for (const ordered_json& dj : e["deltas"]) {
            require_keys(dj, {"phase", "delta_auc", "delta_train_acc"}, {}, "delta record");
            p.deltas.push_back({dj["phase"].get<std::size_t>(),
                                finite_number(dj["delta_auc"], "delta_auc"),
                                finite_number(dj["delta_train_acc"], "delta_train_acc")});
        }
        report.permutations.push_back(std::move(p));
    }
    return report;
}

std::string drift_report_to_csv(const DriftReport& report) {
    std::string out = "permutation,phase,train_acc,test_acc,mia_auc\n";
    for (const PermutationResult& p : report.permutations) {
        for (const PhaseMetrics& pm : p.phases) {
            out += order_name(p.plan.permutation);
            out += ',';
            out += std::to_string(pm.phase_index);
            out += ',';
            out += format_double(pm.train_accuracy);
            out += ',';
            out += format_double(pm.test_accuracy);
            out += ',';
            out += format_double(pm.mia_auc);
            out += '\n';
        }
    }
    return out;
}

ordered_json round_trace_to_json(const RoundTrace& trace) {
    ordered_json j;
    j["round"] = trace.round_index;
    ordered_json clients = ordered_json::array();
    for (const RoundTrace::ClientEntry& c : trace.clients) {
        ordered_json cj;
        cj["shard_size"] = c.shard_size;
        cj["param_digest"] = to_hex(c.param_digest);
        clients.push_back(std::move(cj));
    }
    j["clients"] = std::move(clients);
    j["aggregate_digest"] = to_hex(trace.aggregate_digest);
    return j;
}

std::string round_traces_to_jsonl(const std::vector<RoundTrace>& traces) {
    std::string out;
    for (const RoundTrace& t : traces) {
        out += round_trace_to_json(t).dump();
        out += '\n';
    }
    return out;
}

}  // namespace driftbench
