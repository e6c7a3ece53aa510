#include "driftbench/runner.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <thread>

#include "driftbench/errors.hpp"
#include "driftbench/federation.hpp"
#include "driftbench/metrics.hpp"
#include "driftbench/rng.hpp"
#include "driftbench/serialize.hpp"
#include "driftbench/textio.hpp"
#include "driftbench/version.hpp"

namespace driftbench {

namespace {

namespace fs = std::filesystem;

// Seed streams derived from schedule.seed. The phase stream mixes in the
// order code and phase but deliberately not the paradigm or client count:
// paradigms must see identical models, and sharding alone separates client
// counts.
constexpr std::uint64_t kInitStream = 0;
constexpr std::uint64_t kPhaseStream = 1;

struct Cell {
    Paradigm paradigm = Paradigm::uniform;
    std::size_t clients = 0;
    SplitOrder order = kAllSplits;
};

struct CellResult {
    bool ok = false;
    std::string error;
    std::vector<PhaseMetrics> phases;
    std::vector<std::vector<RoundTrace>> phase_traces;  // indexed by phase
};

std::string cell_stem(const Cell& cell) {
    return paradigm_name(cell.paradigm) + "_c" + std::to_string(cell.clients) + "_" +
           order_name(cell.order);
}

}  // namespace

Dataset build_dataset(const ExperimentConfig& cfg) {
    Dataset dataset;
    if (cfg.dataset.synthetic) {
        const SynthesisParams& sp = cfg.dataset.synthesis;
        dataset = synthesize_dataset(sp.num_classes, sp.per_class, sp.feature_dim,
                                     sp.class_separation, sp.seed);
    } else {
        dataset = load_dataset(cfg.dataset.path, cfg.dataset.format);
    }
    if (!cfg.coarsen.empty()) {
        dataset = coarsen_labels(dataset, cfg.coarsen);
    }
    return dataset;
}

SplitSet build_splitset(const ExperimentConfig& cfg, const Dataset& dataset) {
    SplitSet splitset = partition_noniid(dataset, 4, cfg.partition.alpha,
                                         cfg.partition.test_fraction, cfg.partition.seed);
    validate_splitset(dataset, splitset);
    return splitset;
}

void cmd_partition(const ExperimentConfig& cfg) {
    const Dataset dataset = build_dataset(cfg);
    const SplitSet splitset = build_splitset(cfg, dataset);
    const fs::path out_dir = cfg.out_dir;
    write_file_atomic(out_dir / "splits.json", dump_json(splitset_to_json(splitset)));

    std::vector<std::array<std::size_t, 4>> counts(dataset.num_classes, {0, 0, 0, 0});
    for (SplitId s : kAllSplits) {
        const SplitHalves& halves = splitset.at(s);
        for (const std::vector<ExampleId>* ids : {&halves.train, &halves.test}) {
            for (ExampleId id : *ids) {
                counts[static_cast<std::size_t>(dataset.by_id(id).label)]
                      [static_cast<std::size_t>(s)] += 1;
            }
        }
    }
    std::string csv = "class,A,B,C,D\n";
    for (std::size_t c = 0; c < counts.size(); ++c) {
        csv += std::to_string(c);
        for (std::size_t s = 0; s < 4; ++s) {
            csv += ',';
            csv += std::to_string(counts[c][s]);
        }
        csv += '\n';
    }
    write_file_atomic(out_dir / "class_histogram.csv", csv);
}

RunOutcome cmd_run(const ExperimentConfig& cfg, std::size_t jobs) {
    const auto started = std::chrono::steady_clock::now();
    if (jobs == 0) {
        throw ConfigError("cmd_run: jobs must be >= 1");
    }
    const Dataset dataset = build_dataset(cfg);
    const SplitSet splitset = build_splitset(cfg, dataset);
    const std::vector<SplitOrder> orders =
        enumerate_permutations(cfg.schedule.permutation_count, cfg.schedule.seed);

    ScheduleConfig sched;
    sched.arch = {dataset.feature_dim, cfg.model.hidden_dims, dataset.num_classes,
                  cfg.model.activation};
    sched.optimizer = cfg.model.optimizer;
    sched.hyper = cfg.model.hyper;
    sched.init_seed = seed_mix(cfg.schedule.seed, {kInitStream});
    sched.attack_seed = cfg.attack.seed;
    sched.attack_per_side_cap = cfg.attack.per_side_cap;

    std::vector<Cell> cells;
    for (Paradigm p : cfg.schedule.paradigms) {
        for (std::size_t k : cfg.federation.client_counts) {
            for (const SplitOrder& order : orders) {
                cells.push_back({p, k, order});
            }
        }
    }

    std::vector<CellResult> results(cells.size());
    std::atomic<std::size_t> next{0};
    const auto worker = [&]() {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= cells.size()) {
                return;
            }
            const Cell& cell = cells[i];
            CellResult& res = results[i];
            try {
                const FederationConfig fed{cell.clients, cfg.federation.rounds_per_phase,
                                           cfg.federation.local_epochs,
                                           cfg.federation.batch_size};
                res.phase_traces.resize(4);
                const PhaseTrainer trainer = [&](ModelState model,
                                                 const std::vector<ExampleId>& ids,
                                                 std::size_t phase) {
                    auto [trained, traces] = run_federated_phase(
                        model, ids, dataset, fed,
                        seed_mix(cfg.schedule.seed,
                                 {kPhaseStream, order_code(cell.order), phase}));
                    res.phase_traces[phase] = std::move(traces);
                    return trained;
                };
                res.phases = run_incremental(sched, dataset, splitset,
                                             {cell.order, cell.paradigm}, trainer);
                res.ok = true;
            } catch (const std::exception& e) {
                res.ok = false;
                res.error = e.what();
            }
        }
    };
    const std::size_t thread_count = std::min(jobs, cells.size());
    if (thread_count <= 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(thread_count);
        for (std::size_t t = 0; t < thread_count; ++t) {
            pool.emplace_back(worker);
        }
        for (std::thread& t : pool) {
            t.join();
        }
    }

    const fs::path out_dir = cfg.out_dir;
    const std::string digest = config_digest(cfg);
    RunOutcome outcome;
    outcome.out_dir = out_dir;
    std::vector<std::string> outputs;

    std::string metrics = "paradigm,clients,permutation,phase,train_acc,test_acc,mia_auc\n";
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!results[i].ok) {
            continue;
        }
        for (const PhaseMetrics& pm : results[i].phases) {
            metrics += paradigm_name(cells[i].paradigm);
            metrics += ',';
            metrics += std::to_string(cells[i].clients);
            metrics += ',';
            metrics += order_name(cells[i].order);
            metrics += ',';
            metrics += std::to_string(pm.phase_index);
            metrics += ',';
            metrics += format_double(pm.train_accuracy);
            metrics += ',';
            metrics += format_double(pm.test_accuracy);
            metrics += ',';
            metrics += format_double(pm.mia_auc);
            metrics += '\n';
        }
    }
    write_file_atomic(out_dir / "metrics.csv", metrics);
    outputs.push_back("metrics.csv");

    for (Paradigm p : cfg.schedule.paradigms) {
        for (std::size_t k : cfg.federation.client_counts) {
            std::vector<PermutationRun> runs;
            for (std::size_t i = 0; i < cells.size(); ++i) {
                if (results[i].ok && cells[i].paradigm == p && cells[i].clients == k) {
                    runs.push_back({{cells[i].order, p}, results[i].phases});
                }
            }
            if (runs.empty()) {
                continue;
            }
            const DriftReport report = aggregate(runs, k, digest);
            const std::string stem =
                "report_" + paradigm_name(p) + "_c" + std::to_string(k);
            write_file_atomic(out_dir / (stem + ".json"),
                              dump_json(drift_report_to_json(report)));
            write_file_atomic(out_dir / (stem + ".csv"), drift_report_to_csv(report));
            outputs.push_back(stem + ".json");
            outputs.push_back(stem + ".csv");
        }
    }

    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (!results[i].ok) {
            continue;
        }
        std::string jsonl;
        for (std::size_t phase = 0; phase < results[i].phase_traces.size(); ++phase) {
            for (const RoundTrace& trace : results[i].phase_traces[phase]) {
                ordered_json line;
                line["phase"] = phase;
                const ordered_json tj = round_trace_to_json(trace);
                for (const auto& item : tj.items()) {
                    line[item.key()] = item.value();
                }
                jsonl += line.dump();
                jsonl += '\n';
            }
        }
        const std::string rel = "traces/" + cell_stem(cells[i]) + ".jsonl";
        write_file_atomic(out_dir / rel, jsonl);
        outputs.push_back(rel);
    }

    ordered_json manifest;
    manifest["tool_version"] = kToolVersion;
    manifest["config_digest"] = digest;
    manifest["effective_config"] = effective_config_json(cfg);
    manifest["outputs"] = outputs;
    ordered_json cell_rows = ordered_json::array();
    for (std::size_t i = 0; i < cells.size(); ++i) {
        ordered_json row;
        row["paradigm"] = paradigm_name(cells[i].paradigm);
        row["clients"] = cells[i].clients;
        row["order"] = order_name(cells[i].order);
        row["status"] = results[i].ok ? "ok" : "error";
        if (!results[i].ok) {
            row["error"] = results[i].error;
            outcome.all_ok = false;
            outcome.failures.push_back({paradigm_name(cells[i].paradigm), cells[i].clients,
                                        order_name(cells[i].order), results[i].error});
        }
        cell_rows.push_back(std::move(row));
    }
    manifest["cells"] = std::move(cell_rows);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - started;
    manifest["duration_seconds"] = elapsed.count();
    write_file_atomic(out_dir / "manifest.json", dump_json(manifest));
    return outcome;
}

}  // namespace driftbench
