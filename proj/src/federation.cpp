#include "driftbench/federation.hpp"

#include <algorithm>
#include <string>

#include "driftbench/errors.hpp"
#include "driftbench/rng.hpp"

namespace driftbench {

namespace {

constexpr std::uint64_t kShardStream = 1;
constexpr std::uint64_t kTrainStream = 2;

bool same_arch(const ArchitectureSpec& a, const ArchitectureSpec& b) {
    return a.input_dim == b.input_dim && a.hidden_dims == b.hidden_dims &&
           a.num_classes == b.num_classes && a.activation == b.activation;
}

bool same_params(const std::vector<LayerTensors>& a, const std::vector<LayerTensors>& b) {
    if (a.size() != b.size()) {
        return false;
    }
    for (std::size_t l = 0; l < a.size(); ++l) {
        if (a[l].weight.values != b[l].weight.values || a[l].bias.values != b[l].bias.values) {
            return false;
        }
    }
    return true;
}

// Weighted sum with the terms in ascending order: the result is a function of
// the term multiset only, so client order cannot perturb the low bits.
void average_into(std::vector<double>& out, const std::vector<const Tensor*>& tensors,
                  const std::vector<std::size_t>& sizes, double total) {
    std::vector<double> terms(tensors.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (std::size_t c = 0; c < tensors.size(); ++c) {
            terms[c] = static_cast<double>(sizes[c]) * tensors[c]->values[i];
        }
        std::sort(terms.begin(), terms.end());
        double sum = 0.0;
        for (double t : terms) {
            sum += t;
        }
        out[i] = sum / total;
    }
}

}  // namespace

std::uint64_t round_client_seed(std::uint64_t phase_seed, std::size_t round, std::size_t client) {
    return seed_mix(phase_seed, {kTrainStream, round, client});
}

ModelState local_train(const ModelState& global_model, const std::vector<ExampleId>& shard,
                       const Dataset& dataset, const FederationConfig& cfg,
                       std::uint64_t shuffle_seed) {
    if (shard.empty()) {
        throw ShardError("local_train: shard is empty");
    }
    ModelState model = global_model;
    reset_optimizer(model);
    const EvalSet set = gather(dataset, shard);
    return train_epochs(std::move(model), set.features, set.labels, cfg.local_epochs,
                        cfg.batch_size, shuffle_seed);
}

ModelState fedavg(const std::vector<ModelState>& client_models,
                  const std::vector<std::size_t>& shard_sizes) {
    if (client_models.empty()) {
        throw AggregationError("fedavg: no client models");
    }
    if (client_models.size() != shard_sizes.size()) {
        throw AggregationError("fedavg: " + std::to_string(client_models.size()) +
                               " models but " + std::to_string(shard_sizes.size()) +
                               " shard sizes");
    }
    for (std::size_t c = 0; c < client_models.size(); ++c) {
        if (shard_sizes[c] == 0) {
            throw AggregationError("fedavg: client " + std::to_string(c) +
                                   " has shard size 0");
        }
        if (!same_arch(client_models[c].arch, client_models.front().arch)) {
            throw AggregationError("fedavg: client " + std::to_string(c) +
                                   " architecture differs from client 0");
        }
    }

    ModelState out = client_models.front();
    reset_optimizer(out);
    if (client_models.size() == 1) {
        return out;
    }

    bool all_equal = true;
    for (std::size_t c = 1; c < client_models.size() && all_equal; ++c) {
        all_equal = same_params(client_models[c].params, client_models.front().params);
    }
    if (all_equal) {
        return out;
    }

    std::size_t total_size = 0;
    for (std::size_t s : shard_sizes) {
        total_size += s;
    }
    const double total = static_cast<double>(total_size);

    std::vector<const Tensor*> tensors(client_models.size());
    for (std::size_t l = 0; l < out.params.size(); ++l) {
        for (std::size_t c = 0; c < client_models.size(); ++c) {
            tensors[c] = &client_models[c].params[l].weight;
        }
        average_into(out.params[l].weight.values, tensors, shard_sizes, total);
        for (std::size_t c = 0; c < client_models.size(); ++c) {
            tensors[c] = &client_models[c].params[l].bias;
        }
        average_into(out.params[l].bias.values, tensors, shard_sizes, total);
        check_finite(out.params[l].weight, "fedavg weight");
        check_finite(out.params[l].bias, "fedavg bias");
    }
    return out;
}

std::pair<ModelState, std::vector<RoundTrace>> run_federated_phase(
    const ModelState& global_model, const std::vector<ExampleId>& split_train,
    const Dataset& dataset, const FederationConfig& cfg, std::uint64_t seed) {
    if (cfg.rounds_per_phase == 0) {
        throw ConfigError("run_federated_phase: rounds_per_phase must be >= 1");
    }
    const ClientShards shards =
        shard_for_clients(split_train, cfg.num_clients, seed_mix(seed, {kShardStream}));
    std::vector<std::size_t> sizes(shards.shards.size());
    for (std::size_t c = 0; c < shards.shards.size(); ++c) {
        if (shards.shards[c].empty()) {
            throw ShardError("run_federated_phase: client " + std::to_string(c) +
                             " received an empty shard");
        }
        sizes[c] = shards.shards[c].size();
    }

    ModelState global = global_model;
    std::vector<RoundTrace> traces;
    traces.reserve(cfg.rounds_per_phase);
    for (std::size_t r = 0; r < cfg.rounds_per_phase; ++r) {
        RoundTrace trace;
        trace.round_index = r;
        std::vector<ModelState> locals;
        locals.reserve(cfg.num_clients);
        for (std::size_t c = 0; c < cfg.num_clients; ++c) {
            ModelState local =
                local_train(global, shards.shards[c], dataset, cfg, round_client_seed(seed, r, c));
            trace.clients.push_back({sizes[c], param_digest(local)});
            locals.push_back(std::move(local));
        }
        global = fedavg(locals, sizes);
        trace.aggregate_digest = param_digest(global);
        traces.push_back(std::move(trace));
    }
    return {std::move(global), std::move(traces)};
}

}  // namespace driftbench
