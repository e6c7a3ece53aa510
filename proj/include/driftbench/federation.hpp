#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "driftbench/data.hpp"
#include "driftbench/model.hpp"

namespace driftbench {

struct FederationConfig {
    std::size_t num_clients = 1;
    std::size_t rounds_per_phase = 5;
    std::size_t local_epochs = 2;
    std::size_t batch_size = 32;
};

struct RoundTrace {
    struct ClientEntry {
        std::size_t shard_size = 0;
        std::uint64_t param_digest = 0;  // after local training
    };
    std::size_t round_index = 0;
    std::vector<ClientEntry> clients;
    std::uint64_t aggregate_digest = 0;
};

// Shuffle seed used by `client` in `round` of a phase seeded with phase_seed.
// Exposed so a centralized loop can reproduce the exact same stream.
std::uint64_t round_client_seed(std::uint64_t phase_seed, std::size_t round, std::size_t client);

// One client's round: copy the broadcast model, reset optimizer moments, and
// train local_epochs over the shard. The broadcast model is left untouched.
ModelState local_train(const ModelState& global_model, const std::vector<ExampleId>& shard,
                       const Dataset& dataset, const FederationConfig& cfg,
                       std::uint64_t shuffle_seed);

// Shard-size-weighted mean of the client parameters. Moments are client-local
// state and are reset, never averaged. The per-coordinate terms are summed in
// sorted order, so jointly permuting (models, sizes) cannot change a bit of
// the output; a lone client or bit-identical clients pass through exactly.
ModelState fedavg(const std::vector<ModelState>& client_models,
                  const std::vector<std::size_t>& shard_sizes);

// rounds_per_phase iterations of broadcast -> local_train on every client ->
// fedavg. Shards are fixed for the whole phase; per-(round, client) shuffle
// seeds derive from `seed`. num_clients == 1 degenerates to centralized
// training with per-round moment resets.
std::pair<ModelState, std::vector<RoundTrace>> run_federated_phase(
    const ModelState& global_model, const std::vector<ExampleId>& split_train,
    const Dataset& dataset, const FederationConfig& cfg, std::uint64_t seed);

}  // namespace driftbench
