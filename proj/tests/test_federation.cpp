#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "driftbench/data.hpp"
#include "driftbench/errors.hpp"
#include "driftbench/federation.hpp"
#include "driftbench/model.hpp"
#include "driftbench/rng.hpp"

using namespace driftbench;

namespace {

const Dataset& fixture_dataset() {
    static const Dataset ds = synthesize_dataset(3, 60, 4, 3.0, 99);
    return ds;
}

std::vector<ExampleId> ids_range(ExampleId lo, ExampleId hi) {
    std::vector<ExampleId> ids;
    for (ExampleId i = lo; i < hi; ++i) {
        ids.push_back(i);
    }
    return ids;
}

// A scalar-free way to pin every parameter of a model to one constant.
ModelState constant_model(double value, std::uint64_t seed = 1) {
    ModelState m = init_model({2, {}, 2, Activation::relu}, seed, OptimizerKind::sgd);
    for (LayerTensors& layer : m.params) {
        std::fill(layer.weight.values.begin(), layer.weight.values.end(), value);
        std::fill(layer.bias.values.begin(), layer.bias.values.end(), value);
    }
    return m;
}

bool params_equal(const ModelState& a, const ModelState& b) {
    if (a.params.size() != b.params.size()) {
        return false;
    }
    for (std::size_t l = 0; l < a.params.size(); ++l) {
        if (a.params[l].weight.values != b.params[l].weight.values ||
            a.params[l].bias.values != b.params[l].bias.values) {
            return false;
        }
    }
    return true;
}

}  // namespace

TEST_CASE("local training copies the broadcast model and resets moments") {
    const Dataset& ds = fixture_dataset();
    const ModelState global = init_model({4, {8}, 3, Activation::relu}, 5);
    const std::uint64_t before = param_digest(global);
    FederationConfig cfg;
    cfg.local_epochs = 2;
    cfg.batch_size = 16;

    const std::vector<ExampleId> shard = ids_range(0, 40);
    const ModelState a = local_train(global, shard, ds, cfg, 77);
    CHECK(param_digest(global) == before);  // broadcast model untouched
    CHECK(param_digest(a) != before);

    const ModelState b = local_train(global, shard, ds, cfg, 77);
    CHECK(param_digest(a) == param_digest(b));
    const ModelState c = local_train(global, shard, ds, cfg, 78);
    CHECK(param_digest(a) != param_digest(c));

    FederationConfig idle = cfg;
    idle.local_epochs = 0;
    CHECK(param_digest(local_train(global, shard, ds, idle, 77)) == before);

    CHECK_THROWS_AS(local_train(global, {}, ds, cfg, 77), ShardError);
}

TEST_CASE("a lone client's round equals plain centralized training") {
    const Dataset& ds = fixture_dataset();
    ModelState global = init_model({4, {8}, 3, Activation::relu}, 6);
    // Give the global model stale moments so the reset matters.
    const EvalSet warm = gather(ds, ids_range(0, 30));
    global = train_epochs(std::move(global), warm.features, warm.labels, 1, 16, 1);

    FederationConfig cfg;
    cfg.local_epochs = 3;
    cfg.batch_size = 16;
    const std::vector<ExampleId> shard = ids_range(20, 90);

    const ModelState federated = local_train(global, shard, ds, cfg, 55);

    ModelState central = global;
    reset_optimizer(central);
    const EvalSet es = gather(ds, shard);
    central = train_epochs(std::move(central), es.features, es.labels, 3, 16, 55);

    CHECK(param_digest(federated) == param_digest(central));
}

TEST_CASE("averaging identical clients is the identity on parameters") {
    const ModelState m = init_model({4, {8}, 3, Activation::relu}, 7);
    const ModelState avg = fedavg({m, m, m}, {10, 20, 30});
    CHECK(params_equal(avg, m));
    CHECK(avg.optimizer_state.step_count == 0);
}

TEST_CASE("opposite parameters cancel to exact zeros") {
    const ModelState avg = fedavg({constant_model(0.125), constant_model(-0.125)}, {7, 7});
    for (const LayerTensors& layer : avg.params) {
        for (double v : layer.weight.values) {
            CHECK(v == 0.0);
        }
        for (double v : layer.bias.values) {
            CHECK(v == 0.0);
        }
    }
}

TEST_CASE("the weighted mean of 3,6,9 with sizes 1,2,3 is exactly 7") {
    const std::vector<ModelState> clients = {constant_model(3.0), constant_model(6.0),
                                             constant_model(9.0)};
    const ModelState avg = fedavg(clients, {1, 2, 3});
    for (const LayerTensors& layer : avg.params) {
        for (double v : layer.weight.values) {
            CHECK(v == 7.0);
        }
        for (double v : layer.bias.values) {
            CHECK(v == 7.0);
        }
    }
}

TEST_CASE("client order cannot change a bit of the aggregate") {
    Rng rng(404);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<ModelState> clients;
        std::vector<std::size_t> sizes;
        const std::size_t k = 2 + rng.below(5);
        for (std::size_t c = 0; c < k; ++c) {
            clients.push_back(init_model({3, {5}, 2, Activation::tanh}, rng.next_u64()));
            sizes.push_back(1 + rng.below(50));
        }
        const ModelState base = fedavg(clients, sizes);

        std::vector<std::size_t> perm(k);
        std::iota(perm.begin(), perm.end(), 0);
        rng.shuffle(perm);
        std::vector<ModelState> shuffled_clients;
        std::vector<std::size_t> shuffled_sizes;
        for (std::size_t idx : perm) {
            shuffled_clients.push_back(clients[idx]);
            shuffled_sizes.push_back(sizes[idx]);
        }
        const ModelState permuted = fedavg(shuffled_clients, shuffled_sizes);
        CHECK(params_equal(base, permuted));
    }
}

TEST_CASE("the aggregate is the definitional weighted mean") {
    Rng rng(505);
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<ModelState> clients;
        std::vector<std::size_t> sizes;
        for (std::size_t c = 0; c < 4; ++c) {
            clients.push_back(init_model({3, {6}, 3, Activation::relu}, rng.next_u64()));
            sizes.push_back(1 + rng.below(30));
        }
        const ModelState avg = fedavg(clients, sizes);

        const double total = static_cast<double>(sizes[0] + sizes[1] + sizes[2] + sizes[3]);
        for (std::size_t l = 0; l < avg.params.size(); ++l) {
            for (std::size_t i = 0; i < avg.params[l].weight.values.size(); ++i) {
                long double acc = 0.0L;
                for (std::size_t c = 0; c < 4; ++c) {
                    acc += static_cast<long double>(sizes[c]) *
                           clients[c].params[l].weight.values[i];
                }
                const double expected = static_cast<double>(acc) / total;
                CHECK(avg.params[l].weight.values[i] ==
                      doctest::Approx(expected).epsilon(1e-12));
            }
        }
    }
}

TEST_CASE("equal shard sizes reduce to the unweighted mean") {
    std::vector<ModelState> clients;
    for (std::uint64_t s = 0; s < 3; ++s) {
        clients.push_back(init_model({3, {4}, 2, Activation::relu}, 100 + s));
    }
    const ModelState avg = fedavg(clients, {13, 13, 13});
    for (std::size_t l = 0; l < avg.params.size(); ++l) {
        for (std::size_t i = 0; i < avg.params[l].weight.values.size(); ++i) {
            const double mean = (clients[0].params[l].weight.values[i] +
                                 clients[1].params[l].weight.values[i] +
                                 clients[2].params[l].weight.values[i]) /
                                3.0;
            CHECK(avg.params[l].weight.values[i] == doctest::Approx(mean).epsilon(1e-12));
        }
    }
}

TEST_CASE("averaging rejects malformed inputs") {
    const ModelState a = init_model({3, {4}, 2, Activation::relu}, 1);
    const ModelState b = init_model({3, {5}, 2, Activation::relu}, 2);  // different arch
    CHECK_THROWS_AS(fedavg({}, {}), AggregationError);
    CHECK_THROWS_AS(fedavg({a, a}, {1}), AggregationError);
    CHECK_THROWS_AS(fedavg({a, a}, {1, 0}), AggregationError);
    CHECK_THROWS_AS(fedavg({a, b}, {1, 1}), AggregationError);
}

TEST_CASE("a federated phase reports one trace per round") {
    const Dataset& ds = fixture_dataset();
    const ModelState global = init_model({4, {8}, 3, Activation::relu}, 8);
    FederationConfig cfg;
    cfg.num_clients = 3;
    cfg.rounds_per_phase = 4;
    cfg.local_epochs = 1;
    cfg.batch_size = 16;

    const std::vector<ExampleId> split_train = ids_range(0, 90);
    const auto [model, traces] = run_federated_phase(global, split_train, ds, cfg, 31);

    REQUIRE(traces.size() == 4);
    for (std::size_t r = 0; r < 4; ++r) {
        CHECK(traces[r].round_index == r);
        REQUIRE(traces[r].clients.size() == 3);
        std::size_t total = 0;
        for (const auto& entry : traces[r].clients) {
            CHECK(entry.shard_size == 30);
            total += entry.shard_size;
        }
        CHECK(total == 90);
    }
    CHECK(traces.back().aggregate_digest == param_digest(model));
    CHECK(model.optimizer_state.step_count == 0);  // aggregate carries no moments

    const auto [model2, traces2] = run_federated_phase(global, split_train, ds, cfg, 31);
    CHECK(param_digest(model2) == param_digest(model));
    for (std::size_t r = 0; r < 4; ++r) {
        CHECK(traces2[r].aggregate_digest == traces[r].aggregate_digest);
    }

    FederationConfig bad = cfg;
    bad.rounds_per_phase = 0;
    CHECK_THROWS_AS(run_federated_phase(global, split_train, ds, bad, 31), ConfigError);
    bad = cfg;
    bad.num_clients = 91;
    CHECK_THROWS_AS(run_federated_phase(global, split_train, ds, bad, 31), ShardError);
}

TEST_CASE("one client federation is bit-equal to a centralized loop") {
    const Dataset& ds = fixture_dataset();
    Rng rng(747);
    for (int trial = 0; trial < 5; ++trial) {
        const ModelState global =
            init_model({4, {static_cast<std::size_t>(4 + rng.below(8))}, 3, Activation::relu},
                       rng.next_u64());
        FederationConfig cfg;
        cfg.num_clients = 1;
        cfg.rounds_per_phase = 1 + rng.below(4);
        cfg.local_epochs = 1 + rng.below(3);
        cfg.batch_size = 8 + rng.below(24);
        const std::uint64_t seed = rng.next_u64();
        const std::vector<ExampleId> split_train = ids_range(0, 60 + rng.below(100));

        const auto [federated, traces] =
            run_federated_phase(global, split_train, ds, cfg, seed);

        ModelState central = global;
        const EvalSet es = gather(ds, split_train);
        for (std::size_t r = 0; r < cfg.rounds_per_phase; ++r) {
            reset_optimizer(central);
            central = train_epochs(std::move(central), es.features, es.labels,
                                   cfg.local_epochs, cfg.batch_size,
                                   round_client_seed(seed, r, 0));
        }
        CHECK(param_digest(federated) == param_digest(central));
        CHECK(traces.size() == cfg.rounds_per_phase);
    }
}

TEST_CASE("a two-client round aggregates independently trained locals") {
    const Dataset& ds = fixture_dataset();
    const ModelState global = init_model({4, {8}, 3, Activation::relu}, 12);
    FederationConfig cfg;
    cfg.num_clients = 2;
    cfg.rounds_per_phase = 1;
    cfg.local_epochs = 2;
    cfg.batch_size = 16;
    const std::vector<ExampleId> split_train = ids_range(0, 70);
    const std::uint64_t seed = 13;

    const auto [model, traces] = run_federated_phase(global, split_train, ds, cfg, seed);

    // Reproduce both locals by hand from the exposed seed streams.
    const ClientShards shards = shard_for_clients(split_train, 2, seed_mix(seed, {1}));
    std::vector<ModelState> locals;
    std::vector<std::size_t> sizes;
    for (std::size_t c = 0; c < 2; ++c) {
        locals.push_back(
            local_train(global, shards.shards[c], ds, cfg, round_client_seed(seed, 0, c)));
        sizes.push_back(shards.shards[c].size());
    }
    REQUIRE(traces.size() == 1);
    CHECK(traces[0].clients[0].param_digest == param_digest(locals[0]));
    CHECK(traces[0].clients[1].param_digest == param_digest(locals[1]));

    const ModelState expected = fedavg(locals, sizes);
    CHECK(param_digest(model) == param_digest(expected));

    // And against a plain long-double weighted mean.
    const double total = static_cast<double>(sizes[0] + sizes[1]);
    for (std::size_t l = 0; l < model.params.size(); ++l) {
        for (std::size_t i = 0; i < model.params[l].weight.values.size(); ++i) {
            const long double acc =
                static_cast<long double>(sizes[0]) * locals[0].params[l].weight.values[i] +
                static_cast<long double>(sizes[1]) * locals[1].params[l].weight.values[i];
            CHECK(model.params[l].weight.values[i] ==
                  doctest::Approx(static_cast<double>(acc) / total).epsilon(1e-12));
        }
    }
}
