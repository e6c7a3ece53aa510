#include "driftbench/config.hpp"

#include <cmath>
#include <set>

#include "driftbench/digest.hpp"
#include "driftbench/errors.hpp"
#include "driftbench/rng.hpp"
#include "driftbench/serialize.hpp"
#include "driftbench/textio.hpp"
#include "driftbench/toml_lite.hpp"

namespace driftbench {

namespace {

using json = nlohmann::ordered_json;

void check_keys(const json& obj, const std::set<std::string>& allowed, const std::string& where) {
    if (!obj.is_object()) {
        throw ConfigError(where + ": expected a table/object");
    }
    for (const auto& item : obj.items()) {
        if (!allowed.count(item.key())) {
            throw ConfigError(where + ": unknown key \"" + item.key() + "\"");
        }
    }
}

std::uint64_t get_u64(const json& obj, const char* key, std::uint64_t fallback,
                      const std::string& where) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const json& v = obj[key];
    if (v.is_number_unsigned()) {
        return v.get<std::uint64_t>();
    }
    if (v.is_number_integer() && v.get<std::int64_t>() >= 0) {
        return static_cast<std::uint64_t>(v.get<std::int64_t>());
    }
    throw ConfigError(where + "." + key + ": expected a non-negative integer");
}

std::size_t get_size(const json& obj, const char* key, std::size_t fallback,
                     const std::string& where, std::size_t min_value) {
    const std::uint64_t v = get_u64(obj, key, fallback, where);
    if (v < min_value) {
        throw ConfigError(where + "." + key + ": must be >= " + std::to_string(min_value));
    }
    return static_cast<std::size_t>(v);
}

double get_double(const json& obj, const char* key, double fallback, const std::string& where) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const json& v = obj[key];
    if (!v.is_number()) {
        throw ConfigError(where + "." + key + ": expected a number");
    }
    const double d = v.get<double>();
    if (!std::isfinite(d)) {
        throw ConfigError(where + "." + key + ": must be finite");
    }
    return d;
}

std::string get_string(const json& obj, const char* key, const std::string& fallback,
                       const std::string& where) {
    if (!obj.contains(key)) {
        return fallback;
    }
    if (!obj[key].is_string()) {
        throw ConfigError(where + "." + key + ": expected a string");
    }
    return obj[key].get<std::string>();
}

std::vector<std::size_t> get_size_array(const json& obj, const char* key,
                                        std::vector<std::size_t> fallback,
                                        const std::string& where, std::size_t min_value) {
    if (!obj.contains(key)) {
        return fallback;
    }
    const json& v = obj[key];
    if (!v.is_array()) {
        throw ConfigError(where + "." + key + ": expected an array of integers");
    }
    std::vector<std::size_t> out;
    for (const json& e : v) {
        std::uint64_t u = 0;
        if (e.is_number_unsigned()) {
            u = e.get<std::uint64_t>();
        } else if (e.is_number_integer() && e.get<std::int64_t>() >= 0) {
            u = static_cast<std::uint64_t>(e.get<std::int64_t>());
        } else {
            throw ConfigError(where + "." + key + ": elements must be non-negative integers");
        }
        if (u < min_value) {
            throw ConfigError(where + "." + key + ": elements must be >= " +
                              std::to_string(min_value));
        }
        out.push_back(static_cast<std::size_t>(u));
    }
    return out;
}

DatasetFormat format_from_name(const std::string& name) {
    if (name == "csv") {
        return DatasetFormat::csv;
    }
    if (name == "binary_cifar") {
        return DatasetFormat::binary_cifar;
    }
    throw ConfigError("dataset.format: unknown format \"" + name +
                      "\" (expected csv or binary_cifar)");
}

const char* format_name(DatasetFormat f) {
    return f == DatasetFormat::csv ? "csv" : "binary_cifar";
}

Activation activation_from_name(const std::string& name) {
    if (name == "relu") {
        return Activation::relu;
    }
    if (name == "tanh") {
        return Activation::tanh;
    }
    throw ConfigError("model.activation: unknown activation \"" + name +
                      "\" (expected relu or tanh)");
}

OptimizerKind optimizer_from_name(const std::string& name) {
    if (name == "sgd") {
        return OptimizerKind::sgd;
    }
    if (name == "adam") {
        return OptimizerKind::adam;
    }
    throw ConfigError("model.optimizer: unknown optimizer \"" + name +
                      "\" (expected sgd or adam)");
}

}  // namespace

ExperimentConfig parse_config(const nlohmann::ordered_json& j) {
    check_keys(j,
               {"dataset", "coarsen", "partition", "schedule", "federation", "model", "attack",
                "out_dir"},
               "config");
    ExperimentConfig cfg;

    if (j.contains("dataset")) {
        const json& d = j["dataset"];
        const std::string source = get_string(d, "source", "synthetic", "dataset");
        if (source == "synthetic") {
            check_keys(d,
                       {"source", "num_classes", "per_class", "feature_dim", "class_separation",
                        "seed"},
                       "dataset");
            cfg.dataset.synthetic = true;
            SynthesisParams& sp = cfg.dataset.synthesis;
            sp.num_classes = get_size(d, "num_classes", sp.num_classes, "dataset", 2);
            sp.per_class = get_size(d, "per_class", sp.per_class, "dataset", 1);
            sp.feature_dim = get_size(d, "feature_dim", sp.feature_dim, "dataset", 1);
            sp.class_separation =
                get_double(d, "class_separation", sp.class_separation, "dataset");
            if (sp.class_separation <= 0.0) {
                throw ConfigError("dataset.class_separation: must be positive");
            }
            sp.seed = get_u64(d, "seed", sp.seed, "dataset");
        } else if (source == "file") {
            check_keys(d, {"source", "path", "format"}, "dataset");
            cfg.dataset.synthetic = false;
            cfg.dataset.path = get_string(d, "path", "", "dataset");
            if (cfg.dataset.path.empty()) {
                throw ConfigError("dataset.path: required when source is \"file\"");
            }
            cfg.dataset.format = format_from_name(get_string(d, "format", "csv", "dataset"));
        } else {
            throw ConfigError("dataset.source: expected \"synthetic\" or \"file\", got \"" +
                              source + "\"");
        }
    }

    if (j.contains("coarsen")) {
        const json& c = j["coarsen"];
        if (!c.is_array()) {
            throw ConfigError("coarsen: expected an array of coarse labels");
        }
        for (const json& e : c) {
            if (!e.is_number_integer() && !e.is_number_unsigned()) {
                throw ConfigError("coarsen: entries must be integers (-1 = unmapped)");
            }
            const std::int64_t v = e.get<std::int64_t>();
            if (v < -1) {
                throw ConfigError("coarsen: entries must be >= -1");
            }
            cfg.coarsen.push_back(static_cast<int>(v));
        }
    }

    if (j.contains("partition")) {
        const json& p = j["partition"];
        check_keys(p, {"alpha", "test_fraction", "seed"}, "partition");
        cfg.partition.alpha = get_double(p, "alpha", cfg.partition.alpha, "partition");
        if (cfg.partition.alpha <= 0.0) {
            throw ConfigError("partition.alpha: must be positive");
        }
        cfg.partition.test_fraction =
            get_double(p, "test_fraction", cfg.partition.test_fraction, "partition");
        if (cfg.partition.test_fraction <= 0.0 || cfg.partition.test_fraction >= 1.0) {
            throw ConfigError("partition.test_fraction: must be in (0, 1)");
        }
        cfg.partition.seed = get_u64(p, "seed", cfg.partition.seed, "partition");
    }

    if (j.contains("schedule")) {
        const json& s = j["schedule"];
        check_keys(s, {"permutation_count", "paradigms", "seed"}, "schedule");
        cfg.schedule.permutation_count =
            get_size(s, "permutation_count", cfg.schedule.permutation_count, "schedule", 1);
        if (cfg.schedule.permutation_count > 24) {
            throw ConfigError("schedule.permutation_count: must be <= 24");
        }
        if (s.contains("paradigms")) {
            if (!s["paradigms"].is_array() || s["paradigms"].empty()) {
                throw ConfigError("schedule.paradigms: expected a nonempty array");
            }
            cfg.schedule.paradigms.clear();
            for (const json& e : s["paradigms"]) {
                if (!e.is_string()) {
                    throw ConfigError("schedule.paradigms: entries must be strings");
                }
                const Paradigm p = paradigm_from_name(e.get<std::string>());
                for (Paradigm seen : cfg.schedule.paradigms) {
                    if (seen == p) {
                        throw ConfigError("schedule.paradigms: duplicate \"" +
                                          paradigm_name(p) + "\"");
                    }
                }
                cfg.schedule.paradigms.push_back(p);
            }
        }
        cfg.schedule.seed = get_u64(s, "seed", cfg.schedule.seed, "schedule");
    }

    if (j.contains("federation")) {
        const json& f = j["federation"];
        check_keys(f, {"client_counts", "rounds_per_phase", "local_epochs", "batch_size"},
                   "federation");
        cfg.federation.client_counts = get_size_array(f, "client_counts",
                                                      cfg.federation.client_counts,
                                                      "federation", 1);
        if (cfg.federation.client_counts.empty()) {
            throw ConfigError("federation.client_counts: must be nonempty");
        }
        {
            std::set<std::size_t> seen;
            for (std::size_t c : cfg.federation.client_counts) {
                if (!seen.insert(c).second) {
                    throw ConfigError("federation.client_counts: duplicate count " +
                                      std::to_string(c));
                }
            }
        }
        cfg.federation.rounds_per_phase =
            get_size(f, "rounds_per_phase", cfg.federation.rounds_per_phase, "federation", 1);
        cfg.federation.local_epochs =
            get_size(f, "local_epochs", cfg.federation.local_epochs, "federation", 1);
        cfg.federation.batch_size =
            get_size(f, "batch_size", cfg.federation.batch_size, "federation", 1);
    }

    if (j.contains("model")) {
        const json& m = j["model"];
        check_keys(m,
                   {"hidden_dims", "activation", "optimizer", "learning_rate", "beta1", "beta2",
                    "epsilon"},
                   "model");
        cfg.model.hidden_dims =
            get_size_array(m, "hidden_dims", cfg.model.hidden_dims, "model", 1);
        cfg.model.activation =
            activation_from_name(get_string(m, "activation", "relu", "model"));
        cfg.model.optimizer = optimizer_from_name(get_string(m, "optimizer", "adam", "model"));
        OptimizerHyper& h = cfg.model.hyper;
        h.learning_rate = get_double(m, "learning_rate", h.learning_rate, "model");
        h.beta1 = get_double(m, "beta1", h.beta1, "model");
        h.beta2 = get_double(m, "beta2", h.beta2, "model");
        h.epsilon = get_double(m, "epsilon", h.epsilon, "model");
        if (h.learning_rate <= 0.0) {
            throw ConfigError("model.learning_rate: must be positive");
        }
        if (h.beta1 < 0.0 || h.beta1 >= 1.0 || h.beta2 < 0.0 || h.beta2 >= 1.0) {
            throw ConfigError("model.beta1/beta2: must be in [0, 1)");
        }
        if (h.epsilon <= 0.0) {
            throw ConfigError("model.epsilon: must be positive");
        }
    }

    if (j.contains("attack")) {
        const json& a = j["attack"];
        check_keys(a, {"per_side_cap", "seed"}, "attack");
        cfg.attack.per_side_cap =
            get_size(a, "per_side_cap", cfg.attack.per_side_cap, "attack", 1);
        cfg.attack.seed = get_u64(a, "seed", cfg.attack.seed, "attack");
    }

    if (j.contains("out_dir")) {
        if (!j["out_dir"].is_string() || j["out_dir"].get<std::string>().empty()) {
            throw ConfigError("out_dir: expected a nonempty string");
        }
        cfg.out_dir = j["out_dir"].get<std::string>();
    }
    return cfg;
}

ExperimentConfig load_config_file(const std::filesystem::path& path) {
    const std::string text = read_file(path);
    const std::string ext = path.extension().string();
    json tree;
    if (ext == ".json") {
        try {
            tree = json::parse(text);
        } catch (const std::exception& e) {
            throw ParseError(path.string() + ": " + e.what());
        }
    } else if (ext == ".toml") {
        try {
            tree = parse_toml_lite(text);
        } catch (...) {
            rethrow_annotated(path.string() + ": ");
        }
    } else {
        throw ConfigError(path.string() + ": config files must end in .json or .toml");
    }
    try {
        return parse_config(tree);
    } catch (...) {
        rethrow_annotated(path.string() + ": ");
    }
}

nlohmann::ordered_json effective_config_json(const ExperimentConfig& cfg) {
    json j;
    json d;
    if (cfg.dataset.synthetic) {
        d["source"] = "synthetic";
        d["num_classes"] = cfg.dataset.synthesis.num_classes;
        d["per_class"] = cfg.dataset.synthesis.per_class;
        d["feature_dim"] = cfg.dataset.synthesis.feature_dim;
        d["class_separation"] = cfg.dataset.synthesis.class_separation;
        d["seed"] = cfg.dataset.synthesis.seed;
    } else {
        d["source"] = "file";
        d["path"] = cfg.dataset.path;
        d["format"] = format_name(cfg.dataset.format);
    }
    j["dataset"] = std::move(d);
    j["coarsen"] = cfg.coarsen;
    j["partition"] = {{"alpha", cfg.partition.alpha},
                      {"test_fraction", cfg.partition.test_fraction},
                      {"seed", cfg.partition.seed}};
    json paradigms = json::array();
    for (Paradigm p : cfg.schedule.paradigms) {
        paradigms.push_back(paradigm_name(p));
    }
    j["schedule"] = {{"permutation_count", cfg.schedule.permutation_count},
                     {"paradigms", std::move(paradigms)},
                     {"seed", cfg.schedule.seed}};
    j["federation"] = {{"client_counts", cfg.federation.client_counts},
                       {"rounds_per_phase", cfg.federation.rounds_per_phase},
                       {"local_epochs", cfg.federation.local_epochs},
                       {"batch_size", cfg.federation.batch_size}};
    j["model"] = {{"hidden_dims", cfg.model.hidden_dims},
                  {"activation", cfg.model.activation == Activation::relu ? "relu" : "tanh"},
                  {"optimizer", cfg.model.optimizer == OptimizerKind::sgd ? "sgd" : "adam"},
                  {"learning_rate", cfg.model.hyper.learning_rate},
                  {"beta1", cfg.model.hyper.beta1},
                  {"beta2", cfg.model.hyper.beta2},
                  {"epsilon", cfg.model.hyper.epsilon}};
    j["attack"] = {{"per_side_cap", cfg.attack.per_side_cap}, {"seed", cfg.attack.seed}};
    j["out_dir"] = cfg.out_dir;
    return j;
}

std::string config_digest(const ExperimentConfig& cfg) {
    // out_dir is where results land, not what the experiment computes; two
    // runs of one experiment into different directories share a digest.
    nlohmann::ordered_json j = effective_config_json(cfg);
    j.erase("out_dir");
    Fnv64 fnv;
    fnv.feed_string(dump_json(j));
    return fnv.hex();
}

void apply_seed_override(ExperimentConfig& cfg, std::uint64_t seed) {
    cfg.dataset.synthesis.seed = seed_mix(seed, {0});
    cfg.partition.seed = seed_mix(seed, {1});
    cfg.schedule.seed = seed_mix(seed, {2});
    cfg.attack.seed = seed_mix(seed, {3});
}

}  // namespace driftbench
