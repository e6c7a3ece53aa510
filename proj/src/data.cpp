#include "driftbench/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <string>

#include "driftbench/digest.hpp"
#include "driftbench/errors.hpp"
#include "driftbench/rng.hpp"

namespace driftbench {

Dataset Dataset::make(std::vector<LabeledExample> examples, std::size_t num_classes,
                      std::size_t feature_dim) {
    Dataset ds;
    ds.examples = std::move(examples);
    ds.num_classes = num_classes;
    ds.feature_dim = feature_dim;
    ds.index.reserve(ds.examples.size());
    for (std::size_t i = 0; i < ds.examples.size(); ++i) {
        const auto& ex = ds.examples[i];
        if (ex.features.size() != feature_dim) {
            throw DataError("example id " + std::to_string(ex.id) + " has feature length " +
                            std::to_string(ex.features.size()) + ", expected " +
                            std::to_string(feature_dim));
        }
        if (ex.label < 0 || static_cast<std::size_t>(ex.label) >= num_classes) {
            throw DataError("example id " + std::to_string(ex.id) + " has label " +
                            std::to_string(ex.label) + " outside [0, " +
                            std::to_string(num_classes) + ")");
        }
        if (!ds.index.emplace(ex.id, i).second) {
            throw DataError("duplicate example id " + std::to_string(ex.id));
        }
    }
    return ds;
}

const LabeledExample& Dataset::by_id(ExampleId id) const {
    auto it = index.find(id);
    if (it == index.end()) {
        throw DataError("unknown example id " + std::to_string(id));
    }
    return examples[it->second];
}

std::uint64_t Dataset::digest() const {
    Fnv64 d;
    d.feed_u64(num_classes).feed_u64(feature_dim).feed_u64(examples.size());
    for (const auto& ex : examples) {
        d.feed_u64(ex.id);
        d.feed_u64(static_cast<std::uint64_t>(ex.label));
        for (double f : ex.features) {
            d.feed_double(f);
        }
    }
    return d.value();
}

char split_name(SplitId s) { return static_cast<char>('A' + static_cast<int>(s)); }

SplitId split_from_name(char c) {
    if (c < 'A' || c > 'D') {
        throw ParseError(std::string("unknown split name '") + c + "'");
    }
    return static_cast<SplitId>(c - 'A');
}

namespace {

Dataset load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ParseError("cannot open " + path);
    }
    std::vector<LabeledExample> examples;
    std::size_t feature_dim = 0;
    int max_label = -1;
    std::string line;
    std::size_t row = 0;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') {
            line.pop_back();
        }
        if (line.empty()) {
            ++row;
            continue;
        }
        std::vector<std::string> cells;
        std::size_t start = 0;
        while (true) {
            const std::size_t comma = line.find(',', start);
            cells.push_back(line.substr(start, comma - start));
            if (comma == std::string::npos) {
                break;
            }
            start = comma + 1;
        }
        if (cells.size() < 2) {
            throw ParseError(path + ": row " + std::to_string(row) +
                             ": expected a label and at least one feature");
        }
        LabeledExample ex;
        ex.id = examples.size();
        {
            const std::string& cell = cells[0];
            int label = 0;
            auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), label);
            if (ec != std::errc() || p != cell.data() + cell.size()) {
                throw ParseError(path + ": row " + std::to_string(row) + ": bad label '" + cell +
                                 "'");
            }
            if (label < 0) {
                throw DataError(path + ": row " + std::to_string(row) + ": negative label " +
                                std::to_string(label));
            }
            ex.label = label;
            max_label = std::max(max_label, label);
        }
        for (std::size_t i = 1; i < cells.size(); ++i) {
            const std::string& cell = cells[i];
            double v = 0.0;
            auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
            if (ec != std::errc() || p != cell.data() + cell.size() || !std::isfinite(v)) {
                throw ParseError(path + ": row " + std::to_string(row) + ": bad feature '" + cell +
                                 "'");
            }
            ex.features.push_back(v);
        }
        if (examples.empty()) {
            feature_dim = ex.features.size();
        } else if (ex.features.size() != feature_dim) {
            throw ParseError(path + ": row " + std::to_string(row) + ": expected " +
                             std::to_string(feature_dim) + " features, got " +
                             std::to_string(ex.features.size()));
        }
        examples.push_back(std::move(ex));
        ++row;
    }
    if (examples.empty()) {
        throw ParseError(path + ": no examples found");
    }
    return Dataset::make(std::move(examples), static_cast<std::size_t>(max_label) + 1,
                         feature_dim);
}

constexpr std::size_t kCifarRecordBytes = 2 + 3072;
constexpr std::size_t kCifarCoarseClasses = 20;

Dataset load_binary_cifar(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ParseError("cannot open " + path);
    }
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                     std::istreambuf_iterator<char>());
    if (bytes.empty()) {
        throw ParseError(path + ": no records found");
    }
    if (bytes.size() % kCifarRecordBytes != 0) {
        throw ParseError(path + ": file size " + std::to_string(bytes.size()) +
                         " is not a multiple of the " + std::to_string(kCifarRecordBytes) +
                         "-byte record size");
    }
    const std::size_t count = bytes.size() / kCifarRecordBytes;
    std::vector<LabeledExample> examples;
    examples.reserve(count);
    for (std::size_t r = 0; r < count; ++r) {
        const unsigned char* rec = bytes.data() + r * kCifarRecordBytes;
        const unsigned char coarse = rec[0];
        if (coarse >= kCifarCoarseClasses) {
            throw DataError(path + ": record " + std::to_string(r) + ": coarse label " +
                            std::to_string(static_cast<int>(coarse)) + " is outside [0, 20)");
        }
        LabeledExample ex;
        ex.id = r;
        ex.label = coarse;
        ex.features.resize(3072);
        for (std::size_t i = 0; i < 3072; ++i) {
            ex.features[i] = static_cast<double>(rec[2 + i]) / 255.0;
        }
        examples.push_back(std::move(ex));
    }
    return Dataset::make(std::move(examples), kCifarCoarseClasses, 3072);
}

}  // namespace

Dataset load_dataset(const std::string& path, DatasetFormat format) {
    return format == DatasetFormat::csv ? load_csv(path) : load_binary_cifar(path);
}

Dataset synthesize_dataset(std::size_t num_classes, std::size_t per_class,
                           std::size_t feature_dim, double class_separation,
                           std::uint64_t seed) {
    if (num_classes < 2 || per_class == 0 || feature_dim == 0) {
        throw ConfigError("synthesize_dataset: counts must be positive (>= 2 classes)");
    }
    if (!(class_separation > 0.0)) {
        throw ConfigError("synthesize_dataset: class_separation must be positive");
    }

    // Class c gets its mean on axis (c mod dim) at magnitude
    // class_separation * (1 + c / dim); any two means are then at least
    // class_separation apart.
    Rng rng(seed);
    std::vector<LabeledExample> examples;
    examples.reserve(num_classes * per_class);
    ExampleId next_id = 0;
    for (std::size_t c = 0; c < num_classes; ++c) {
        const std::size_t axis = c % feature_dim;
        const double magnitude =
            class_separation * (1.0 + static_cast<double>(c / feature_dim));
        for (std::size_t i = 0; i < per_class; ++i) {
            LabeledExample ex;
            ex.id = next_id++;
            ex.label = static_cast<int>(c);
            ex.features.resize(feature_dim);
            for (std::size_t d = 0; d < feature_dim; ++d) {
                ex.features[d] = rng.normal();
            }
            ex.features[axis] += magnitude;
            examples.push_back(std::move(ex));
        }
    }
    return Dataset::make(std::move(examples), num_classes, feature_dim);
}

Dataset coarsen_labels(const Dataset& dataset, const std::vector<int>& fine_to_coarse) {
    int max_coarse = -1;
    for (int c : fine_to_coarse) {
        max_coarse = std::max(max_coarse, c);
    }
    if (max_coarse < 0) {
        throw ConfigError("coarsen_labels: mapping has no coarse labels");
    }
    const std::size_t k = static_cast<std::size_t>(max_coarse) + 1;
    std::vector<bool> seen(k, false);
    for (int c : fine_to_coarse) {
        if (c >= 0) {
            seen[static_cast<std::size_t>(c)] = true;
        }
    }
    for (std::size_t c = 0; c < k; ++c) {
        if (!seen[c]) {
            throw ConfigError("coarsen_labels: coarse labels are not contiguous; " +
                              std::to_string(c) + " is missing");
        }
    }

    std::vector<LabeledExample> examples = dataset.examples;
    for (auto& ex : examples) {
        if (static_cast<std::size_t>(ex.label) >= fine_to_coarse.size() ||
            fine_to_coarse[static_cast<std::size_t>(ex.label)] < 0) {
            throw DataError("coarsen_labels: fine label " + std::to_string(ex.label) +
                            " (example id " + std::to_string(ex.id) + ") is unmapped");
        }
        ex.label = fine_to_coarse[static_cast<std::size_t>(ex.label)];
    }
    return Dataset::make(std::move(examples), k, dataset.feature_dim);
}

SplitSet partition_noniid(const Dataset& dataset, std::size_t num_splits, double alpha,
                          double test_fraction, std::uint64_t seed) {
    if (num_splits != kAllSplits.size()) {
        throw ConfigError("partition_noniid: exactly 4 splits (A-D) are supported");
    }
    if (!(alpha > 0.0)) {
        throw ConfigError("partition_noniid: alpha must be positive");
    }
    if (!(test_fraction > 0.0) || !(test_fraction < 1.0)) {
        throw ConfigError("partition_noniid: test_fraction must be in (0, 1)");
    }

    // Group ids by class, in dataset order.
    std::vector<std::vector<ExampleId>> by_class(dataset.num_classes);
    for (const auto& ex : dataset.examples) {
        by_class[static_cast<std::size_t>(ex.label)].push_back(ex.id);
    }
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        if (by_class[c].size() < num_splits) {
            throw PartitionError("class " + std::to_string(c) + " has only " +
                                 std::to_string(by_class[c].size()) +
                                 " examples; need at least one per split");
        }
    }

    Rng rng(seed);
    SplitSet out;
    out.provenance = {seed, alpha, dataset.digest()};

    for (std::size_t c = 0; c < by_class.size(); ++c) {
        const std::vector<double> props = rng.dirichlet(alpha, num_splits);

        // Largest-remainder rounding of per-split counts.
        const std::size_t n = by_class[c].size();
        std::vector<std::size_t> counts(num_splits);
        std::vector<std::pair<double, std::size_t>> fractions;  // (-frac, split)
        std::size_t assigned = 0;
        for (std::size_t s = 0; s < num_splits; ++s) {
            const double target = static_cast<double>(n) * props[s];
            counts[s] = static_cast<std::size_t>(std::floor(target));
            assigned += counts[s];
            fractions.emplace_back(-(target - std::floor(target)), s);
        }
        std::sort(fractions.begin(), fractions.end());
        for (std::size_t i = 0; assigned < n; ++i, ++assigned) {
            counts[fractions[i % num_splits].second] += 1;
        }

        std::vector<ExampleId> ids = by_class[c];
        rng.shuffle(ids);

        // Stratified holdout: the slice is already in seeded random order, so
        // the first round(m * test_fraction) ids form the test half.
        std::size_t offset = 0;
        for (std::size_t s = 0; s < num_splits; ++s) {
            const std::size_t m = counts[s];
            const std::size_t t = static_cast<std::size_t>(
                std::llround(static_cast<double>(m) * test_fraction));
            auto& half = out.splits[s];
            for (std::size_t i = 0; i < m; ++i) {
                (i < t ? half.test : half.train).push_back(ids[offset + i]);
            }
            offset += m;
        }
    }

    for (SplitId s : kAllSplits) {
        const auto& half = out.at(s);
        if (half.train.empty() || half.test.empty()) {
            throw PartitionError(std::string("split ") + split_name(s) +
                                 " received an empty train or test half; "
                                 "use a larger dataset or a larger alpha");
        }
    }
    return out;
}

ClientShards shard_for_clients(const std::vector<ExampleId>& split_train,
                               std::size_t num_clients, std::uint64_t seed) {
    if (num_clients == 0) {
        throw ConfigError("shard_for_clients: num_clients must be >= 1");
    }
    if (num_clients > split_train.size()) {
        throw ShardError("cannot shard " + std::to_string(split_train.size()) +
                         " examples across " + std::to_string(num_clients) +
                         " clients; the per-client shard would be empty");
    }

    ClientShards out;
    out.seed = seed;
    out.shards.resize(num_clients);
    if (num_clients == 1) {
        // Input order preserved so the single-client path stays bit-aligned
        // with centralized training on the same id list.
        out.shards[0] = split_train;
        return out;
    }
    std::vector<ExampleId> ids = split_train;
    Rng rng(seed);
    rng.shuffle(ids);
    for (std::size_t i = 0; i < ids.size(); ++i) {
        out.shards[i % num_clients].push_back(ids[i]);
    }
    return out;
}

void validate_splitset(const Dataset& dataset, const SplitSet& splitset) {
    std::set<ExampleId> seen;
    std::size_t total = 0;
    for (SplitId s : kAllSplits) {
        const auto& half = splitset.at(s);
        if (half.train.empty() || half.test.empty()) {
            throw PartitionError(std::string("split ") + split_name(s) +
                                 " has an empty train or test half");
        }
        for (const auto* list : {&half.train, &half.test}) {
            for (ExampleId id : *list) {
                if (!seen.insert(id).second) {
                    throw PartitionError("example id " + std::to_string(id) +
                                         " appears in more than one split list");
                }
                ++total;
            }
        }
    }
    if (total != dataset.size()) {
        throw PartitionError("splits cover " + std::to_string(total) + " ids but the dataset has " +
                             std::to_string(dataset.size()));
    }
    for (ExampleId id : seen) {
        if (dataset.index.find(id) == dataset.index.end()) {
            throw PartitionError("split id " + std::to_string(id) + " is not in the dataset");
        }
    }
}

EvalSet gather(const Dataset& dataset, const std::vector<ExampleId>& ids) {
    EvalSet out;
    out.features = Tensor::zeros({ids.size(), dataset.feature_dim});
    out.labels.resize(ids.size());
    for (std::size_t i = 0; i < ids.size(); ++i) {
        const LabeledExample& ex = dataset.by_id(ids[i]);
        std::copy(ex.features.begin(), ex.features.end(),
                  out.features.values.begin() +
                      static_cast<std::ptrdiff_t>(i * dataset.feature_dim));
        out.labels[i] = ex.label;
    }
    return out;
}

}  // namespace driftbench
