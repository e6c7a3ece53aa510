#pragma once

#include <stdexcept>
#include <string>

namespace driftbench {

// Base class for everything the workbench throws on purpose.
struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Invalid experiment or module configuration (bad dimensions, counts, enums).
struct ConfigError : Error {
    using Error::Error;
};

// Tensor / batch shape mismatch.
struct DimensionError : Error {
    using Error::Error;
};

// Bad example data: out-of-range label, empty training set, unmapped label.
struct DataError : Error {
    using Error::Error;
};

// Malformed input file (CSV row, binary record, config syntax).
struct ParseError : Error {
    using Error::Error;
};

// Non-IID partitioning produced an empty train or test half.
struct PartitionError : Error {
    using Error::Error;
};

// Client sharding failure (more clients than examples, empty shard).
struct ShardError : Error {
    using Error::Error;
};

// FedAvg input mismatch.
struct AggregationError : Error {
    using Error::Error;
};

// Membership-inference evaluation failure (empty pool, single-class records).
struct EvaluationError : Error {
    using Error::Error;
};

// Pearson correlation over a zero-variance or too-short series.
struct DegenerateSeriesError : Error {
    using Error::Error;
};

// Missing or corrupt results when building a report.
struct ReportError : Error {
    using Error::Error;
};

// Re-throws the active exception with `prefix` prepended, preserving the
// concrete error type for the taxonomy above.
[[noreturn]] void rethrow_annotated(const std::string& prefix);

}  // namespace driftbench
