#include "driftbench/errors.hpp"

namespace driftbench {

void rethrow_annotated(const std::string& prefix) {
    try {
        throw;
    } catch (const ConfigError& e) {
        throw ConfigError(prefix + e.what());
    } catch (const DimensionError& e) {
        throw DimensionError(prefix + e.what());
    } catch (const DataError& e) {
        throw DataError(prefix + e.what());
    } catch (const ParseError& e) {
        throw ParseError(prefix + e.what());
    } catch (const PartitionError& e) {
        throw PartitionError(prefix + e.what());
    } catch (const ShardError& e) {
        throw ShardError(prefix + e.what());
    } catch (const AggregationError& e) {
        throw AggregationError(prefix + e.what());
    } catch (const EvaluationError& e) {
        throw EvaluationError(prefix + e.what());
    } catch (const DegenerateSeriesError& e) {
        throw DegenerateSeriesError(prefix + e.what());
    } catch (const ReportError& e) {
        throw ReportError(prefix + e.what());
    } catch (const Error& e) {
        throw Error(prefix + e.what());
    } catch (const std::exception& e) {
        throw Error(prefix + e.what());
    }
}

}  // namespace driftbench
