#include "driftbench/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "driftbench/errors.hpp"

namespace driftbench {

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) {
        throw DimensionError("pearson: series lengths differ (" + std::to_string(x.size()) +
                             " vs " + std::to_string(y.size()) + ")");
    }
    if (x.size() < 2) {
        throw DimensionError("pearson: need at least 2 points, got " + std::to_string(x.size()));
    }
    const auto is_constant = [](const std::vector<double>& v) {
        const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
        return *lo == *hi;
    };
    if (is_constant(x)) {
        throw DegenerateSeriesError("pearson: first series is constant");
    }
    if (is_constant(y)) {
        throw DegenerateSeriesError("pearson: second series is constant");
    }

    const double n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;

    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = x[i] - mx;
        const double dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    const double r = sxy / std::sqrt(sxx * syy);
    return std::clamp(r, -1.0, 1.0);
}

std::vector<DriftDelta> drift_deltas(const std::vector<PhaseMetrics>& metrics) {
    if (metrics.size() < 2) {
        throw EvaluationError("drift_deltas: need at least 2 phases, got " +
                              std::to_string(metrics.size()));
    }
    std::vector<DriftDelta> out;
    out.reserve(metrics.size() - 1);
    for (std::size_t k = 1; k < metrics.size(); ++k) {
        out.push_back({metrics[k].phase_index,
                       metrics[k].mia_auc - metrics[k - 1].mia_auc,
                       metrics[k].train_accuracy - metrics[k - 1].train_accuracy});
    }
    return out;
}

double quantile_linear(const std::vector<double>& sorted, double p) {
    if (sorted.empty()) {
        throw EvaluationError("quantile_linear: empty sample");
    }
    if (!(p >= 0.0 && p <= 1.0)) {
        throw EvaluationError("quantile_linear: p outside [0, 1]");
    }
    const double h = static_cast<double>(sorted.size() - 1) * p;
    const std::size_t lo = static_cast<std::size_t>(h);
    if (lo + 1 >= sorted.size()) {
        return sorted.back();
    }
    const double frac = h - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

FiveNumberSummary five_number_summary(std::vector<double> values) {
    if (values.empty()) {
        throw EvaluationError("five_number_summary: empty sample");
    }
    std::sort(values.begin(), values.end());
    return {values.front(), quantile_linear(values, 0.25), quantile_linear(values, 0.5),
            quantile_linear(values, 0.75), values.back()};
}

DriftReport aggregate(const std::vector<PermutationRun>& runs, std::size_t client_count,
                      const std::string& config_digest) {
    if (runs.empty()) {
        throw EvaluationError("aggregate: no permutation runs");
    }
    for (const PermutationRun& run : runs) {
        if (run.phases.size() != 4) {
            throw EvaluationError("aggregate: order " + order_name(run.plan.permutation) +
                                  " has " + std::to_string(run.phases.size()) +
                                  " phases, expected 4");
        }
        if (run.plan.paradigm != runs.front().plan.paradigm) {
            throw EvaluationError("aggregate: mixed paradigms; one report covers one paradigm");
        }
    }

    std::vector<PermutationRun> ordered = runs;
    std::stable_sort(ordered.begin(), ordered.end(),
                     [](const PermutationRun& a, const PermutationRun& b) {
                         return order_code(a.plan.permutation) < order_code(b.plan.permutation);
                     });

    DriftReport report;
    report.config_digest = config_digest;
    report.paradigm = ordered.front().plan.paradigm;
    report.client_count = client_count;

    std::vector<double> correlations;
    std::vector<double> pooled_train;
    std::vector<double> pooled_auc;
    for (const PermutationRun& run : ordered) {
        PermutationResult entry;
        entry.plan = run.plan;
        entry.phases = run.phases;
        entry.deltas = drift_deltas(run.phases);

        std::vector<double> train_series;
        std::vector<double> auc_series;
        for (const PhaseMetrics& pm : run.phases) {
            train_series.push_back(pm.train_accuracy);
            auc_series.push_back(pm.mia_auc);
        }
        pooled_train.insert(pooled_train.end(), train_series.begin(), train_series.end());
        pooled_auc.insert(pooled_auc.end(), auc_series.begin(), auc_series.end());
        try {
            entry.pearson_train_auc = pearson(train_series, auc_series);
            correlations.push_back(*entry.pearson_train_auc);
        } catch (const DegenerateSeriesError&) {
            report.degenerate_count += 1;
        }
        report.permutations.push_back(std::move(entry));
    }

    const double count = static_cast<double>(ordered.size());
    for (std::size_t k = 0; k < 4; ++k) {
        double st = 0.0;
        double se = 0.0;
        double sa = 0.0;
        for (const PermutationRun& run : ordered) {
            st += run.phases[k].train_accuracy;
            se += run.phases[k].test_accuracy;
            sa += run.phases[k].mia_auc;
        }
        report.mean_train_acc[k] = st / count;
        report.mean_test_acc[k] = se / count;
        report.mean_mia_auc[k] = sa / count;
    }

    if (!correlations.empty()) {
        report.correlation_summary = five_number_summary(correlations);
    }
    try {
        report.pooled_pearson = pearson(pooled_train, pooled_auc);
    } catch (const DegenerateSeriesError&) {
        report.pooled_pearson = std::nullopt;
    }
    return report;
}

}  // namespace driftbench
