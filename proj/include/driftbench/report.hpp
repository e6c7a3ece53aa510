#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "driftbench/metrics.hpp"

namespace driftbench {

// Linear value -> pixel mapping. Exposed (with the plot scales below) so the
// plot geometry is checkable against report numbers to the exact byte.
struct PlotScale {
    double px0 = 0.0;
    double px1 = 0.0;
    double v0 = 0.0;
    double v1 = 1.0;

    constexpr double at(double v) const { return px0 + (v - v0) / (v1 - v0) * (px1 - px0); }
};

// Line plots: phases 0..3 on x, metric values in [0, 1] on y (y pixels grow
// downward, so the pixel range is inverted).
inline constexpr PlotScale kLineX{70.0, 600.0, 0.0, 3.0};
inline constexpr PlotScale kLineY{350.0, 45.0, 0.0, 1.0};

// Box plot: Pearson values in [-1, 1] on y.
inline constexpr PlotScale kBoxY{350.0, 45.0, -1.0, 1.0};

// Center x of the i-th box slot.
double box_center_x(std::size_t index);

// Three series (train accuracy, test accuracy, membership AUC) over the four
// phases of one permutation.
std::string render_line_plot_svg(const PermutationResult& result, Paradigm paradigm,
                                 std::size_t client_count);

// One box per report (grouped by client count, then paradigm), drawn from the
// report's five-number correlation summary. Reports whose summary is missing
// get a label but no box.
std::string render_box_plot_svg(const std::vector<DriftReport>& reports);

// Fixed-width correlation-summary table, one row per report.
std::string correlation_table(const std::vector<DriftReport>& reports);

// Parses every report_*.json under results_dir, sorted by (client count,
// paradigm). Throws ReportError when the directory is missing, holds no
// reports, or a file does not parse.
std::vector<DriftReport> load_reports(const std::filesystem::path& results_dir);

// Renders everything before writing anything: per-permutation line plots and
// the correlation box plot under <results_dir>/plots/, and the table to
// `out`.
void cmd_report(const std::filesystem::path& results_dir, std::ostream& out);

}  // namespace driftbench
