#include "driftbench/report.hpp"

#include <algorithm>
#include <cstdio>

#include "driftbench/errors.hpp"
#include "driftbench/serialize.hpp"
#include "driftbench/textio.hpp"

namespace driftbench {

namespace {

namespace fs = std::filesystem;

constexpr double kBoxSlotWidth = 90.0;
constexpr double kBoxHalfWidth = 25.0;
constexpr double kWhiskerHalfWidth = 15.0;

std::string num(double v) {
    return format_double(v);
}

std::string svg_line(double x1, double y1, double x2, double y2, const std::string& stroke,
                     const std::string& extra = "") {
    return "<line x1=\"" + num(x1) + "\" y1=\"" + num(y1) + "\" x2=\"" + num(x2) + "\" y2=\"" +
           num(y2) + "\" stroke=\"" + stroke + "\"" + extra + "/>\n";
}

std::string svg_text(double x, double y, const std::string& anchor, int size,
                     const std::string& content, const std::string& extra = "") {
    return "<text x=\"" + num(x) + "\" y=\"" + num(y) + "\" text-anchor=\"" + anchor +
           "\" font-family=\"sans-serif\" font-size=\"" + std::to_string(size) + "\"" + extra +
           ">" + content + "</text>\n";
}

std::string svg_open(double width, double height) {
    return "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) + "\" height=\"" +
           num(height) + "\" viewBox=\"0 0 " + num(width) + " " + num(height) + "\">\n" +
           "<rect width=\"" + num(width) + "\" height=\"" + num(height) +
           "\" fill=\"white\"/>\n";
}

struct Series {
    const char* label;
    const char* color;
};

constexpr Series kSeries[3] = {{"train accuracy", "#1f77b4"},
                               {"test accuracy", "#2ca02c"},
                               {"membership AUC", "#d62728"}};

double series_value(const PhaseMetrics& pm, std::size_t series) {
    switch (series) {
        case 0: return pm.train_accuracy;
        case 1: return pm.test_accuracy;
        default: return pm.mia_auc;
    }
}

}  // namespace

double box_center_x(std::size_t index) {
    return 125.0 + kBoxSlotWidth * static_cast<double>(index);
}

std::string render_line_plot_svg(const PermutationResult& result, Paradigm paradigm,
                                 std::size_t client_count) {
    std::string svg = svg_open(640, 400);
    svg += svg_text(320, 25, "middle", 15,
                    paradigm_name(paradigm) + ", " + std::to_string(client_count) +
                        (client_count == 1 ? " client" : " clients") + ", order " +
                        order_name(result.plan.permutation));

    svg += svg_line(kLineX.px0, kLineY.px0, kLineX.px1, kLineY.px0, "black");
    svg += svg_line(kLineX.px0, kLineY.px0, kLineX.px0, kLineY.px1, "black");
    for (int tick = 0; tick <= 4; ++tick) {
        const double v = 0.25 * tick;
        const double y = kLineY.at(v);
        svg += svg_line(kLineX.px0 - 5, y, kLineX.px0, y, "black");
        svg += svg_text(kLineX.px0 - 9, y + 4, "end", 11, num(v));
    }
    for (int phase = 0; phase < 4; ++phase) {
        const double x = kLineX.at(phase);
        svg += svg_line(x, kLineY.px0, x, kLineY.px0 + 5, "black");
        svg += svg_text(x, kLineY.px0 + 20, "middle", 11, std::to_string(phase));
    }
    svg += svg_text((kLineX.px0 + kLineX.px1) / 2, 385, "middle", 12, "phase");

    for (std::size_t s = 0; s < 3; ++s) {
        std::string points;
        for (const PhaseMetrics& pm : result.phases) {
            points += num(kLineX.at(static_cast<double>(pm.phase_index)));
            points += ',';
            points += num(kLineY.at(series_value(pm, s)));
            points += ' ';
        }
        if (!points.empty()) {
            points.pop_back();
        }
        svg += "<polyline points=\"" + points + "\" fill=\"none\" stroke=\"" +
               kSeries[s].color + "\" stroke-width=\"2\"/>\n";
        const double ly = 55.0 + 18.0 * static_cast<double>(s);
        svg += svg_line(455, ly - 4, 485, ly - 4, kSeries[s].color,
                        " stroke-width=\"2\"");
        svg += svg_text(490, ly, "start", 11, kSeries[s].label);
    }
    svg += "</svg>\n";
    return svg;
}

std::string render_box_plot_svg(const std::vector<DriftReport>& reports) {
    if (reports.empty()) {
        throw ReportError("render_box_plot_svg: no reports");
    }
    const double width = 170.0 + kBoxSlotWidth * static_cast<double>(reports.size());
    std::string svg = svg_open(width, 400);
    svg += svg_text(width / 2, 25, "middle", 15,
                    "Pearson(train accuracy, membership AUC) per permutation");

    svg += svg_line(60, kBoxY.px1, 60, kBoxY.px0, "black");
    for (int tick = -4; tick <= 4; ++tick) {
        const double v = 0.25 * tick;
        const double y = kBoxY.at(v);
        svg += svg_line(55, y, 60, y, "black");
        svg += svg_text(51, y + 4, "end", 11, num(v));
    }
    svg += svg_line(60, kBoxY.at(0.0), width - 20, kBoxY.at(0.0), "#999999",
                    " stroke-dasharray=\"4 3\"");

    for (std::size_t i = 0; i < reports.size(); ++i) {
        const DriftReport& report = reports[i];
        const double cx = box_center_x(i);
        svg += svg_text(cx, 372, "middle", 11, paradigm_name(report.paradigm));
        svg += svg_text(cx, 388, "middle", 11,
                        std::to_string(report.client_count) +
                            (report.client_count == 1 ? " client" : " clients"));
        if (!report.correlation_summary) {
            svg += svg_text(cx, kBoxY.at(0.0) - 8, "middle", 11, "(degenerate)");
            continue;
        }
        const FiveNumberSummary& s = *report.correlation_summary;
        svg += svg_line(cx, kBoxY.at(s.min), cx, kBoxY.at(s.q1), "black");
        svg += svg_line(cx, kBoxY.at(s.q3), cx, kBoxY.at(s.max), "black");
        svg += svg_line(cx - kWhiskerHalfWidth, kBoxY.at(s.min), cx + kWhiskerHalfWidth,
                        kBoxY.at(s.min), "black");
        svg += svg_line(cx - kWhiskerHalfWidth, kBoxY.at(s.max), cx + kWhiskerHalfWidth,
                        kBoxY.at(s.max), "black");
        svg += "<rect x=\"" + num(cx - kBoxHalfWidth) + "\" y=\"" + num(kBoxY.at(s.q3)) +
               "\" width=\"" + num(2 * kBoxHalfWidth) + "\" height=\"" +
               num(kBoxY.at(s.q1) - kBoxY.at(s.q3)) +
               "\" fill=\"#aec7e8\" stroke=\"black\"/>\n";
        svg += svg_line(cx - kBoxHalfWidth, kBoxY.at(s.median), cx + kBoxHalfWidth,
                        kBoxY.at(s.median), "black", " stroke-width=\"2\"");
    }
    svg += "</svg>\n";
    return svg;
}

std::string correlation_table(const std::vector<DriftReport>& reports) {
    const auto field = [](const std::optional<double>& v) {
        if (!v) {
            return std::string("       -");
        }
        char buf[16];
        std::snprintf(buf, sizeof(buf), "%8.4f", *v);
        return std::string(buf);
    };
    std::string out =
        "paradigm  clients  perms  degenerate      min       q1   median       q3      max"
        "   pooled\n";
    char row[256];
    for (const DriftReport& report : reports) {
        std::optional<double> mn, q1, md, q3, mx;
        if (report.correlation_summary) {
            const FiveNumberSummary& s = *report.correlation_summary;
            mn = s.min;
            q1 = s.q1;
            md = s.median;
            q3 = s.q3;
            mx = s.max;
        }
        std::snprintf(row, sizeof(row), "%-8s  %7zu  %5zu  %10zu %s %s %s %s %s %s\n",
                      paradigm_name(report.paradigm).c_str(), report.client_count,
                      report.permutations.size(), report.degenerate_count, field(mn).c_str(),
                      field(q1).c_str(), field(md).c_str(), field(q3).c_str(),
                      field(mx).c_str(), field(report.pooled_pearson).c_str());
        out += row;
    }
    return out;
}

std::vector<DriftReport> load_reports(const fs::path& results_dir) {
    if (!fs::is_directory(results_dir)) {
        throw ReportError("results directory " + results_dir.string() + " does not exist");
    }
    std::vector<fs::path> files;
    for (const fs::directory_entry& entry : fs::directory_iterator(results_dir)) {
        if (!entry.is_regular_file()) {
            continue;
        }
        const std::string name = entry.path().filename().string();
        if (name.rfind("report_", 0) == 0 && entry.path().extension() == ".json") {
            files.push_back(entry.path());
        }
    }
    if (files.empty()) {
        throw ReportError("no report_*.json files under " + results_dir.string());
    }
    std::sort(files.begin(), files.end());

    std::vector<DriftReport> reports;
    for (const fs::path& file : files) {
        try {
            const ordered_json j = ordered_json::parse(read_file(file));
            reports.push_back(drift_report_from_json(j));
        } catch (const Error&) {
            rethrow_annotated(file.string() + ": ");
        } catch (const std::exception& e) {
            throw ReportError(file.string() + ": " + e.what());
        }
    }
    std::sort(reports.begin(), reports.end(), [](const DriftReport& a, const DriftReport& b) {
        if (a.client_count != b.client_count) {
            return a.client_count < b.client_count;
        }
        return static_cast<int>(a.paradigm) < static_cast<int>(b.paradigm);
    });
    return reports;
}

void cmd_report(const fs::path& results_dir, std::ostream& out) {
    const std::vector<DriftReport> reports = load_reports(results_dir);

    std::vector<std::pair<std::string, std::string>> files;
    for (const DriftReport& report : reports) {
        for (const PermutationResult& p : report.permutations) {
            const std::string name = "plot_" + paradigm_name(report.paradigm) + "_c" +
                                     std::to_string(report.client_count) + "_" +
                                     order_name(p.plan.permutation) + ".svg";
            files.emplace_back(name,
                               render_line_plot_svg(p, report.paradigm, report.client_count));
        }
    }
    files.emplace_back("boxplot_correlations.svg", render_box_plot_svg(reports));
    const std::string table = correlation_table(reports);

    for (const auto& [name, content] : files) {
        write_file_atomic(results_dir / "plots" / name, content);
    }
    out << table;
}

}  // namespace driftbench
