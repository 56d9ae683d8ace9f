#include "domrisk/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <sstream>

namespace domrisk {

namespace {

constexpr double kWidth = 640, kHeight = 480;
constexpr double kMarginLeft = 60, kMarginRight = 20, kMarginTop = 40, kMarginBottom = 50;

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728",
                          "#9467bd", "#8c564b", "#e377c2", "#7f7f7f"};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

struct Scale {
    double x_min, x_max, y_min, y_max;
    double px(double x) const {
        return kMarginLeft + (x - x_min) / (x_max - x_min) * (kWidth - kMarginLeft - kMarginRight);
    }
    double py(double y) const {
        return kHeight - kMarginBottom -
               (y - y_min) / (y_max - y_min) * (kHeight - kMarginTop - kMarginBottom);
    }
};

}  // namespace

std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label, const std::vector<SvgSeries>& series,
                              bool diagonal_reference) {
    Scale sc{0.0, 1.0, 0.0, 1.0};
    for (const auto& s : series) {
        for (const auto& [x, y] : s.points) {
            if (std::isnan(x) || std::isnan(y)) continue;
            sc.x_max = std::max(sc.x_max, x);
            sc.y_max = std::max(sc.y_max, y);
        }
    }

    std::ostringstream out;
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kWidth << "\" height=\""
        << kHeight << "\" viewBox=\"0 0 " << kWidth << " " << kHeight << "\">\n";
    out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out << "<text x=\"" << kWidth / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
        << title << "</text>\n";

    // axes with ticks at 0, .25, .5, .75, 1 of each range
    out << "<g stroke=\"#333\" stroke-width=\"1\">\n";
    out << "<line x1=\"" << sc.px(sc.x_min) << "\" y1=\"" << sc.py(sc.y_min) << "\" x2=\""
        << sc.px(sc.x_max) << "\" y2=\"" << sc.py(sc.y_min) << "\"/>\n";
    out << "<line x1=\"" << sc.px(sc.x_min) << "\" y1=\"" << sc.py(sc.y_min) << "\" x2=\""
        << sc.px(sc.x_min) << "\" y2=\"" << sc.py(sc.y_max) << "\"/>\n";
    out << "</g>\n";
    for (int t = 0; t <= 4; ++t) {
        double fx = sc.x_min + (sc.x_max - sc.x_min) * t / 4.0;
        double fy = sc.y_min + (sc.y_max - sc.y_min) * t / 4.0;
        out << "<text x=\"" << sc.px(fx) << "\" y=\"" << kHeight - kMarginBottom + 18
            << "\" text-anchor=\"middle\" font-size=\"11\">" << fmt(fx) << "</text>\n";
        out << "<text x=\"" << kMarginLeft - 8 << "\" y=\"" << sc.py(fy) + 4
            << "\" text-anchor=\"end\" font-size=\"11\">" << fmt(fy) << "</text>\n";
    }
    out << "<text x=\"" << kWidth / 2 << "\" y=\"" << kHeight - 12
        << "\" text-anchor=\"middle\" font-size=\"13\">" << x_label << "</text>\n";
    out << "<text x=\"16\" y=\"" << kHeight / 2
        << "\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 "
        << kHeight / 2 << ")\">" << y_label << "</text>\n";

    if (diagonal_reference) {
        out << "<line x1=\"" << sc.px(sc.x_min) << "\" y1=\"" << sc.py(sc.y_min) << "\" x2=\""
            << sc.px(std::min(sc.x_max, sc.y_max)) << "\" y2=\""
            << sc.py(std::min(sc.x_max, sc.y_max))
            << "\" stroke=\"#999\" stroke-dasharray=\"5,5\"/>\n";
    }

    for (size_t s = 0; s < series.size(); ++s) {
        const char* color = kPalette[s % 8];
        out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.8\" points=\"";
        for (const auto& [x, y] : series[s].points) {
            if (std::isnan(x) || std::isnan(y)) continue;
            out << fmt(sc.px(x)) << "," << fmt(sc.py(y)) << " ";
        }
        out << "\"/>\n";
        out << "<text x=\"" << kWidth - kMarginRight - 8 << "\" y=\""
            << kMarginTop + 16 * static_cast<double>(s + 1)
            << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << color << "\">"
            << series[s].label << "</text>\n";
    }
    out << "</svg>\n";
    return out.str();
}

std::string render_roc_svg(const std::vector<std::pair<std::string, RocCurve>>& curves) {
    std::vector<SvgSeries> series;
    for (const auto& [name, curve] : curves) {
        SvgSeries s;
        char label[160];
        std::snprintf(label, sizeof(label), "%s (AUC %.3f)", name.c_str(), curve.auc);
        s.label = label;
        for (const auto& p : curve.points) s.points.push_back({p.fpr, p.tpr});
        series.push_back(std::move(s));
    }
    return render_line_chart("ROC", "false positive rate", "true positive rate", series, true);
}

std::string render_calibration_svg(const CalibrationTable& table) {
    SvgSeries s;
    s.label = "calibration";
    for (const auto& bin : table.bins) {
        if (bin.count == 0) continue;
        s.points.push_back({bin.mean_predicted, bin.empirical_rate});
    }
    return render_line_chart("Calibration", "estimated probability", "empirical probability",
                             {s}, true);
}

std::string render_score_histogram_svg(const std::vector<double>& scores,
                                       const std::vector<int>& labels, size_t n_bins) {
    std::vector<double> pos(n_bins, 0.0), neg(n_bins, 0.0);
    for (size_t i = 0; i < scores.size(); ++i) {
        size_t b = std::min(static_cast<size_t>(scores[i] * static_cast<double>(n_bins)),
                            n_bins - 1);
        (labels[i] == 1 ? pos : neg)[b] += 1.0;
    }
    auto to_series = [&](const std::vector<double>& counts, const std::string& label) {
        SvgSeries s;
        s.label = label;
        for (size_t b = 0; b < n_bins; ++b)
            s.points.push_back(
                {(static_cast<double>(b) + 0.5) / static_cast<double>(n_bins), counts[b]});
        return s;
    };
    return render_line_chart("Score distribution", "score", "count",
                             {to_series(pos, "positives"), to_series(neg, "negatives")}, false);
}

}  // namespace domrisk
