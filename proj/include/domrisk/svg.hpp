#pragma once

#include <string>
#include <vector>

#include "domrisk/evaluation.hpp"

namespace domrisk {

/// Minimal SVG line-chart emission for ROC curves, calibration plots and
/// score histograms. Data-only rendering; styling is fixed.
struct SvgSeries {
    std::string label;
    std::vector<std::pair<double, double>> points;
};

std::string render_line_chart(const std::string& title, const std::string& x_label,
                              const std::string& y_label, const std::vector<SvgSeries>& series,
                              bool diagonal_reference);

std::string render_roc_svg(const std::vector<std::pair<std::string, RocCurve>>& curves);
std::string render_calibration_svg(const CalibrationTable& table);
std::string render_score_histogram_svg(const std::vector<double>& scores,
                                       const std::vector<int>& labels, size_t n_bins = 40);

}  // namespace domrisk
