#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "domrisk/gbdt.hpp"

namespace domrisk {

/// Rank-statistic AUC with half credit for ties. O(n log n); equals the
/// probability a random positive outscores a random negative.
double auc(const std::vector<double>& scores, const std::vector<int>& labels);

struct RocPoint {
    double fpr = 0.0;
    double tpr = 0.0;
    double threshold = 0.0;
};

struct RocCurve {
    std::vector<RocPoint> points;  // monotone, begins (0,0), ends (1,1)
    double auc = 0.0;              // trapezoidal integral of the points
};

RocCurve roc_curve(const std::vector<double>& scores, const std::vector<int>& labels);

struct CalibrationBin {
    double bin_low = 0.0;
    double bin_high = 0.0;
    double mean_predicted = 0.0;  // NaN for empty bins
    double empirical_rate = 0.0;  // NaN for empty bins
    size_t count = 0;
};

struct CalibrationTable {
    std::vector<CalibrationBin> bins;
    size_t n_bins = 40;
};

/// Uniform bins over [0,1]; half-open [low, high) with the final bin
/// closed. Scores outside [0,1] are an error.
CalibrationTable calibration(const std::vector<double>& scores, const std::vector<int>& labels,
                             size_t n_bins = 40);

/// Evaluation protocol: within-source CV per positive source against the
/// shared negative pool, combined-source CV, both cross-source directions
/// (fold-mean model on the other source's positives, fold-held-out
/// negative scores), and an optional train-before/score-after date split.
struct ProtocolSpec {
    std::vector<std::string> positive_sources;  // empty = all sources present
    bool run_cross = true;
    int k = 5;
    uint64_t rng_seed = 0;
    std::optional<CivilDate> date_cutoff;
};

struct CurveReport {
    std::string name;  // "vcdb-like->vcdb-like", "combined->combined", ...
    double auc = 0.0;
    RocCurve curve;
};

struct ProtocolReport {
    std::vector<CurveReport> curves;
    /// Out-of-fold scores of the primary model (combined when several
    /// sources are requested, otherwise the single source's CV), for
    /// calibration and score-distribution reporting.
    std::vector<double> primary_scores;
    std::vector<int> primary_labels;
    std::vector<std::string> primary_domains;
};

ProtocolReport protocol_eval(const LabeledDataset& dataset, const TrainParams& params,
                             const ProtocolSpec& spec);

}  // namespace domrisk
