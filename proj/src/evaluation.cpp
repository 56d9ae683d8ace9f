#include "domrisk/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <set>

namespace domrisk {

namespace {

void check_two_classes(const std::vector<double>& scores, const std::vector<int>& labels) {
    if (scores.size() != labels.size())
        throw DomriskError("scores and labels must have equal length");
    size_t positives = static_cast<size_t>(std::count(labels.begin(), labels.end(), 1));
    if (positives == 0 || positives == labels.size())
        throw DomriskError("metric requires both classes present");
}

}  // namespace

double auc(const std::vector<double>& scores, const std::vector<int>& labels) {
    check_two_classes(scores, labels);
    const size_t n = scores.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return scores[a] < scores[b]; });

    // average ranks over tie groups; sum positive ranks
    double positive_rank_sum = 0.0;
    size_t n_pos = 0;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        double avg_rank = static_cast<double>(i + 1 + j) / 2.0;  // ranks are 1-based
        for (size_t t = i; t < j; ++t) {
            if (labels[order[t]] == 1) {
                positive_rank_sum += avg_rank;
                ++n_pos;
            }
        }
        i = j;
    }
    size_t n_neg = n - n_pos;
    return (positive_rank_sum - static_cast<double>(n_pos) * (n_pos + 1) / 2.0) /
           (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

RocCurve roc_curve(const std::vector<double>& scores, const std::vector<int>& labels) {
    check_two_classes(scores, labels);
    const size_t n = scores.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return scores[a] > scores[b]; });

    double n_pos = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
    double n_neg = static_cast<double>(n) - n_pos;

    RocCurve curve;
    curve.points.push_back(RocPoint{0.0, 0.0, std::numeric_limits<double>::infinity()});
    size_t tp = 0, fp = 0;
    size_t i = 0;
    while (i < n) {
        size_t j = i;
        while (j < n && scores[order[j]] == scores[order[i]]) ++j;
        for (size_t t = i; t < j; ++t) {
            if (labels[order[t]] == 1) ++tp;
            else ++fp;
        }
        curve.points.push_back(RocPoint{static_cast<double>(fp) / n_neg,
                                        static_cast<double>(tp) / n_pos, scores[order[i]]});
        i = j;
    }
    // trapezoidal integral
    double area = 0.0;
    for (size_t p = 1; p < curve.points.size(); ++p) {
        double dx = curve.points[p].fpr - curve.points[p - 1].fpr;
        area += dx * (curve.points[p].tpr + curve.points[p - 1].tpr) / 2.0;
    }
    curve.auc = area;
    return curve;
}

CalibrationTable calibration(const std::vector<double>& scores, const std::vector<int>& labels,
                             size_t n_bins) {
    if (scores.size() != labels.size())
        throw DomriskError("scores and labels must have equal length");
    if (n_bins == 0) throw DomriskError("calibration needs at least one bin");

    CalibrationTable table;
    table.n_bins = n_bins;
    table.bins.resize(n_bins);
    std::vector<double> score_sum(n_bins, 0.0);
    std::vector<size_t> positive_count(n_bins, 0);
    for (size_t b = 0; b < n_bins; ++b) {
        table.bins[b].bin_low = static_cast<double>(b) / static_cast<double>(n_bins);
        table.bins[b].bin_high = static_cast<double>(b + 1) / static_cast<double>(n_bins);
    }

    for (size_t i = 0; i < scores.size(); ++i) {
        double s = scores[i];
        if (s < 0.0 || s > 1.0)
            throw DomriskError("calibration score out of [0,1]: " + std::to_string(s));
        size_t b = std::min(static_cast<size_t>(s * static_cast<double>(n_bins)), n_bins - 1);
        table.bins[b].count += 1;
        score_sum[b] += s;
        if (labels[i] == 1) positive_count[b] += 1;
    }
    for (size_t b = 0; b < n_bins; ++b) {
        if (table.bins[b].count == 0) {
            table.bins[b].mean_predicted = std::numeric_limits<double>::quiet_NaN();
            table.bins[b].empirical_rate = std::numeric_limits<double>::quiet_NaN();
        } else {
            table.bins[b].mean_predicted = score_sum[b] / static_cast<double>(table.bins[b].count);
            table.bins[b].empirical_rate =
                static_cast<double>(positive_count[b]) / static_cast<double>(table.bins[b].count);
        }
    }
    return table;
}

namespace {

LabeledDataset subset_rows(const LabeledDataset& dataset,
                           const std::function<bool(const LabeledSample&)>& keep) {
    LabeledDataset out;
    out.schema_hash = dataset.schema_hash;
    for (const auto& row : dataset.rows)
        if (keep(row)) out.rows.push_back(row);
    return out;
}

struct CvScores {
    CvResult cv;
    std::vector<double> scores;
    std::vector<int> labels;
    std::vector<std::string> domains;
};

CvScores run_cv(const LabeledDataset& subset, const TrainParams& params, int k, uint64_t seed) {
    CvScores out;
    out.cv = kfold_cv(subset, k, params, seed);
    for (const auto& row : subset.rows) {
        out.scores.push_back(out.cv.oof_scores.at(row.domain));
        out.labels.push_back(row.label);
        out.domains.push_back(row.domain);
    }
    return out;
}

}  // namespace

ProtocolReport protocol_eval(const LabeledDataset& dataset, const TrainParams& params,
                             const ProtocolSpec& spec) {
    std::set<std::string> available;
    for (const auto& row : dataset.rows)
        if (row.label == 1) available.insert(row.source);

    std::vector<std::string> sources = spec.positive_sources;
    if (sources.empty()) sources.assign(available.begin(), available.end());
    for (const auto& s : sources) {
        if (!available.count(s)) {
            std::string have;
            for (const auto& a : available) have += (have.empty() ? "" : ", ") + a;
            throw DomriskError("protocol source '" + s + "' absent; available: " + have);
        }
    }

    ProtocolReport report;
    std::map<std::string, CvScores> per_source;

    // within-source curves
    for (const auto& source : sources) {
        auto subset = subset_rows(dataset, [&](const LabeledSample& r) {
            return r.label == 0 || r.source == source;
        });
        per_source[source] = run_cv(subset, params, spec.k, spec.rng_seed);
        const auto& cs = per_source[source];
        auto curve = roc_curve(cs.scores, cs.labels);
        report.curves.push_back(CurveReport{source + "->" + source, curve.auc, curve});
    }

    // combined-source curve
    if (sources.size() > 1) {
        auto subset = subset_rows(dataset, [&](const LabeledSample& r) {
            if (r.label == 0) return true;
            return std::find(sources.begin(), sources.end(), r.source) != sources.end();
        });
        CvScores combined = run_cv(subset, params, spec.k, spec.rng_seed);
        auto curve = roc_curve(combined.scores, combined.labels);
        report.curves.push_back(CurveReport{"combined->combined", curve.auc, curve});
        report.primary_scores = combined.scores;
        report.primary_labels = combined.labels;
        report.primary_domains = combined.domains;
    } else if (!sources.empty()) {
        const auto& cs = per_source[sources[0]];
        report.primary_scores = cs.scores;
        report.primary_labels = cs.labels;
        report.primary_domains = cs.domains;
    }

    // cross-source: fold-mean model of the training source scores the other
    // source's positives; negatives keep their fold-held-out scores
    if (spec.run_cross && sources.size() > 1) {
        for (const auto& train_source : sources) {
            for (const auto& eval_source : sources) {
                if (train_source == eval_source) continue;
                const CvScores& trained = per_source[train_source];
                std::vector<double> scores;
                std::vector<int> labels;
                for (const auto& row : dataset.rows) {
                    if (row.label == 1 && row.source == eval_source) {
                        scores.push_back(cv_predict_mean(trained.cv.fold_models, row.vector));
                        labels.push_back(1);
                    }
                }
                for (size_t i = 0; i < trained.labels.size(); ++i) {
                    if (trained.labels[i] == 0) {
                        scores.push_back(trained.scores[i]);
                        labels.push_back(0);
                    }
                }
                auto curve = roc_curve(scores, labels);
                report.curves.push_back(
                    CurveReport{train_source + "->" + eval_source, curve.auc, curve});
            }
        }
    }

    // held-out-by-date: train on pre-cutoff positives, score post-cutoff
    if (spec.date_cutoff) {
        CivilDate cutoff = *spec.date_cutoff;
        auto pre = subset_rows(dataset, [&](const LabeledSample& r) {
            if (r.label == 0) return true;
            if (std::find(sources.begin(), sources.end(), r.source) == sources.end()) return false;
            return r.reference_date < cutoff;
        });
        size_t pre_pos = 0;
        for (const auto& r : pre.rows) pre_pos += r.label;
        size_t post_pos = 0;
        for (const auto& r : dataset.rows)
            if (r.label == 1 && !(r.reference_date < cutoff) &&
                std::find(sources.begin(), sources.end(), r.source) != sources.end())
                ++post_pos;
        if (pre_pos < static_cast<size_t>(spec.k) || post_pos == 0)
            throw DomriskError("date cutoff " + format_date(cutoff) +
                               " leaves too few positives on one side");

        CvScores trained = run_cv(pre, params, spec.k, spec.rng_seed);
        std::vector<double> scores;
        std::vector<int> labels;
        for (const auto& row : dataset.rows) {
            if (row.label == 1 && !(row.reference_date < cutoff) &&
                std::find(sources.begin(), sources.end(), row.source) != sources.end()) {
                scores.push_back(cv_predict_mean(trained.cv.fold_models, row.vector));
                labels.push_back(1);
            }
        }
        for (size_t i = 0; i < trained.labels.size(); ++i) {
            if (trained.labels[i] == 0) {
                scores.push_back(trained.scores[i]);
                labels.push_back(0);
            }
        }
        auto curve = roc_curve(scores, labels);
        report.curves.push_back(
            CurveReport{"pre-" + format_date(cutoff) + "->post-" + format_date(cutoff),
                        curve.auc, curve});
    }

    return report;
}

}  // namespace domrisk
