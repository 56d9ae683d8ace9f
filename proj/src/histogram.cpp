#include "domrisk/histogram.hpp"

#include <algorithm>

namespace domrisk {

DataMatrix DataMatrix::from_dataset(const LabeledDataset& dataset) {
    DataMatrix m;
    m.n_rows = dataset.rows.size();
    m.n_features = m.n_rows ? dataset.rows[0].vector.values.size() : 0;
    m.values.reserve(m.n_rows * m.n_features);
    m.labels.reserve(m.n_rows);
    for (const auto& row : dataset.rows) {
        if (row.vector.values.size() != m.n_features)
            throw DomriskError("dataset rows have inconsistent vector widths");
        m.values.insert(m.values.end(), row.vector.values.begin(), row.vector.values.end());
        m.labels.push_back(row.label);
    }
    return m;
}

BinnedMatrix BinnedMatrix::build(const DataMatrix& train, int max_bins) {
    if (max_bins < 2) throw DomriskError("max_bins must be >= 2");
    BinnedMatrix binned;
    binned.n_rows = train.n_rows;
    binned.cuts.resize(train.n_features);
    binned.bins.resize(train.n_features);

    std::vector<double> column(train.n_rows);
    for (size_t f = 0; f < train.n_features; ++f) {
        for (size_t r = 0; r < train.n_rows; ++r) column[r] = train.at(r, f);
        std::vector<double> sorted = column;
        std::sort(sorted.begin(), sorted.end());

        // distinct values with cumulative counts
        std::vector<std::pair<double, size_t>> distinct;  // value, cumulative count
        for (size_t i = 0; i < sorted.size(); ++i) {
            if (distinct.empty() || sorted[i] != distinct.back().first)
                distinct.push_back({sorted[i], i + 1});
            else
                distinct.back().second = i + 1;
        }

        auto& cuts = binned.cuts[f];
        if (distinct.size() > 1) {
            size_t u = distinct.size();
            if (u <= static_cast<size_t>(max_bins)) {
                for (size_t i = 0; i + 1 < u; ++i)
                    cuts.push_back((distinct[i].first + distinct[i + 1].first) / 2.0);
            } else {
                // pick boundaries where the cumulative count crosses the
                // next quantile target
                double step = static_cast<double>(train.n_rows) / max_bins;
                double target = step;
                for (size_t i = 0; i + 1 < u && cuts.size() + 1 < static_cast<size_t>(max_bins);
                     ++i) {
                    if (static_cast<double>(distinct[i].second) >= target) {
                        cuts.push_back((distinct[i].first + distinct[i + 1].first) / 2.0);
                        while (target <= static_cast<double>(distinct[i].second)) target += step;
                    }
                }
            }
        }

        auto& bins = binned.bins[f];
        bins.resize(train.n_rows);
        for (size_t r = 0; r < train.n_rows; ++r) {
            size_t b = static_cast<size_t>(
                std::lower_bound(cuts.begin(), cuts.end(), column[r]) - cuts.begin());
            bins[r] = static_cast<uint16_t>(b);
        }
    }
    return binned;
}

namespace {

inline void accumulate_feature(const BinnedMatrix& data, size_t feature,
                               const std::vector<uint32_t>& rows,
                               const std::vector<GradientPair>& gradients,
                               FeatureHistogram& hist) {
    hist.assign(data.n_bins(feature), GradientPair{});
    const auto& bins = data.bins[feature];
    for (uint32_t row : rows) hist[bins[row]] += gradients[row];
}

}  // namespace

void build_histograms_serial(const BinnedMatrix& data, const std::vector<uint32_t>& rows,
                             const std::vector<GradientPair>& gradients, HistogramSet& out) {
    out.resize(data.n_features());
    for (size_t f = 0; f < data.n_features(); ++f)
        accumulate_feature(data, f, rows, gradients, out[f]);
}

void build_histograms_parallel(const BinnedMatrix& data, const std::vector<uint32_t>& rows,
                               const std::vector<GradientPair>& gradients, HistogramSet& out) {
    out.resize(data.n_features());
    const long n = static_cast<long>(data.n_features());
#pragma omp parallel for schedule(static)
    for (long f = 0; f < n; ++f)
        accumulate_feature(data, static_cast<size_t>(f), rows, gradients,
                           out[static_cast<size_t>(f)]);
}

void subtract_histograms(const HistogramSet& parent, const HistogramSet& child,
                         HistogramSet& out) {
    out = parent;
    for (size_t f = 0; f < out.size(); ++f)
        for (size_t b = 0; b < out[f].size(); ++b) out[f][b] -= child[f][b];
}

}  // namespace domrisk
