#pragma once

#include <cstdint>
#include <vector>

#include "domrisk/dataset.hpp"

namespace domrisk {

/// Dense row-major training matrix.
struct DataMatrix {
    size_t n_rows = 0;
    size_t n_features = 0;
    std::vector<double> values;  // row-major
    std::vector<int> labels;

    double at(size_t row, size_t feature) const { return values[row * n_features + feature]; }

    static DataMatrix from_dataset(const LabeledDataset& dataset);
};

struct GradientPair {
    double grad = 0.0;
    double hess = 0.0;

    GradientPair& operator+=(const GradientPair& o) {
        grad += o.grad;
        hess += o.hess;
        return *this;
    }
    GradientPair& operator-=(const GradientPair& o) {
        grad -= o.grad;
        hess -= o.hess;
        return *this;
    }
    bool operator==(const GradientPair&) const = default;
};

/// Quantile-binned view of a training matrix. Cut values are midpoints
/// between adjacent distinct feature values, at most max_bins-1 of them,
/// computed from training data only. bin(x) = index of first cut >= x,
/// so a split "bin <= k" is exactly "x <= cuts[k]".
struct BinnedMatrix {
    std::vector<std::vector<double>> cuts;     // per feature, ascending
    std::vector<std::vector<uint16_t>> bins;   // [feature][row]
    size_t n_rows = 0;

    size_t n_features() const { return cuts.size(); }
    size_t n_bins(size_t feature) const { return cuts[feature].size() + 1; }

    static BinnedMatrix build(const DataMatrix& train, int max_bins);
};

using FeatureHistogram = std::vector<GradientPair>;             // per bin
using HistogramSet = std::vector<FeatureHistogram>;             // per feature

/// Accumulates per-bin gradient sums for the given rows, every feature.
/// Serial reference implementation.
void build_histograms_serial(const BinnedMatrix& data, const std::vector<uint32_t>& rows,
                             const std::vector<GradientPair>& gradients, HistogramSet& out);

/// OpenMP kernel parallelized across features. Each feature's histogram is
/// accumulated by one thread in row order, so results are identical to the
/// serial reference for any worker count.
void build_histograms_parallel(const BinnedMatrix& data, const std::vector<uint32_t>& rows,
                               const std::vector<GradientPair>& gradients, HistogramSet& out);

/// Sibling histogram via parent - child subtraction.
void subtract_histograms(const HistogramSet& parent, const HistogramSet& child,
                         HistogramSet& out);

}  // namespace domrisk
