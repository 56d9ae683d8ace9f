// Compares the serial reference kernels against their OpenMP versions:
// histogram accumulation (across features) and TreeSHAP attribution
// (across samples). Verifies bit-equality of results while timing.

#include <chrono>
#include <cstdio>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "domrisk/gbdt.hpp"
#include "domrisk/histogram.hpp"
#include "domrisk/rng.hpp"
#include "domrisk/shap.hpp"

using namespace domrisk;

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

template <typename F>
double best_of(int repeats, F&& fn) {
    double best = 1e300;
    for (int i = 0; i < repeats; ++i) {
        auto start = std::chrono::steady_clock::now();
        fn();
        best = std::min(best, seconds_since(start));
    }
    return best;
}

LabeledDataset synthetic_rows(size_t n_rows, size_t n_features, uint64_t seed) {
    Rng rng(seed);
    LabeledDataset ds;
    ds.schema_hash = "bench";
    for (size_t r = 0; r < n_rows; ++r) {
        std::vector<double> x(n_features);
        double signal = 0;
        for (size_t f = 0; f < n_features; ++f) {
            x[f] = rng.uniform() < 0.4 ? 0.0 : rng.uniform() * 6;
            if (f < 8) signal += x[f];
        }
        LabeledSample s;
        s.domain = "bench" + std::to_string(r) + ".example";
        s.label = signal > 8.0 ? 1 : 0;
        s.source = "bench";
        s.reference_date = CivilDate{2023, 1, 1};
        s.vector = FeatureVector{std::move(x), "bench"};
        ds.rows.push_back(std::move(s));
    }
    return ds;
}

bool equal_hists(const HistogramSet& a, const HistogramSet& b) {
    if (a.size() != b.size()) return false;
    for (size_t f = 0; f < a.size(); ++f)
        for (size_t i = 0; i < a[f].size(); ++i)
            if (!(a[f][i] == b[f][i])) return false;
    return true;
}

}  // namespace

int main() {
    const size_t n_rows = 20000, n_features = 400;
#ifdef _OPENMP
    std::printf("threads: %d\n", omp_get_max_threads());
#else
    std::printf("threads: 1 (compiled without OpenMP)\n");
#endif

    auto ds = synthetic_rows(n_rows, n_features, 1);
    DataMatrix matrix = DataMatrix::from_dataset(ds);
    BinnedMatrix binned = BinnedMatrix::build(matrix, 32);

    Rng rng(5);
    std::vector<GradientPair> gradients(n_rows);
    for (auto& g : gradients) {
        auto [gr, he] = logistic_grad_hess(rng.uniform() * 4 - 2, rng.uniform() < 0.5);
        g = GradientPair{gr, he};
    }
    std::vector<uint32_t> rows(n_rows);
    for (uint32_t r = 0; r < n_rows; ++r) rows[r] = r;

    HistogramSet serial_out, parallel_out;
    double t_serial =
        best_of(5, [&] { build_histograms_serial(binned, rows, gradients, serial_out); });
    double t_parallel =
        best_of(5, [&] { build_histograms_parallel(binned, rows, gradients, parallel_out); });
    std::printf("histogram %zux%zu: serial %.4fs  parallel %.4fs  speedup %.2fx  equal=%s\n",
                n_rows, n_features, t_serial, t_parallel, t_serial / t_parallel,
                equal_hists(serial_out, parallel_out) ? "yes" : "NO");

    // a trained model for the attribution kernel
    TrainParams params;
    params.max_rounds = 60;
    params.max_leaves = 32;
    params.early_stopping_rounds = 60;
    LabeledDataset small = synthetic_rows(3000, 64, 2);
    auto model = train(small, small, params);
    std::printf("model: %zu trees, best_round %d\n", model.trees.size(), model.best_round);

    std::vector<FeatureVector> vectors;
    for (size_t i = 0; i < 800; ++i) vectors.push_back(small.rows[i % small.rows.size()].vector);

    std::vector<AttributionVector> shap_serial, shap_parallel;
    double s_serial = best_of(3, [&] { shap_serial = shap_matrix_serial(model, vectors); });
    double s_parallel = best_of(3, [&] { shap_parallel = shap_matrix_parallel(model, vectors); });
    bool equal = shap_serial.size() == shap_parallel.size();
    for (size_t i = 0; equal && i < shap_serial.size(); ++i)
        for (size_t f = 0; equal && f < shap_serial[i].per_feature.size(); ++f)
            equal = shap_serial[i].per_feature[f] == shap_parallel[i].per_feature[f];
    std::printf("treeshap %zu samples: serial %.4fs  parallel %.4fs  speedup %.2fx  equal=%s\n",
                vectors.size(), s_serial, s_parallel, s_serial / s_parallel,
                equal ? "yes" : "NO");
    return equal ? 0 : 1;
}
