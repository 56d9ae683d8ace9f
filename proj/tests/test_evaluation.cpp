#include <doctest.h>

#include <cmath>

#include "domrisk/evaluation.hpp"
#include "domrisk/rng.hpp"
#include "test_support.hpp"

using namespace domrisk;
using domrisk::test::pairwise_auc;

namespace {

std::pair<std::vector<double>, std::vector<int>> random_instance(Rng& rng, size_t max_n) {
    size_t n = 2 + rng.bounded(max_n - 1);
    std::vector<double> scores;
    std::vector<int> labels;
    bool has_pos = false, has_neg = false;
    for (size_t i = 0; i < n; ++i) {
        // coarse grid forces plenty of ties
        scores.push_back(static_cast<double>(rng.bounded(20)) / 19.0);
        labels.push_back(static_cast<int>(rng.bounded(2)));
        if (labels.back()) has_pos = true;
        else has_neg = true;
    }
    if (!has_pos) labels[0] = 1;
    if (!has_neg) labels[labels.size() - 1] = 0;
    return {scores, labels};
}

LabeledDataset two_source_dataset(size_t n_per_source, size_t n_neg, bool disjoint_signal,
                                  uint64_t seed) {
    Rng rng(seed);
    LabeledDataset ds;
    ds.schema_hash = "protocolhash";
    auto push = [&](const std::string& domain, int label, const std::string& source,
                    std::vector<double> x) {
        LabeledSample s;
        s.domain = domain;
        s.label = label;
        s.source = source;
        s.reference_date = CivilDate{2023, 1, 1};
        s.vector = FeatureVector{std::move(x), "protocolhash"};
        ds.rows.push_back(std::move(s));
    };
    // features: 0/1 carry signal; with disjoint_signal, source A uses
    // feature 0 and source B uses feature 1, otherwise both use feature 0
    for (size_t i = 0; i < n_per_source; ++i) {
        std::vector<double> xa{0.0, 0.0, rng.uniform(), rng.uniform()};
        xa[0] = 0.6 + 0.4 * rng.uniform();
        push("a" + std::to_string(i) + ".example", 1, "vcdb-like", xa);

        std::vector<double> xb{0.0, 0.0, rng.uniform(), rng.uniform()};
        if (disjoint_signal) xb[1] = 0.6 + 0.4 * rng.uniform();
        else xb[0] = 0.6 + 0.4 * rng.uniform();
        push("b" + std::to_string(i) + ".example", 1, "ransomware-like", xb);
    }
    for (size_t i = 0; i < n_neg; ++i) {
        push("n" + std::to_string(i) + ".example", 0, "tranco",
             {0.4 * rng.uniform(), 0.4 * rng.uniform(), rng.uniform(), rng.uniform()});
    }
    return ds;
}

TrainParams protocol_params() {
    TrainParams p;
    p.max_rounds = 40;
    p.max_leaves = 8;
    p.early_stopping_rounds = 20;
    return p;
}

double curve_auc(const ProtocolReport& report, const std::string& name) {
    for (const auto& c : report.curves)
        if (c.name == name) return c.auc;
    FAIL("missing curve ", name);
    return -1;
}

}  // namespace

TEST_CASE("auc: worked examples") {
    CHECK(auc({0.9, 0.8, 0.1}, {1, 1, 0}) == doctest::Approx(1.0));
    CHECK(auc({0.5, 0.5, 0.5, 0.5}, {1, 0, 1, 0}) == doctest::Approx(0.5));
    // pairwise enumeration: 3.5 of 4 pairs
    CHECK(auc({0.8, 0.5, 0.5, 0.2}, {1, 1, 0, 0}) == doctest::Approx(0.875));
    CHECK_THROWS_AS(auc({0.5, 0.6}, {1, 1}), DomriskError);
}

TEST_CASE("auc: equals exhaustive pairwise computation on 1000 random instances") {
    Rng rng(424242);
    for (int trial = 0; trial < 1000; ++trial) {
        auto [scores, labels] = random_instance(rng, 200);
        double fast = auc(scores, labels);
        double slow = pairwise_auc(scores, labels);
        CHECK(std::abs(fast - slow) < 1e-12);
    }
}

TEST_CASE("auc: equals trapezoidal ROC integration on 1000 random instances") {
    Rng rng(777);
    for (int trial = 0; trial < 1000; ++trial) {
        auto [scores, labels] = random_instance(rng, 120);
        CHECK(std::abs(auc(scores, labels) - roc_curve(scores, labels).auc) < 1e-12);
    }
}

TEST_CASE("auc: invariant under strictly increasing transforms, flips under negation") {
    Rng rng(31);
    for (int trial = 0; trial < 50; ++trial) {
        auto [scores, labels] = random_instance(rng, 100);
        double base = auc(scores, labels);

        std::vector<double> transformed;
        for (double s : scores) transformed.push_back(std::exp(3.0 * s) + 1.0);
        CHECK(auc(transformed, labels) == doctest::Approx(base).epsilon(1e-12));

        std::vector<double> negated;
        for (double s : scores) negated.push_back(-s);
        CHECK(auc(negated, labels) == doctest::Approx(1.0 - base).epsilon(1e-12));
    }
}

TEST_CASE("roc_curve: structure and boundary points") {
    auto curve = roc_curve({0.9, 0.8, 0.7, 0.3, 0.2, 0.1}, {1, 1, 1, 0, 0, 0});
    CHECK(curve.points.front().fpr == 0.0);
    CHECK(curve.points.front().tpr == 0.0);
    CHECK(curve.points.back().fpr == 1.0);
    CHECK(curve.points.back().tpr == 1.0);
    // perfect classifier passes through (0, 1)
    bool hits_corner = false;
    for (const auto& p : curve.points)
        if (p.fpr == 0.0 && p.tpr == 1.0) hits_corner = true;
    CHECK(hits_corner);
    CHECK(curve.auc == doctest::Approx(1.0));
    // monotone in both rates
    for (size_t i = 1; i < curve.points.size(); ++i) {
        CHECK(curve.points[i].fpr >= curve.points[i - 1].fpr);
        CHECK(curve.points[i].tpr >= curve.points[i - 1].tpr);
    }
}

TEST_CASE("roc_curve: labels shuffled independently of scores give auc near 0.5") {
    Rng rng(2024);
    size_t n = 10000;
    std::vector<double> scores;
    std::vector<int> labels;
    for (size_t i = 0; i < n; ++i) {
        scores.push_back(rng.uniform());
        labels.push_back(static_cast<int>(rng.bounded(2)));
    }
    double a = roc_curve(scores, labels).auc;
    CHECK(a > 0.47);
    CHECK(a < 0.53);
}

TEST_CASE("calibration: single point mass") {
    std::vector<double> scores(10, 0.5);
    std::vector<int> labels{1, 0, 1, 0, 1, 0, 1, 0, 1, 0};
    auto table = calibration(scores, labels);
    REQUIRE(table.bins.size() == 40);
    size_t nonempty = 0;
    for (const auto& bin : table.bins) {
        if (bin.count > 0) {
            ++nonempty;
            CHECK(bin.empirical_rate == doctest::Approx(0.5));
            CHECK(bin.mean_predicted == doctest::Approx(0.5));
        } else {
            CHECK(std::isnan(bin.empirical_rate));
        }
    }
    CHECK(nonempty == 1);
}

TEST_CASE("calibration: bin partition, conservation, boundary rule") {
    Rng rng(5150);
    std::vector<double> scores;
    std::vector<int> labels;
    for (int i = 0; i < 997; ++i) {
        scores.push_back(rng.uniform());
        labels.push_back(static_cast<int>(rng.bounded(2)));
    }
    scores.push_back(1.0);  // exactly 1.0 lands in the last bin
    labels.push_back(1);
    auto table = calibration(scores, labels);
    size_t total = 0;
    for (const auto& bin : table.bins) total += bin.count;
    CHECK(total == scores.size());
    CHECK(table.bins.back().count >= 1);

    CHECK_THROWS_AS(calibration({1.2}, {1}), DomriskError);
    CHECK_THROWS_AS(calibration({-0.1}, {0}), DomriskError);
}

TEST_CASE("calibration: well-specified synthetic scores stay within 0.05 per bin") {
    // scores ARE the true Bernoulli parameters
    Rng rng(86753);
    size_t n = 50000;
    std::vector<double> scores;
    std::vector<int> labels;
    for (size_t i = 0; i < n; ++i) {
        double p = rng.uniform();
        scores.push_back(p);
        labels.push_back(rng.uniform() < p ? 1 : 0);
    }
    auto table = calibration(scores, labels, 40);
    double max_dev = 0.0;
    for (const auto& bin : table.bins) {
        if (bin.count < 500) continue;
        max_dev = std::max(max_dev, std::abs(bin.empirical_rate - bin.mean_predicted));
    }
    CHECK(max_dev <= 0.05);
}

TEST_CASE("protocol_eval: identical generating distributions keep cross close to within") {
    auto ds = two_source_dataset(60, 120, /*disjoint_signal=*/false, 99);
    ProtocolSpec spec;
    spec.k = 3;
    spec.rng_seed = 13;
    auto report = protocol_eval(ds, protocol_params(), spec);

    double within_a = curve_auc(report, "vcdb-like->vcdb-like");
    double cross_ab = curve_auc(report, "vcdb-like->ransomware-like");
    double within_b = curve_auc(report, "ransomware-like->ransomware-like");
    double cross_ba = curve_auc(report, "ransomware-like->vcdb-like");
    CHECK(std::abs(within_a - cross_ab) < 0.03);
    CHECK(std::abs(within_b - cross_ba) < 0.03);
    CHECK(curve_auc(report, "combined->combined") > 0.9);
}

TEST_CASE("protocol_eval: disjoint signal features degrade cross-source AUC") {
    auto ds = two_source_dataset(60, 120, /*disjoint_signal=*/true, 7);
    ProtocolSpec spec;
    spec.k = 3;
    spec.rng_seed = 21;
    auto report = protocol_eval(ds, protocol_params(), spec);

    CHECK(curve_auc(report, "vcdb-like->ransomware-like") <
          curve_auc(report, "vcdb-like->vcdb-like"));
    CHECK(curve_auc(report, "ransomware-like->vcdb-like") <
          curve_auc(report, "ransomware-like->ransomware-like"));
}

TEST_CASE("protocol_eval: single source degenerates to plain CV") {
    auto ds = two_source_dataset(40, 80, false, 3);
    // drop the second source
    LabeledDataset single;
    single.schema_hash = ds.schema_hash;
    for (const auto& row : ds.rows)
        if (row.source != "ransomware-like") single.rows.push_back(row);

    ProtocolSpec spec;
    spec.positive_sources = {"vcdb-like"};
    spec.k = 3;
    spec.rng_seed = 5;
    auto report = protocol_eval(single, protocol_params(), spec);
    REQUIRE(report.curves.size() == 1);

    auto cv = kfold_cv(single, 3, protocol_params(), 5);
    std::vector<double> scores;
    std::vector<int> labels;
    for (const auto& row : single.rows) {
        scores.push_back(cv.oof_scores.at(row.domain));
        labels.push_back(row.label);
    }
    CHECK(report.curves[0].auc == doctest::Approx(auc(scores, labels)).epsilon(1e-12));
    CHECK(report.primary_scores.size() == single.rows.size());
}

TEST_CASE("protocol_eval: absent source lists available tags") {
    auto ds = two_source_dataset(20, 40, false, 3);
    ProtocolSpec spec;
    spec.positive_sources = {"never-seen"};
    spec.k = 2;
    CHECK_THROWS_WITH_AS(protocol_eval(ds, protocol_params(), spec),
                         doctest::Contains("vcdb-like"), DomriskError);
}

TEST_CASE("protocol_eval: date cutoff trains pre and scores post") {
    auto ds = two_source_dataset(40, 80, false, 17);
    // move half of source A's positives after the cutoff
    int moved = 0;
    for (auto& row : ds.rows) {
        if (row.label == 1 && row.source == "vcdb-like" && moved < 20) {
            row.reference_date = CivilDate{2024, 3, 1};
            ++moved;
        }
    }
    ProtocolSpec spec;
    spec.positive_sources = {"vcdb-like"};
    spec.k = 3;
    spec.rng_seed = 8;
    spec.date_cutoff = CivilDate{2024, 1, 1};
    auto report = protocol_eval(ds, protocol_params(), spec);

    bool found = false;
    for (const auto& c : report.curves) {
        if (c.name.rfind("pre-", 0) == 0) {
            found = true;
            CHECK(c.auc > 0.8);  // same generating distribution pre/post
        }
    }
    CHECK(found);
}
