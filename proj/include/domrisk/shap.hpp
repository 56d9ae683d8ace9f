#pragma once

#include <string>
#include <vector>

#include "domrisk/gbdt.hpp"

namespace domrisk {

/// Per-feature Shapley attributions for one sample, in log-odds margin
/// space. base_value + sum(per_feature) equals the ensemble margin.
struct AttributionVector {
    std::vector<double> per_feature;
    double base_value = 0.0;
    bool margin_space = true;
};

/// Exact path-dependent TreeSHAP over trees up to best_round. Conditioning
/// uses training cover proportions recorded on the nodes. Throws on schema
/// mismatch or non-positive covers.
AttributionVector tree_shap(const TreeEnsemble& ensemble, const FeatureVector& vector);

/// Serial reference: attribution for each sample in turn.
std::vector<AttributionVector> shap_matrix_serial(const TreeEnsemble& ensemble,
                                                  const std::vector<FeatureVector>& vectors);

/// OpenMP kernel parallelized across samples; per-sample work is
/// independent, so results are identical to the serial reference.
std::vector<AttributionVector> shap_matrix_parallel(const TreeEnsemble& ensemble,
                                                    const std::vector<FeatureVector>& vectors);

struct GroupContribution {
    std::string group_key;  // "category:<name>", "meta:<name>", or "sector"
    double value = 0.0;
};

/// Signed per-sample group sums: a category sums its binaries plus its
/// count feature; a meta-category sums its member binaries (each once),
/// member count features, and its own count feature; sector slots form
/// their own group.
std::vector<GroupContribution> group_contributions(const AttributionVector& attr,
                                                   const FeatureSchema& schema);

struct RankedImportance {
    std::string key;
    double mean_abs = 0.0;
    size_t index = 0;  // original order, for stable ties
};

/// Mean-absolute attribution per feature slot, ranked descending.
std::vector<RankedImportance> global_importance(const std::vector<AttributionVector>& samples,
                                                const FeatureSchema& schema);

/// Mean absolute value of the signed per-sample group sums, ranked.
std::vector<RankedImportance> global_group_importance(
    const std::vector<AttributionVector>& samples, const FeatureSchema& schema);

}  // namespace domrisk
