#include "domrisk/shap.hpp"

#include <algorithm>
#include <cmath>

namespace domrisk {

namespace {

struct PathElement {
    int feature = -1;     // -1 for the root sentinel
    double zero = 1.0;    // fraction of paths flowing through when excluded
    double one = 1.0;     // 1 when the feature follows x, else 0
    double weight = 0.0;  // subset-size permutation weight
};

void extend_path(std::vector<PathElement>& m, double pz, double po, int pi) {
    size_t l = m.size();
    m.push_back(PathElement{pi, pz, po, l == 0 ? 1.0 : 0.0});
    for (size_t i = l; i-- > 0;) {
        m[i + 1].weight += po * m[i].weight * static_cast<double>(i + 1) /
                           static_cast<double>(l + 1);
        m[i].weight = pz * m[i].weight * static_cast<double>(l - i) / static_cast<double>(l + 1);
    }
}

void unwind_path(std::vector<PathElement>& m, size_t index) {
    size_t l = m.size();
    double n = m[l - 1].weight;
    double one = m[index].one;
    double zero = m[index].zero;
    if (one != 0.0) {
        for (size_t j = l - 1; j-- > 0;) {
            double t = m[j].weight;
            m[j].weight = n * static_cast<double>(l) / (static_cast<double>(j + 1) * one);
            n = t - m[j].weight * zero * static_cast<double>(l - (j + 1)) /
                    static_cast<double>(l);
        }
    } else {
        for (size_t j = l - 1; j-- > 0;) {
            m[j].weight = m[j].weight * static_cast<double>(l) /
                          (zero * static_cast<double>(l - (j + 1)));
        }
    }
    for (size_t j = index; j + 1 < l; ++j) {
        m[j].feature = m[j + 1].feature;
        m[j].zero = m[j + 1].zero;
        m[j].one = m[j + 1].one;
    }
    m.pop_back();
}

// Sum of the path weights after conceptually unwinding element `index`,
// without mutating the path.
double unwound_weight_sum(const std::vector<PathElement>& m, size_t index) {
    size_t l = m.size();
    double n = m[l - 1].weight;
    double one = m[index].one;
    double zero = m[index].zero;
    double total = 0.0;
    if (one != 0.0) {
        for (size_t j = l - 1; j-- > 0;) {
            double w = n * static_cast<double>(l) / (static_cast<double>(j + 1) * one);
            total += w;
            n = m[j].weight -
                w * zero * static_cast<double>(l - (j + 1)) / static_cast<double>(l);
        }
    } else {
        for (size_t j = l - 1; j-- > 0;) {
            total += m[j].weight * static_cast<double>(l) /
                     (zero * static_cast<double>(l - (j + 1)));
        }
    }
    return total;
}

void recurse(const Tree& tree, int node_index, std::vector<PathElement> m, double pz, double po,
             int pi, std::span<const double> x, std::vector<double>& phi) {
    extend_path(m, pz, po, pi);
    const TreeNode& node = tree.nodes[static_cast<size_t>(node_index)];
    if (node.is_leaf()) {
        for (size_t i = 1; i < m.size(); ++i) {
            double w = unwound_weight_sum(m, i);
            phi[static_cast<size_t>(m[i].feature)] +=
                w * (m[i].one - m[i].zero) * node.leaf_weight;
        }
        return;
    }

    if (node.cover <= 0.0) throw DomriskError("tree_shap: zero-cover internal node");
    const TreeNode& left = tree.nodes[static_cast<size_t>(node.left)];
    const TreeNode& right = tree.nodes[static_cast<size_t>(node.right)];
    if (left.cover <= 0.0 || right.cover <= 0.0)
        throw DomriskError("tree_shap: zero-cover child node");

    bool go_left = x[static_cast<size_t>(node.feature)] <= node.threshold;
    int hot = go_left ? node.left : node.right;
    int cold = go_left ? node.right : node.left;
    double hot_cover = tree.nodes[static_cast<size_t>(hot)].cover;
    double cold_cover = tree.nodes[static_cast<size_t>(cold)].cover;

    double iz = 1.0, io = 1.0;
    size_t found = m.size();
    for (size_t i = 1; i < m.size(); ++i) {
        if (m[i].feature == node.feature) {
            found = i;
            break;
        }
    }
    if (found != m.size()) {
        iz = m[found].zero;
        io = m[found].one;
        unwind_path(m, found);
    }
    recurse(tree, hot, m, iz * hot_cover / node.cover, io, node.feature, x, phi);
    recurse(tree, cold, m, iz * cold_cover / node.cover, 0.0, node.feature, x, phi);
}

}  // namespace

AttributionVector tree_shap(const TreeEnsemble& ensemble, const FeatureVector& vector) {
    if (vector.schema_hash != ensemble.schema_hash)
        throw DomriskError("tree_shap: schema hash mismatch: model " + ensemble.schema_hash +
                           ", vector " + vector.schema_hash);
    AttributionVector attr;
    attr.per_feature.assign(vector.values.size(), 0.0);
    attr.base_value = ensemble.base_margin;
    for (int t = 0; t < ensemble.best_round; ++t) {
        const Tree& tree = ensemble.trees[static_cast<size_t>(t)];
        recurse(tree, 0, {}, 1.0, 1.0, -1, vector.values, attr.per_feature);
        attr.base_value += tree.expected_value();
    }
    return attr;
}

std::vector<AttributionVector> shap_matrix_serial(const TreeEnsemble& ensemble,
                                                  const std::vector<FeatureVector>& vectors) {
    std::vector<AttributionVector> out(vectors.size());
    for (size_t i = 0; i < vectors.size(); ++i) out[i] = tree_shap(ensemble, vectors[i]);
    return out;
}

std::vector<AttributionVector> shap_matrix_parallel(const TreeEnsemble& ensemble,
                                                    const std::vector<FeatureVector>& vectors) {
    std::vector<AttributionVector> out(vectors.size());
    const long n = static_cast<long>(vectors.size());
#pragma omp parallel for schedule(dynamic, 16)
    for (long i = 0; i < n; ++i)
        out[static_cast<size_t>(i)] = tree_shap(ensemble, vectors[static_cast<size_t>(i)]);
    return out;
}

std::vector<GroupContribution> group_contributions(const AttributionVector& attr,
                                                   const FeatureSchema& schema) {
    if (attr.per_feature.size() != schema.width())
        throw DomriskError("group_contributions: attribution width does not match schema");

    std::vector<GroupContribution> out;
    size_t count_base = schema.binary_features.size();

    // categories: member binaries + the category's own count feature
    for (size_t c = 0; c < schema.count_features.size(); ++c) {
        const CountFeature& cf = schema.count_features[c];
        if (cf.kind != CountFeature::Kind::Category) continue;
        double total = attr.per_feature[count_base + c];
        for (size_t i = 0; i < schema.binary_features.size(); ++i) {
            const auto& cats = schema.binary_features[i].category_ids;
            if (std::find(cats.begin(), cats.end(), cf.category_id) != cats.end())
                total += attr.per_feature[i];
        }
        out.push_back(GroupContribution{"category:" + cf.name, total});
    }

    // meta-categories: deduplicated member binaries + member category count
    // features + the meta's own count feature
    for (size_t c = 0; c < schema.count_features.size(); ++c) {
        const CountFeature& cf = schema.count_features[c];
        if (cf.kind != CountFeature::Kind::MetaCategory) continue;
        std::vector<int> member_cats;
        double total = attr.per_feature[count_base + c];
        for (size_t j = 0; j < schema.count_features.size(); ++j) {
            const CountFeature& other = schema.count_features[j];
            if (other.kind == CountFeature::Kind::Category && other.meta_category == cf.name) {
                member_cats.push_back(other.category_id);
                total += attr.per_feature[count_base + j];
            }
        }
        for (size_t i = 0; i < schema.binary_features.size(); ++i) {
            const auto& cats = schema.binary_features[i].category_ids;
            bool member = std::any_of(cats.begin(), cats.end(), [&](int id) {
                return std::find(member_cats.begin(), member_cats.end(), id) !=
                       member_cats.end();
            });
            if (member) total += attr.per_feature[i];  // once per meta, even if in two cats
        }
        out.push_back(GroupContribution{"meta:" + cf.name, total});
    }

    if (schema.has_sector()) {
        double total = 0.0;
        for (size_t i = 0; i < schema.sector_codes.size(); ++i)
            total += attr.per_feature[schema.sector_offset() + i];
        out.push_back(GroupContribution{"sector", total});
    }
    return out;
}

namespace {

std::vector<RankedImportance> rank_descending(std::vector<RankedImportance> items) {
    std::stable_sort(items.begin(), items.end(),
                     [](const RankedImportance& a, const RankedImportance& b) {
                         if (a.mean_abs != b.mean_abs) return a.mean_abs > b.mean_abs;
                         return a.index < b.index;
                     });
    return items;
}

}  // namespace

std::vector<RankedImportance> global_importance(const std::vector<AttributionVector>& samples,
                                                const FeatureSchema& schema) {
    if (samples.empty()) throw DomriskError("global_importance requires at least one sample");
    std::vector<RankedImportance> items;
    for (size_t i = 0; i < schema.width(); ++i) {
        double total = 0.0;
        for (const auto& s : samples) total += std::abs(s.per_feature[i]);
        items.push_back(
            RankedImportance{schema.slot_name(i), total / static_cast<double>(samples.size()), i});
    }
    return rank_descending(std::move(items));
}

std::vector<RankedImportance> global_group_importance(
    const std::vector<AttributionVector>& samples, const FeatureSchema& schema) {
    if (samples.empty()) throw DomriskError("global_group_importance requires at least one sample");
    std::vector<RankedImportance> items;
    bool first = true;
    for (const auto& s : samples) {
        auto groups = group_contributions(s, schema);
        if (first) {
            for (size_t g = 0; g < groups.size(); ++g)
                items.push_back(RankedImportance{groups[g].group_key, 0.0, g});
            first = false;
        }
        for (size_t g = 0; g < groups.size(); ++g)
            items[g].mean_abs += std::abs(groups[g].value);  // |signed per-sample sum|
    }
    for (auto& item : items) item.mean_abs /= static_cast<double>(samples.size());
    return rank_descending(std::move(items));
}

}  // namespace domrisk
