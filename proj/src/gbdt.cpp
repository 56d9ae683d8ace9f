#include "domrisk/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

#include "domrisk/rng.hpp"

namespace domrisk {

void TrainParams::validate() const {
    if (!(learning_rate > 0.0 && learning_rate <= 1.0))
        throw DomriskError("learning_rate must be in (0, 1]");
    if (max_leaves < 2) throw DomriskError("max_leaves must be >= 2");
    if (max_bins < 2) throw DomriskError("max_bins must be >= 2");
    if (l2_leaf_penalty < 0 || min_child_weight < 0)
        throw DomriskError("penalties must be >= 0");
    if (max_rounds < 1) throw DomriskError("max_rounds must be >= 1");
    if (early_stopping_rounds < 1) throw DomriskError("early_stopping_rounds must be >= 1");
}

nlohmann::json TrainParams::to_json() const {
    return {{"learning_rate", learning_rate},
            {"max_rounds", max_rounds},
            {"grow_policy", "lossguide"},
            {"max_leaves", max_leaves},
            {"max_bins", max_bins},
            {"early_stopping_rounds", early_stopping_rounds},
            {"l2_leaf_penalty", l2_leaf_penalty},
            {"min_child_weight", min_child_weight},
            {"rng_seed", rng_seed}};
}

TrainParams TrainParams::from_json(const nlohmann::json& doc) {
    TrainParams p;
    p.learning_rate = doc.at("learning_rate").get<double>();
    p.max_rounds = doc.at("max_rounds").get<int>();
    p.max_leaves = doc.at("max_leaves").get<int>();
    p.max_bins = doc.at("max_bins").get<int>();
    p.early_stopping_rounds = doc.at("early_stopping_rounds").get<int>();
    p.l2_leaf_penalty = doc.at("l2_leaf_penalty").get<double>();
    p.min_child_weight = doc.at("min_child_weight").get<double>();
    p.rng_seed = doc.at("rng_seed").get<uint64_t>();
    return p;
}

std::pair<double, double> logistic_grad_hess(double margin, int label) {
    double p = sigmoid(margin);
    return {p - label, p * (1.0 - p)};
}

double logistic_loss(double margin, int label) {
    // log(1 + exp(margin)) - label * margin, computed stably
    double softplus = margin > 0 ? margin + std::log1p(std::exp(-margin))
                                 : std::log1p(std::exp(margin));
    return softplus - label * margin;
}

int Tree::leaf_index(std::span<const double> row) const {
    int node = 0;
    while (!nodes[node].is_leaf()) {
        const TreeNode& n = nodes[node];
        node = row[static_cast<size_t>(n.feature)] <= n.threshold ? n.left : n.right;
    }
    return node;
}

double Tree::predict_row(std::span<const double> row) const {
    return nodes[leaf_index(row)].leaf_weight;
}

double Tree::expected_value() const {
    double total_cover = 0.0, weighted = 0.0;
    for (const auto& n : nodes) {
        if (!n.is_leaf()) continue;
        total_cover += n.cover;
        weighted += n.cover * n.leaf_weight;
    }
    return total_cover > 0 ? weighted / total_cover : 0.0;
}

double TreeEnsemble::predict_margin(std::span<const double> row) const {
    double margin = base_margin;
    for (int t = 0; t < best_round; ++t) margin += trees[static_cast<size_t>(t)].predict_row(row);
    return margin;
}

double TreeEnsemble::predict_proba(const FeatureVector& vector) const {
    if (vector.schema_hash != schema_hash)
        throw DomriskError("schema hash mismatch: model " + schema_hash + ", vector " +
                           vector.schema_hash);
    return sigmoid(predict_margin(vector.values));
}

double TreeEnsemble::predict_proba_unchecked(std::span<const double> row) const {
    return sigmoid(predict_margin(row));
}

namespace {

struct SplitCandidate {
    double gain = 0.0;
    int node = -1;
    size_t feature = 0;
    size_t bin = 0;          // split after this bin: bin <= k goes left
    double threshold = 0.0;
    GradientPair left_stats;
    GradientPair right_stats;
};

double leaf_objective(const GradientPair& stats, double l2) {
    return stats.grad * stats.grad / (stats.hess + l2);
}

/// Best split over all features for one node's histograms. Scanning in
/// ascending (feature, bin) order with a strict comparison implements the
/// lowest-feature-then-lowest-threshold tie break.
bool best_split(const HistogramSet& hist, const BinnedMatrix& binned, const GradientPair& total,
                const TrainParams& params, SplitCandidate& out) {
    bool found = false;
    double parent_obj = leaf_objective(total, params.l2_leaf_penalty);
    for (size_t f = 0; f < hist.size(); ++f) {
        size_t bins = hist[f].size();
        if (bins < 2) continue;
        GradientPair left;
        for (size_t b = 0; b + 1 < bins; ++b) {
            left += hist[f][b];
            GradientPair right = total;
            right -= left;
            if (left.hess < params.min_child_weight || right.hess < params.min_child_weight)
                continue;
            double gain = 0.5 * (leaf_objective(left, params.l2_leaf_penalty) +
                                 leaf_objective(right, params.l2_leaf_penalty) - parent_obj);
            if (gain > out.gain) {
                out.gain = gain;
                out.feature = f;
                out.bin = b;
                out.threshold = binned.cuts[f][b];
                out.left_stats = left;
                out.right_stats = right;
                found = true;
            }
        }
    }
    return found;
}

struct NodeWork {
    std::vector<uint32_t> rows;
    HistogramSet hist;
    GradientPair stats;
};

Tree grow_tree(const BinnedMatrix& binned, const std::vector<GradientPair>& gradients,
               const std::vector<uint32_t>& root_rows, const TrainParams& params) {
    Tree tree;
    std::vector<NodeWork> work;

    GradientPair root_stats;
    for (uint32_t r : root_rows) root_stats += gradients[r];

    tree.nodes.push_back(TreeNode{});
    tree.nodes[0].cover = root_stats.hess;
    work.push_back(NodeWork{root_rows, {}, root_stats});
    build_histograms_parallel(binned, root_rows, gradients, work[0].hist);

    // frontier of splittable leaves ordered by (gain desc, node asc)
    auto cmp = [](const SplitCandidate& a, const SplitCandidate& b) {
        if (a.gain != b.gain) return a.gain > b.gain;
        return a.node < b.node;
    };
    std::vector<SplitCandidate> frontier;
    auto push_candidate = [&](int node) {
        SplitCandidate cand;
        cand.node = node;
        if (best_split(work[static_cast<size_t>(node)].hist, binned,
                       work[static_cast<size_t>(node)].stats, params, cand)) {
            frontier.push_back(cand);
            std::push_heap(frontier.begin(), frontier.end(),
                           [&](const auto& a, const auto& b) { return cmp(b, a); });
        }
    };
    push_candidate(0);

    int n_leaves = 1;
    while (n_leaves < params.max_leaves && !frontier.empty()) {
        std::pop_heap(frontier.begin(), frontier.end(),
                      [&](const auto& a, const auto& b) { return cmp(b, a); });
        SplitCandidate cand = frontier.back();
        frontier.pop_back();

        // take the parent's payload before work grows (push_back would
        // invalidate references into it)
        HistogramSet parent_hist = std::move(work[static_cast<size_t>(cand.node)].hist);
        std::vector<uint32_t> parent_rows = std::move(work[static_cast<size_t>(cand.node)].rows);

        int left_id = static_cast<int>(tree.nodes.size());
        int right_id = left_id + 1;

        std::vector<uint32_t> left_rows, right_rows;
        left_rows.reserve(parent_rows.size());
        const auto& bins = binned.bins[cand.feature];
        for (uint32_t r : parent_rows) {
            if (bins[r] <= cand.bin)
                left_rows.push_back(r);
            else
                right_rows.push_back(r);
        }

        {
            TreeNode& node = tree.nodes[static_cast<size_t>(cand.node)];
            node.feature = static_cast<int>(cand.feature);
            node.threshold = cand.threshold;
            node.left = left_id;
            node.right = right_id;
        }
        TreeNode left_node, right_node;
        left_node.cover = cand.left_stats.hess;
        right_node.cover = cand.right_stats.hess;
        tree.nodes.push_back(left_node);
        tree.nodes.push_back(right_node);

        // smaller child scans rows, sibling comes from subtraction
        work.push_back(NodeWork{std::move(left_rows), {}, cand.left_stats});
        work.push_back(NodeWork{std::move(right_rows), {}, cand.right_stats});
        NodeWork& lw = work[static_cast<size_t>(left_id)];
        NodeWork& rw = work[static_cast<size_t>(right_id)];
        if (lw.rows.size() <= rw.rows.size()) {
            build_histograms_parallel(binned, lw.rows, gradients, lw.hist);
            subtract_histograms(parent_hist, lw.hist, rw.hist);
        } else {
            build_histograms_parallel(binned, rw.rows, gradients, rw.hist);
            subtract_histograms(parent_hist, rw.hist, lw.hist);
        }

        ++n_leaves;
        if (n_leaves < params.max_leaves) {
            push_candidate(left_id);
            push_candidate(right_id);
        }
    }

    for (size_t i = 0; i < tree.nodes.size(); ++i) {
        TreeNode& node = tree.nodes[i];
        if (!node.is_leaf()) continue;
        const GradientPair& stats = work[i].stats;
        node.leaf_weight =
            -stats.grad / (stats.hess + params.l2_leaf_penalty) * params.learning_rate;
    }
    return tree;
}

}  // namespace

TreeEnsemble train(const LabeledDataset& train_set, const LabeledDataset& valid_set,
                   const TrainParams& params) {
    params.validate();
    if (train_set.rows.empty()) throw DomriskError("training set is empty");
    if (valid_set.rows.empty()) throw DomriskError("validation set is empty");
    if (train_set.schema_hash != valid_set.schema_hash)
        throw DomriskError("train/validation schema hash mismatch: " + train_set.schema_hash +
                           " vs " + valid_set.schema_hash);

    DataMatrix train_matrix = DataMatrix::from_dataset(train_set);
    DataMatrix valid_matrix = DataMatrix::from_dataset(valid_set);

    size_t n_pos = static_cast<size_t>(
        std::count(train_matrix.labels.begin(), train_matrix.labels.end(), 1));
    if (n_pos == 0 || n_pos == train_matrix.n_rows)
        throw DomriskError("training set must contain both classes");

    TreeEnsemble ensemble;
    ensemble.params = params;
    ensemble.schema_hash = train_set.schema_hash;
    double prior = static_cast<double>(n_pos) / static_cast<double>(train_matrix.n_rows);
    ensemble.base_margin = std::log(prior / (1.0 - prior));

    BinnedMatrix binned = BinnedMatrix::build(train_matrix, params.max_bins);
    std::vector<uint32_t> all_rows(train_matrix.n_rows);
    for (size_t i = 0; i < all_rows.size(); ++i) all_rows[i] = static_cast<uint32_t>(i);

    std::vector<double> train_margins(train_matrix.n_rows, ensemble.base_margin);
    std::vector<double> valid_margins(valid_matrix.n_rows, ensemble.base_margin);
    std::vector<GradientPair> gradients(train_matrix.n_rows);

    auto valid_loss = [&]() {
        double total = 0.0;
        for (size_t r = 0; r < valid_matrix.n_rows; ++r)
            total += logistic_loss(valid_margins[r], valid_matrix.labels[r]);
        return total / static_cast<double>(valid_matrix.n_rows);
    };

    double best_loss = valid_loss();  // the empty ensemble
    ensemble.best_round = 0;
    int rounds_since_improvement = 0;

    for (int round = 0; round < params.max_rounds; ++round) {
        for (size_t r = 0; r < train_matrix.n_rows; ++r) {
            auto [g, h] = logistic_grad_hess(train_margins[r], train_matrix.labels[r]);
            gradients[r] = GradientPair{g, h};
        }
        Tree tree = grow_tree(binned, gradients, all_rows, params);

        for (size_t r = 0; r < train_matrix.n_rows; ++r)
            train_margins[r] += tree.predict_row(
                std::span(&train_matrix.values[r * train_matrix.n_features],
                          train_matrix.n_features));
        for (size_t r = 0; r < valid_matrix.n_rows; ++r)
            valid_margins[r] += tree.predict_row(
                std::span(&valid_matrix.values[r * valid_matrix.n_features],
                          valid_matrix.n_features));
        ensemble.trees.push_back(std::move(tree));

        double loss = valid_loss();
        if (best_loss - loss >= 1e-7) {
            best_loss = loss;
            ensemble.best_round = round + 1;
            rounds_since_improvement = 0;
        } else if (++rounds_since_improvement >= params.early_stopping_rounds) {
            break;
        }
    }
    return ensemble;
}

namespace {

nlohmann::json node_to_json(const Tree& tree, int index) {
    const TreeNode& node = tree.nodes[static_cast<size_t>(index)];
    if (node.is_leaf()) return {{"leaf_weight", node.leaf_weight}, {"cover", node.cover}};
    return {{"feature", node.feature},
            {"threshold", node.threshold},
            {"default_left", node.default_left},
            {"left", node_to_json(tree, node.left)},
            {"right", node_to_json(tree, node.right)}};
}

// Rebuilds the node array in pre-order; internal covers are recomputed
// from the leaves.
int node_from_json(const nlohmann::json& doc, Tree& tree) {
    int index = static_cast<int>(tree.nodes.size());
    tree.nodes.push_back(TreeNode{});
    if (doc.contains("leaf_weight")) {
        tree.nodes[static_cast<size_t>(index)].leaf_weight = doc.at("leaf_weight").get<double>();
        tree.nodes[static_cast<size_t>(index)].cover = doc.at("cover").get<double>();
        return index;
    }
    int feature = doc.at("feature").get<int>();
    double threshold = doc.at("threshold").get<double>();
    bool default_left = doc.at("default_left").get<bool>();
    int left = node_from_json(doc.at("left"), tree);
    int right = node_from_json(doc.at("right"), tree);
    TreeNode& node = tree.nodes[static_cast<size_t>(index)];
    node.feature = feature;
    node.threshold = threshold;
    node.default_left = default_left;
    node.left = left;
    node.right = right;
    node.cover = tree.nodes[static_cast<size_t>(left)].cover +
                 tree.nodes[static_cast<size_t>(right)].cover;
    return index;
}

}  // namespace

nlohmann::json TreeEnsemble::to_json() const {
    nlohmann::json trees_doc = nlohmann::json::array();
    for (const auto& tree : trees) trees_doc.push_back(node_to_json(tree, 0));
    return {{"params", params.to_json()},
            {"base_margin", base_margin},
            {"best_round", best_round},
            {"schema_hash", schema_hash},
            {"trees", trees_doc}};
}

TreeEnsemble TreeEnsemble::from_json(const nlohmann::json& doc) {
    TreeEnsemble ensemble;
    ensemble.params = TrainParams::from_json(doc.at("params"));
    ensemble.base_margin = doc.at("base_margin").get<double>();
    ensemble.best_round = doc.at("best_round").get<int>();
    ensemble.schema_hash = doc.at("schema_hash").get<std::string>();
    for (const auto& tree_doc : doc.at("trees")) {
        Tree tree;
        node_from_json(tree_doc, tree);
        for (const auto& node : tree.nodes) {
            if (!node.is_leaf() && node.cover <= 0.0)
                throw DomriskError("model file has a zero-cover internal node");
        }
        ensemble.trees.push_back(std::move(tree));
    }
    if (ensemble.best_round < 0 || ensemble.best_round > static_cast<int>(ensemble.trees.size()))
        throw DomriskError("model file best_round is out of range");
    return ensemble;
}

void TreeEnsemble::save_file(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DomriskError("cannot write model file: " + path);
    out << to_json().dump(2) << "\n";
}

TreeEnsemble TreeEnsemble::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomriskError("cannot open model file: " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw DomriskError("model file " + path + " is not valid JSON: " + e.what());
    }
    return from_json(doc);
}

CvResult kfold_cv(const LabeledDataset& dataset, int k, const TrainParams& params,
                  uint64_t rng_seed) {
    if (k < 2) throw DomriskError("k must be >= 2");
    std::set<std::string> unique_domains;
    std::vector<std::string> positives, negatives;
    for (const auto& row : dataset.rows) {
        if (!unique_domains.insert(row.domain).second)
            throw DomriskError("dataset has duplicate domain: " + row.domain);
        (row.label == 1 ? positives : negatives).push_back(row.domain);
    }
    if (positives.size() < static_cast<size_t>(k) || negatives.size() < static_cast<size_t>(k))
        throw DomriskError("each class needs at least k samples for " + std::to_string(k) +
                           "-fold cv");

    // stratified deal: shuffle each class, then deal round-robin with a
    // cursor carried across classes so fold sizes differ by at most one
    Rng rng(rng_seed);
    rng.shuffle(positives);
    rng.shuffle(negatives);
    CvResult result;
    int cursor = 0;
    for (const auto& domain : positives) {
        result.fold_assignments[domain] = cursor;
        cursor = (cursor + 1) % k;
    }
    for (const auto& domain : negatives) {
        result.fold_assignments[domain] = cursor;
        cursor = (cursor + 1) % k;
    }

    std::map<std::string, const LabeledSample*> by_domain;
    for (const auto& row : dataset.rows) by_domain[row.domain] = &row;

    for (int fold = 0; fold < k; ++fold) {
        LabeledDataset train_split, valid_split;
        train_split.schema_hash = dataset.schema_hash;
        valid_split.schema_hash = dataset.schema_hash;
        for (const auto& row : dataset.rows) {
            if (result.fold_assignments.at(row.domain) == fold)
                valid_split.rows.push_back(row);
            else
                train_split.rows.push_back(row);
        }
        TreeEnsemble model = train(train_split, valid_split, params);
        std::vector<std::string> manifest;
        manifest.reserve(train_split.rows.size());
        for (const auto& row : train_split.rows) manifest.push_back(row.domain);
        std::sort(manifest.begin(), manifest.end());
        result.fold_training_domains.push_back(std::move(manifest));

        for (const auto& row : valid_split.rows)
            result.oof_scores[row.domain] = model.predict_proba(row.vector);
        result.fold_models.push_back(std::move(model));
    }
    return result;
}

double cv_predict_mean(const std::vector<TreeEnsemble>& fold_models,
                       const FeatureVector& vector) {
    if (fold_models.empty()) throw DomriskError("no fold models");
    double total = 0.0;
    for (const auto& model : fold_models) total += model.predict_proba(vector);
    return total / static_cast<double>(fold_models.size());
}

}  // namespace domrisk
