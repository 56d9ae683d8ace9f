#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "domrisk/histogram.hpp"

namespace domrisk {

struct TrainParams {
    double learning_rate = 0.1;
    int max_rounds = 1000;
    int max_leaves = 128;           // loss-guided growth bound
    int max_bins = 32;
    int early_stopping_rounds = 50;
    double l2_leaf_penalty = 1.0;
    double min_child_weight = 1.0;
    uint64_t rng_seed = 0;

    void validate() const;
    nlohmann::json to_json() const;
    static TrainParams from_json(const nlohmann::json& doc);
};

struct TreeNode {
    int feature = -1;
    double threshold = 0.0;     // x <= threshold goes left
    bool default_left = true;   // kept in the format for missing-value forward compatibility
    int left = -1;
    int right = -1;
    double leaf_weight = 0.0;   // already scaled by the learning rate
    double cover = 0.0;         // sum of hessians of training rows reaching the node

    bool is_leaf() const { return left < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;  // nodes[0] is the root

    int leaf_index(std::span<const double> row) const;
    double predict_row(std::span<const double> row) const;
    /// Cover-weighted mean of leaf weights: the tree's output expectation
    /// under the training distribution.
    double expected_value() const;
};

/// (gradient, hessian) of the logistic loss at a margin:
/// p = sigmoid(margin), gradient = p - label, hessian = p (1 - p).
std::pair<double, double> logistic_grad_hess(double margin, int label);

/// Numerically stable log-loss of one sample in margin space.
double logistic_loss(double margin, int label);

inline double sigmoid(double margin) { return 1.0 / (1.0 + std::exp(-margin)); }

class TreeEnsemble {
public:
    std::vector<Tree> trees;
    double base_margin = 0.0;
    int best_round = 0;  // trees beyond this are excluded from prediction
    std::string schema_hash;
    TrainParams params;

    double predict_margin(std::span<const double> row) const;
    double predict_proba(const FeatureVector& vector) const;  // checks schema hash
    double predict_proba_unchecked(std::span<const double> row) const;

    nlohmann::json to_json() const;
    static TreeEnsemble from_json(const nlohmann::json& doc);
    void save_file(const std::string& path) const;
    static TreeEnsemble load_file(const std::string& path);
};

/// Gradient boosting with the logistic objective: histogram split finding
/// on training-set quantile bins, loss-guided growth to max_leaves, and
/// early stopping on validation log-loss.
TreeEnsemble train(const LabeledDataset& train_set, const LabeledDataset& valid_set,
                   const TrainParams& params);

struct CvResult {
    std::map<std::string, int> fold_assignments;
    std::vector<TreeEnsemble> fold_models;
    std::map<std::string, double> oof_scores;
    /// Training-row manifest per fold model, for integrity audits.
    std::vector<std::vector<std::string>> fold_training_domains;
};

/// Stratified k-fold cross-validation; fold i's model uses fold i as its
/// early-stopping validation set and produces its out-of-fold scores.
CvResult kfold_cv(const LabeledDataset& dataset, int k, const TrainParams& params,
                  uint64_t rng_seed);

/// Ensemble-of-folds inference: mean of the fold models' probabilities.
double cv_predict_mean(const std::vector<TreeEnsemble>& fold_models, const FeatureVector& vector);

}  // namespace domrisk
