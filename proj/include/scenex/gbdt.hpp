#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scenex/dataset.hpp"

namespace scenex::gbdt {

// feature < 0 marks a leaf. Children always come after their parent in the
// node array.
struct TreeNode {
    int feature = -1;
    double threshold = 0;
    int left = -1;
    int right = -1;
    double gain = 0;    // realized split gain, internal nodes only
    double weight = 0;  // leaf value, already scaled by the learning rate

    bool is_leaf() const { return feature < 0; }
};

struct RegressionTree {
    std::vector<TreeNode> nodes;

    int leaf_count() const;
    double route(std::span<const double> x) const;
    void validate(int n_features) const;
};

struct TrainConfig {
    int rounds = 50;
    int max_depth = 4;
    double gamma = 0.0;
    double lambda = 1.0;
    double learning_rate = 0.3;
    double min_child_weight = 1e-3;  // minimum hessian sum per child
    std::uint64_t seed = 0;

    void validate() const;
};

struct BoostedEnsemble {
    std::vector<std::string> classes;
    std::vector<std::string> feature_names;
    double learning_rate = 0.3;
    double gamma = 0.0;
    double lambda = 1.0;
    std::vector<double> base_score;                    // prior log-odds per class
    std::vector<std::vector<RegressionTree>> trees;    // [class][round]

    int n_classes() const { return static_cast<int>(classes.size()); }
    int rounds() const { return trees.empty() ? 0 : static_cast<int>(trees.front().size()); }

    std::vector<double> predict_margin(std::span<const double> x) const;
    std::vector<double> predict_proba(std::span<const double> x) const;
    void validate() const;
};

std::vector<double> softmax(std::span<const double> margins);

// Second-order boosting on the softmax objective. Per round and class, a tree
// is grown by exact greedy search over sorted unique feature values with gain
//   1/2 [G_L^2/(H_L+lambda) + G_R^2/(H_R+lambda) - (G_L+G_R)^2/(H_L+H_R+lambda)] - gamma
// and leaf weight -G/(H+lambda) scaled by the learning rate. Splits with
// nonpositive gain are not taken. Gain ties break toward the lower feature
// index, then the lower threshold.
BoostedEnsemble train(const LabeledDataset& data, const TrainConfig& cfg);

// Mean multiclass log-loss of the model truncated to the first `rounds`
// boosting rounds (0 = prior only); entry r of the curve uses r rounds.
double dataset_log_loss(const BoostedEnsemble& model, const LabeledDataset& data, int rounds);
std::vector<double> training_loss_curve(const BoostedEnsemble& model, const LabeledDataset& data);

nlohmann::json model_to_json(const BoostedEnsemble& model);
BoostedEnsemble model_from_json(const nlohmann::json& j);
void save_model(const BoostedEnsemble& model, const std::filesystem::path& path);
BoostedEnsemble load_model(const std::filesystem::path& path);

}  // namespace scenex::gbdt
