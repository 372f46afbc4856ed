#include "scenex/gbdt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace scenex::gbdt {

int RegressionTree::leaf_count() const {
    int n = 0;
    for (const TreeNode& node : nodes) n += node.is_leaf() ? 1 : 0;
    return n;
}

double RegressionTree::route(std::span<const double> x) const {
    int i = 0;
    while (!nodes[static_cast<std::size_t>(i)].is_leaf()) {
        const TreeNode& n = nodes[static_cast<std::size_t>(i)];
        i = x[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
    }
    return nodes[static_cast<std::size_t>(i)].weight;
}

void RegressionTree::validate(int n_features) const {
    if (nodes.empty()) throw ValidationError("malformed tree: no nodes");
    std::vector<char> visited(nodes.size(), 0);
    std::vector<int> stack = {0};
    std::size_t seen = 0;
    while (!stack.empty()) {
        int i = stack.back();
        stack.pop_back();
        if (i < 0 || i >= static_cast<int>(nodes.size()))
            throw ValidationError("malformed tree: child index out of range");
        if (visited[static_cast<std::size_t>(i)])
            throw ValidationError("malformed tree: node reachable twice");
        visited[static_cast<std::size_t>(i)] = 1;
        ++seen;
        const TreeNode& n = nodes[static_cast<std::size_t>(i)];
        if (!n.is_leaf()) {
            if (n.feature >= n_features)
                throw ValidationError("malformed tree: split feature out of range");
            if (!std::isfinite(n.threshold)) throw ValidationError("malformed tree: bad threshold");
            stack.push_back(n.right);
            stack.push_back(n.left);
        } else if (!std::isfinite(n.weight)) {
            throw ValidationError("malformed tree: leaf weight not finite");
        }
    }
    if (seen != nodes.size()) throw ValidationError("malformed tree: unreachable nodes");
}

void TrainConfig::validate() const {
    if (rounds < 1) throw ValidationError("train config: rounds must be >= 1");
    if (max_depth < 1) throw ValidationError("train config: max_depth must be >= 1");
    if (gamma < 0) throw ValidationError("train config: gamma must be >= 0");
    if (lambda < 0) throw ValidationError("train config: lambda must be >= 0");
    if (learning_rate <= 0 || learning_rate > 1)
        throw ValidationError("train config: learning_rate must be in (0,1]");
    if (min_child_weight < 0) throw ValidationError("train config: min_child_weight must be >= 0");
}

std::vector<double> softmax(std::span<const double> margins) {
    double max_m = -std::numeric_limits<double>::infinity();
    for (double m : margins) max_m = std::max(max_m, m);
    std::vector<double> p(margins.size());
    double sum = 0;
    for (std::size_t c = 0; c < margins.size(); ++c) {
        p[c] = std::exp(margins[c] - max_m);
        sum += p[c];
    }
    for (double& v : p) v /= sum;
    return p;
}

std::vector<double> BoostedEnsemble::predict_margin(std::span<const double> x) const {
    if (x.size() != feature_names.size())
        throw ValidationError("predict: feature width " + std::to_string(x.size()) +
                              " does not match model width " + std::to_string(feature_names.size()));
    std::vector<double> margins = base_score;
    for (std::size_t c = 0; c < trees.size(); ++c)
        for (const RegressionTree& tree : trees[c]) margins[c] += tree.route(x);
    return margins;
}

std::vector<double> BoostedEnsemble::predict_proba(std::span<const double> x) const {
    std::vector<double> margins = predict_margin(x);
    return softmax(margins);
}

void BoostedEnsemble::validate() const {
    if (classes.size() < 2) throw ValidationError("model needs at least 2 classes");
    if (base_score.size() != classes.size())
        throw ValidationError("model base_score length must match class count");
    if (trees.size() != classes.size())
        throw ValidationError("model must carry one tree list per class");
    std::size_t rounds = trees.front().size();
    for (const auto& per_class : trees) {
        if (per_class.size() != rounds)
            throw ValidationError("model must have equal rounds per class");
        for (const RegressionTree& t : per_class) t.validate(static_cast<int>(feature_names.size()));
    }
    if (gamma < 0 || lambda < 0 || learning_rate <= 0 || learning_rate > 1)
        throw ValidationError("model hyperparameters out of range");
}

namespace {

struct TreeBuilder {
    const LabeledDataset& data;
    const std::vector<double>& grad;
    const std::vector<double>& hess;
    const TrainConfig& cfg;
    std::vector<TreeNode> nodes;

    struct Split {
        double gain = 0;
        int feature = -1;
        double threshold = 0;
        bool found() const { return feature >= 0; }
    };

    Split best_split(const std::vector<std::size_t>& idx, double grad_sum, double hess_sum) const {
        Split best;
        double parent = grad_sum * grad_sum / (hess_sum + cfg.lambda);
        std::vector<std::pair<double, std::size_t>> order(idx.size());
        for (int f = 0; f < data.width(); ++f) {
            for (std::size_t i = 0; i < idx.size(); ++i)
                order[i] = {data.rows[idx[i]][static_cast<std::size_t>(f)], idx[i]};
            std::sort(order.begin(), order.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            double gl = 0, hl = 0;
            for (std::size_t i = 0; i + 1 < order.size(); ++i) {
                gl += grad[order[i].second];
                hl += hess[order[i].second];
                if (order[i].first == order[i + 1].first) continue;
                double hr = hess_sum - hl;
                if (hl < cfg.min_child_weight || hr < cfg.min_child_weight) continue;
                double gr = grad_sum - gl;
                double gain = 0.5 * (gl * gl / (hl + cfg.lambda) + gr * gr / (hr + cfg.lambda) - parent) -
                              cfg.gamma;
                if (gain > best.gain) {
                    best.gain = gain;
                    best.feature = f;
                    best.threshold = 0.5 * (order[i].first + order[i + 1].first);
                }
            }
        }
        return best;  // best.gain stays 0 when no positive-gain split exists
    }

    int build(std::vector<std::size_t>&& idx, int depth) {
        double grad_sum = 0, hess_sum = 0;
        for (std::size_t i : idx) {
            grad_sum += grad[i];
            hess_sum += hess[i];
        }
        int self = static_cast<int>(nodes.size());
        nodes.emplace_back();
        Split split;
        if (depth < cfg.max_depth && idx.size() > 1) split = best_split(idx, grad_sum, hess_sum);
        if (!split.found()) {
            nodes[static_cast<std::size_t>(self)].weight =
                -cfg.learning_rate * grad_sum / (hess_sum + cfg.lambda);
            return self;
        }
        std::vector<std::size_t> left_idx, right_idx;
        left_idx.reserve(idx.size());
        right_idx.reserve(idx.size());
        for (std::size_t i : idx)
            (data.rows[i][static_cast<std::size_t>(split.feature)] < split.threshold ? left_idx : right_idx)
                .push_back(i);
        idx.clear();
        idx.shrink_to_fit();
        int left = build(std::move(left_idx), depth + 1);
        int right = build(std::move(right_idx), depth + 1);
        TreeNode& n = nodes[static_cast<std::size_t>(self)];
        n.feature = split.feature;
        n.threshold = split.threshold;
        n.gain = split.gain;
        n.left = left;
        n.right = right;
        return self;
    }
};

}  // namespace

BoostedEnsemble train(const LabeledDataset& data, const TrainConfig& cfg) {
    cfg.validate();
    data.validate();
    if (!data.labeled()) throw ValidationError("train: dataset has no labels");
    if (data.size() < 2) throw ValidationError("train: need at least 2 rows");
    if (data.width() < 1) throw ValidationError("train: empty feature set");

    const int n_classes = static_cast<int>(data.class_names.size());
    std::vector<std::int64_t> counts = data.class_counts();
    int present = 0;
    for (std::int64_t c : counts) present += c > 0 ? 1 : 0;
    if (present < 2) throw ValidationError("train: need at least 2 distinct labels");
    for (int c = 0; c < n_classes; ++c)
        if (counts[static_cast<std::size_t>(c)] == 0)
            throw ValidationError("train: class '" + data.class_names[static_cast<std::size_t>(c)] +
                                  "' has no rows");

    BoostedEnsemble model;
    model.classes = data.class_names;
    model.feature_names = data.feature_names;
    model.learning_rate = cfg.learning_rate;
    model.gamma = cfg.gamma;
    model.lambda = cfg.lambda;
    model.base_score.resize(static_cast<std::size_t>(n_classes));
    for (int c = 0; c < n_classes; ++c)
        model.base_score[static_cast<std::size_t>(c)] =
            std::log(static_cast<double>(counts[static_cast<std::size_t>(c)]) /
                     static_cast<double>(data.size()));
    model.trees.assign(static_cast<std::size_t>(n_classes), {});

    const std::size_t n = data.size();
    std::vector<std::vector<double>> margins(n, model.base_score);
    std::vector<double> grad(n), hess(n);
    std::vector<std::vector<double>> proba(n);

    for (int round = 0; round < cfg.rounds; ++round) {
        for (std::size_t i = 0; i < n; ++i) proba[i] = softmax(margins[i]);
        for (int c = 0; c < n_classes; ++c) {
            for (std::size_t i = 0; i < n; ++i) {
                double p = proba[i][static_cast<std::size_t>(c)];
                grad[i] = p - (data.labels[i] == c ? 1.0 : 0.0);
                hess[i] = p * (1.0 - p);
            }
            TreeBuilder builder{data, grad, hess, cfg, {}};
            std::vector<std::size_t> all(n);
            for (std::size_t i = 0; i < n; ++i) all[i] = i;
            builder.build(std::move(all), 0);
            model.trees[static_cast<std::size_t>(c)].push_back(
                RegressionTree{std::move(builder.nodes)});
        }
        for (std::size_t i = 0; i < n; ++i)
            for (int c = 0; c < n_classes; ++c)
                margins[i][static_cast<std::size_t>(c)] +=
                    model.trees[static_cast<std::size_t>(c)].back().route(data.rows[i]);
    }
    return model;
}

double dataset_log_loss(const BoostedEnsemble& model, const LabeledDataset& data, int rounds) {
    if (rounds < 0 || rounds > model.rounds())
        throw ValidationError("dataset_log_loss: rounds out of range");
    if (!data.labeled()) throw ValidationError("dataset_log_loss: dataset has no labels");
    double loss = 0;
    for (std::size_t i = 0; i < data.size(); ++i) {
        std::vector<double> margins = model.base_score;
        for (std::size_t c = 0; c < model.trees.size(); ++c)
            for (int r = 0; r < rounds; ++r)
                margins[c] += model.trees[c][static_cast<std::size_t>(r)].route(data.rows[i]);
        std::vector<double> p = softmax(margins);
        loss -= std::log(std::max(p[static_cast<std::size_t>(data.labels[i])], 1e-300));
    }
    return loss / static_cast<double>(data.size());
}

std::vector<double> training_loss_curve(const BoostedEnsemble& model, const LabeledDataset& data) {
    if (!data.labeled()) throw ValidationError("training_loss_curve: dataset has no labels");
    const std::size_t n = data.size();
    std::vector<std::vector<double>> margins(n, model.base_score);
    std::vector<double> curve;
    curve.reserve(static_cast<std::size_t>(model.rounds()) + 1);
    auto loss_now = [&] {
        double loss = 0;
        for (std::size_t i = 0; i < n; ++i) {
            std::vector<double> p = softmax(margins[i]);
            loss -= std::log(std::max(p[static_cast<std::size_t>(data.labels[i])], 1e-300));
        }
        return loss / static_cast<double>(n);
    };
    curve.push_back(loss_now());
    for (int r = 0; r < model.rounds(); ++r) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t c = 0; c < model.trees.size(); ++c)
                margins[i][c] += model.trees[c][static_cast<std::size_t>(r)].route(data.rows[i]);
        curve.push_back(loss_now());
    }
    return curve;
}

namespace {

nlohmann::json tree_to_json(const RegressionTree& tree) {
    nlohmann::json nodes = nlohmann::json::array();
    for (const TreeNode& n : tree.nodes) {
        if (n.is_leaf()) {
            nodes.push_back({{"weight", n.weight}});
        } else {
            nodes.push_back({{"feature", n.feature},
                             {"threshold", n.threshold},
                             {"left", n.left},
                             {"right", n.right},
                             {"gain", n.gain}});
        }
    }
    return nodes;
}

RegressionTree tree_from_json(const nlohmann::json& j) {
    if (!j.is_array() || j.empty()) throw ValidationError("malformed tree JSON");
    RegressionTree tree;
    for (const auto& jn : j) {
        TreeNode n;
        if (jn.contains("weight")) {
            n.weight = jn.at("weight").get<double>();
        } else {
            n.feature = jn.at("feature").get<int>();
            n.threshold = jn.at("threshold").get<double>();
            n.left = jn.at("left").get<int>();
            n.right = jn.at("right").get<int>();
            n.gain = jn.value("gain", 0.0);
            if (n.feature < 0) throw ValidationError("malformed tree JSON: negative split feature");
        }
        tree.nodes.push_back(n);
    }
    return tree;
}

}  // namespace

nlohmann::json model_to_json(const BoostedEnsemble& model) {
    nlohmann::json trees = nlohmann::json::array();
    for (const auto& per_class : model.trees) {
        nlohmann::json rounds = nlohmann::json::array();
        for (const RegressionTree& t : per_class) rounds.push_back(tree_to_json(t));
        trees.push_back(std::move(rounds));
    }
    return nlohmann::json{{"version", 1},
                          {"classes", model.classes},
                          {"feature_names", model.feature_names},
                          {"learning_rate", model.learning_rate},
                          {"gamma", model.gamma},
                          {"lambda", model.lambda},
                          {"base_score", model.base_score},
                          {"trees", std::move(trees)}};
}

BoostedEnsemble model_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("version"))
        throw ValidationError("model JSON missing version");
    if (!j.at("version").is_number_integer() || j.at("version").get<int>() != 1)
        throw ValidationError("unsupported model version: " + j.at("version").dump());
    BoostedEnsemble model;
    model.classes = j.at("classes").get<std::vector<std::string>>();
    model.feature_names = j.at("feature_names").get<std::vector<std::string>>();
    model.learning_rate = j.at("learning_rate").get<double>();
    model.gamma = j.at("gamma").get<double>();
    model.lambda = j.at("lambda").get<double>();
    model.base_score = j.at("base_score").get<std::vector<double>>();
    for (const auto& per_class : j.at("trees")) {
        std::vector<RegressionTree> list;
        for (const auto& jt : per_class) list.push_back(tree_from_json(jt));
        model.trees.push_back(std::move(list));
    }
    model.validate();
    return model;
}

void save_model(const BoostedEnsemble& model, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path.string());
    out << model_to_json(model).dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path.string());
}

BoostedEnsemble load_model(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed model JSON in " + path.string() + ": " + e.what());
    }
    return model_from_json(j);
}

}  // namespace scenex::gbdt
