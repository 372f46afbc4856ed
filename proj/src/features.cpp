#include "scenex/features.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace scenex {

std::vector<std::string> FeatureVector::column_names(int n_classes) {
    std::vector<std::string> names;
    names.reserve(static_cast<std::size_t>(n_classes) * 4);
    for (int c = 0; c < n_classes; ++c) {
        std::string id = std::to_string(c);
        names.push_back("presence_" + id);
        names.push_back("pixsum_" + id);
        names.push_back("cx_" + id);
        names.push_back("cy_" + id);
    }
    return names;
}

std::vector<double> FeatureVector::to_row() const {
    std::vector<double> row;
    row.reserve(static_cast<std::size_t>(n_classes) * 4);
    for (int c = 0; c < n_classes; ++c) {
        std::size_t i = static_cast<std::size_t>(c);
        row.push_back(presence[i]);
        row.push_back(static_cast<double>(pixel_sum[i]));
        row.push_back(centroid[i].x);
        row.push_back(centroid[i].y);
    }
    return row;
}

FeatureVector FeatureVector::from_row(std::span<const double> row) {
    if (row.size() % 4 != 0 || row.empty())
        throw ValidationError("feature row width must be a positive multiple of 4");
    FeatureVector fv;
    fv.n_classes = static_cast<int>(row.size() / 4);
    for (int c = 0; c < fv.n_classes; ++c) {
        std::size_t i = static_cast<std::size_t>(c) * 4;
        fv.presence.push_back(row[i] != 0 ? 1 : 0);
        fv.pixel_sum.push_back(static_cast<std::int64_t>(std::llround(row[i + 1])));
        fv.centroid.push_back({row[i + 2], row[i + 3]});
    }
    return fv;
}

std::int64_t FeatureVector::total_pixels() const {
    return std::accumulate(pixel_sum.begin(), pixel_sum.end(), std::int64_t{0});
}

void FeatureVector::validate() const {
    if (presence.size() != static_cast<std::size_t>(n_classes) ||
        pixel_sum.size() != static_cast<std::size_t>(n_classes) ||
        centroid.size() != static_cast<std::size_t>(n_classes))
        throw ValidationError("feature vector arrays must all have n_classes entries");
    for (int c = 0; c < n_classes; ++c) {
        std::size_t i = static_cast<std::size_t>(c);
        if ((presence[i] == 1) != (pixel_sum[i] > 0))
            throw ValidationError("presence flag must match pixel_sum > 0");
    }
}

FeatureVector extract_features(const LabelMap& map, const ClassTaxonomy& tax) {
    map.validate_against(tax);
    FeatureVector fv;
    fv.n_classes = tax.size();
    fv.presence.assign(static_cast<std::size_t>(fv.n_classes), 0);
    fv.pixel_sum.assign(static_cast<std::size_t>(fv.n_classes), 0);
    fv.centroid.assign(static_cast<std::size_t>(fv.n_classes), {-1.0, -1.0});

    std::vector<double> sum_x(static_cast<std::size_t>(fv.n_classes), 0);
    std::vector<double> sum_y(static_cast<std::size_t>(fv.n_classes), 0);
    for (int y = 0; y < map.height; ++y) {
        for (int x = 0; x < map.width; ++x) {
            std::size_t c = map.at(x, y);
            ++fv.pixel_sum[c];
            sum_x[c] += x;
            sum_y[c] += y;
        }
    }
    for (int c = 0; c < fv.n_classes; ++c) {
        std::size_t i = static_cast<std::size_t>(c);
        if (fv.pixel_sum[i] > 0) {
            fv.presence[i] = 1;
            fv.centroid[i] = {sum_x[i] / static_cast<double>(fv.pixel_sum[i]),
                              sum_y[i] / static_cast<double>(fv.pixel_sum[i])};
        }
    }
    return fv;
}

std::vector<std::pair<std::string, double>> feature_importance(const gbdt::BoostedEnsemble& model) {
    if (model.rounds() == 0) throw ValidationError("feature_importance: model has no trees");
    std::vector<double> gain(model.feature_names.size(), 0.0);
    for (const auto& per_class : model.trees)
        for (const gbdt::RegressionTree& tree : per_class)
            for (const gbdt::TreeNode& n : tree.nodes)
                if (!n.is_leaf()) gain[static_cast<std::size_t>(n.feature)] += n.gain;
    double total = std::accumulate(gain.begin(), gain.end(), 0.0);
    std::vector<std::pair<std::string, double>> ranked;
    ranked.reserve(gain.size());
    for (std::size_t f = 0; f < gain.size(); ++f)
        ranked.emplace_back(model.feature_names[f], total > 0 ? gain[f] / total : 0.0);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.second > b.second; });
    return ranked;
}

nlohmann::json FeatureSelection::to_json() const {
    nlohmann::json trace = nlohmann::json::array();
    for (const auto& [size, score] : cv_score_per_step)
        trace.push_back({{"size", size}, {"accuracy", score}});
    return nlohmann::json{{"selected", selected}, {"trace", std::move(trace)}};
}

double cv_accuracy(const LabeledDataset& data, const std::vector<int>& columns, int folds,
                   const gbdt::TrainConfig& cfg) {
    LabeledDataset view = select_columns(data, columns);
    std::vector<int> fold_of =
        stratified_folds(view.labels, static_cast<int>(view.class_names.size()), folds, cfg.seed);
    double acc_sum = 0;
    for (int fold = 0; fold < folds; ++fold) {
        LabeledDataset train_set, test_set;
        train_set.feature_names = test_set.feature_names = view.feature_names;
        train_set.class_names = test_set.class_names = view.class_names;
        for (std::size_t i = 0; i < view.size(); ++i) {
            LabeledDataset& dst = fold_of[i] == fold ? test_set : train_set;
            dst.rows.push_back(view.rows[i]);
            dst.labels.push_back(view.labels[i]);
        }
        gbdt::BoostedEnsemble model = gbdt::train(train_set, cfg);
        std::int64_t correct = 0;
        for (std::size_t i = 0; i < test_set.size(); ++i) {
            std::vector<double> p = model.predict_proba(test_set.rows[i]);
            int best = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
            correct += best == test_set.labels[i] ? 1 : 0;
        }
        acc_sum += static_cast<double>(correct) / static_cast<double>(test_set.size());
    }
    return acc_sum / folds;
}

FeatureSelection rfe_select(const LabeledDataset& data, int folds, int target_size,
                            const gbdt::TrainConfig& cfg) {
    data.validate();
    if (!data.labeled()) throw ValidationError("rfe_select: dataset has no labels");
    if (target_size < 1 || target_size > data.width())
        throw ValidationError("rfe_select: target_size out of range");
    if (folds < 2) throw ValidationError("rfe_select: need at least 2 folds");

    std::vector<int> current(static_cast<std::size_t>(data.width()));
    std::iota(current.begin(), current.end(), 0);

    FeatureSelection result;
    while (true) {
        result.cv_score_per_step.emplace_back(static_cast<int>(current.size()),
                                              cv_accuracy(data, current, folds, cfg));
        if (static_cast<int>(current.size()) == target_size) break;

        gbdt::BoostedEnsemble model = gbdt::train(select_columns(data, current), cfg);
        std::vector<double> gain(current.size(), 0.0);
        for (const auto& per_class : model.trees)
            for (const gbdt::RegressionTree& tree : per_class)
                for (const gbdt::TreeNode& n : tree.nodes)
                    if (!n.is_leaf()) gain[static_cast<std::size_t>(n.feature)] += n.gain;
        // Drop the least useful feature; on ties prefer dropping the later column.
        std::size_t drop = 0;
        for (std::size_t i = 1; i < gain.size(); ++i)
            if (gain[i] <= gain[drop]) drop = i;
        current.erase(current.begin() + static_cast<std::ptrdiff_t>(drop));
    }
    for (int c : current) result.selected.push_back(data.feature_names[static_cast<std::size_t>(c)]);
    return result;
}

}  // namespace scenex
