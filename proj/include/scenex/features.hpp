#pragma once

#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "scenex/gbdt.hpp"
#include "scenex/labelmap.hpp"
#include "scenex/metrics.hpp"

namespace scenex {

// Per-class presence / pixel-sum / centroid triple. Absent classes carry the
// (-1,-1) centroid sentinel so a classifier can split on presence first.
struct FeatureVector {
    int n_classes = 0;
    std::vector<std::uint8_t> presence;
    std::vector<std::int64_t> pixel_sum;
    std::vector<Point2d> centroid;

    // Flat layout: presence_0, pixsum_0, cx_0, cy_0, presence_1, ...
    static std::vector<std::string> column_names(int n_classes);
    std::vector<double> to_row() const;
    static FeatureVector from_row(std::span<const double> row);

    std::int64_t total_pixels() const;
    void validate() const;
};

// Presence, pixel sum and unweighted centroid per taxonomy class. Origin is
// the top-left corner, x rightward, y downward.
FeatureVector extract_features(const LabelMap& map, const ClassTaxonomy& tax);

// Total split gain per feature across all trees, normalized to sum 1 and
// sorted descending (ties toward the lower column index).
std::vector<std::pair<std::string, double>> feature_importance(const gbdt::BoostedEnsemble& model);

struct FeatureSelection {
    std::vector<std::string> selected;
    std::vector<std::pair<int, double>> cv_score_per_step;  // (subset size, mean CV accuracy)

    nlohmann::json to_json() const;
};

// Mean k-fold accuracy of a model trained on the given columns; folds come
// from stratified_folds(cfg.seed) so repeated calls line up exactly.
double cv_accuracy(const LabeledDataset& data, const std::vector<int>& columns, int folds,
                   const gbdt::TrainConfig& cfg);

// Recursive feature elimination: score the current subset by k-fold CV, drop
// the lowest-importance feature (ties drop the higher column index), repeat
// until target_size features remain.
FeatureSelection rfe_select(const LabeledDataset& data, int folds, int target_size,
                            const gbdt::TrainConfig& cfg);

}  // namespace scenex
