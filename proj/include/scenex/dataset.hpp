#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "scenex/common.hpp"

namespace scenex {

// Row-oriented feature matrix with integer labels indexing class_names.
// labels stays empty for unlabeled data.
struct LabeledDataset {
    std::vector<std::string> feature_names;
    std::vector<std::vector<double>> rows;
    std::vector<int> labels;
    std::vector<std::string> class_names;

    std::size_t size() const { return rows.size(); }
    int width() const { return static_cast<int>(feature_names.size()); }
    bool labeled() const { return !labels.empty(); }
    void validate() const;
    std::vector<std::int64_t> class_counts() const;
};

// Keeps the named columns (in the given order) and all rows/labels.
LabeledDataset select_columns(const LabeledDataset& data, const std::vector<int>& columns);

// CSV layout: header row, one data row per frame, final column "label" when
// labeled. Values use shortest round-trip formatting.
void save_feature_csv(const LabeledDataset& data, const std::filesystem::path& path);
LabeledDataset load_feature_csv(const std::filesystem::path& path);

// Stratified fold assignment (fold id per row). Rows of each class are
// shuffled with the seed and dealt round-robin, so every fold sees every
// class; requires each class to have at least `folds` rows.
std::vector<int> stratified_folds(const std::vector<int>& labels, int n_classes, int folds,
                                  std::uint64_t seed);

}  // namespace scenex
