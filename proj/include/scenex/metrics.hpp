#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "scenex/labelmap.hpp"

namespace scenex {

struct Point2d {
    double x = 0;
    double y = 0;
    bool operator==(const Point2d&) const = default;
};

// counts[true][pred], k x k.
struct ConfusionMatrix {
    int k = 0;
    std::vector<std::int64_t> counts;

    static ConfusionMatrix zeros(int k);
    std::int64_t& at(int truth, int pred) { return counts[static_cast<std::size_t>(truth) * k + pred]; }
    std::int64_t at(int truth, int pred) const { return counts[static_cast<std::size_t>(truth) * k + pred]; }
    std::int64_t total() const;
    std::int64_t diag_sum() const;
    std::int64_t row_sum(int truth) const;
    std::int64_t col_sum(int pred) const;
    nlohmann::json to_json() const;
};

// Per-pixel class probability vectors, each summing to 1.
struct ProbabilityField {
    int width = 0;
    int height = 0;
    int k = 0;
    std::vector<double> probs;  // w*h*k, pixel-major

    static ProbabilityField uniform(int w, int h, int k);
    double at(int x, int y, int cls) const {
        return probs[(static_cast<std::size_t>(y) * width + x) * k + cls];
    }
    void set(int x, int y, int cls, double p) {
        probs[(static_cast<std::size_t>(y) * width + x) * k + cls] = p;
    }
    void validate() const;
};

// Mean negative log-probability of the true class, probabilities clamped to
// [1e-12, 1] so a hard miss stays finite.
double cross_entropy(const ProbabilityField& pred, const LabelMap& truth);

ConfusionMatrix confusion(const LabelMap& pred, const LabelMap& truth, int k);

enum class MiouPolicy {
    exclude_absent,  // classes with an empty union are skipped
    include_absent,  // such classes count as IoU 0
};

// Per-class intersection over union; NaN marks classes with an empty union.
std::vector<double> per_class_iou(const ConfusionMatrix& cm);
double miou(const ConfusionMatrix& cm, MiouPolicy policy = MiouPolicy::exclude_absent);

double f1_macro(const ConfusionMatrix& cm);

enum class MapeDenominator { model, reference };

// 100 * mean(|model - reference| / denominator).
double mape(std::span<const double> model, std::span<const double> reference,
            MapeDenominator denom = MapeDenominator::model);

double rmse_points(std::span<const Point2d> a, std::span<const Point2d> b);

}  // namespace scenex
