#include "scenex/metrics.hpp"

#include <cmath>
#include <limits>

namespace scenex {

namespace {
constexpr double kProbFloor = 1e-12;
}

ConfusionMatrix ConfusionMatrix::zeros(int k) {
    if (k < 1) throw ValidationError("confusion matrix needs k >= 1");
    ConfusionMatrix cm;
    cm.k = k;
    cm.counts.assign(static_cast<std::size_t>(k) * k, 0);
    return cm;
}

std::int64_t ConfusionMatrix::total() const {
    std::int64_t t = 0;
    for (std::int64_t c : counts) t += c;
    return t;
}

std::int64_t ConfusionMatrix::diag_sum() const {
    std::int64_t s = 0;
    for (int i = 0; i < k; ++i) s += at(i, i);
    return s;
}

std::int64_t ConfusionMatrix::row_sum(int truth) const {
    std::int64_t s = 0;
    for (int j = 0; j < k; ++j) s += at(truth, j);
    return s;
}

std::int64_t ConfusionMatrix::col_sum(int pred) const {
    std::int64_t s = 0;
    for (int i = 0; i < k; ++i) s += at(i, pred);
    return s;
}

nlohmann::json ConfusionMatrix::to_json() const {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < k; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int j = 0; j < k; ++j) row.push_back(at(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

ProbabilityField ProbabilityField::uniform(int w, int h, int k) {
    if (w < 1 || h < 1 || k < 1) throw ValidationError("probability field dimensions must be positive");
    ProbabilityField f;
    f.width = w;
    f.height = h;
    f.k = k;
    f.probs.assign(static_cast<std::size_t>(w) * h * k, 1.0 / k);
    return f;
}

void ProbabilityField::validate() const {
    if (width < 1 || height < 1 || k < 1)
        throw ValidationError("probability field dimensions must be positive");
    if (probs.size() != static_cast<std::size_t>(width) * height * k)
        throw ValidationError("probability buffer length must be width*height*k");
    for (std::size_t px = 0; px < probs.size(); px += k) {
        double sum = 0;
        for (int c = 0; c < k; ++c) {
            double p = probs[px + c];
            if (p < 0.0 || p > 1.0) throw ValidationError("probability entry out of [0,1]");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw ValidationError("per-pixel probabilities must sum to 1");
    }
}

double cross_entropy(const ProbabilityField& pred, const LabelMap& truth) {
    truth.validate();
    if (pred.width != truth.width || pred.height != truth.height)
        throw ValidationError("cross_entropy: prediction and truth dimensions differ");
    double sum = 0;
    std::size_t n = truth.cells.size();
    for (std::size_t i = 0; i < n; ++i) {
        int cls = truth.cells[i];
        if (cls >= pred.k) throw ValidationError("cross_entropy: truth class exceeds k");
        double q = pred.probs[i * pred.k + cls];
        q = std::min(1.0, std::max(kProbFloor, q));
        sum -= std::log(q);
    }
    return sum / static_cast<double>(n);
}

ConfusionMatrix confusion(const LabelMap& pred, const LabelMap& truth, int k) {
    pred.validate();
    truth.validate();
    if (pred.width != truth.width || pred.height != truth.height)
        throw ValidationError("confusion: prediction and truth dimensions differ");
    ConfusionMatrix cm = ConfusionMatrix::zeros(k);
    for (std::size_t i = 0; i < truth.cells.size(); ++i) {
        int t = truth.cells[i];
        int p = pred.cells[i];
        if (t >= k || p >= k) throw ValidationError("confusion: class id out of range for k");
        ++cm.at(t, p);
    }
    return cm;
}

std::vector<double> per_class_iou(const ConfusionMatrix& cm) {
    std::vector<double> iou(static_cast<std::size_t>(cm.k));
    for (int i = 0; i < cm.k; ++i) {
        std::int64_t denom = cm.row_sum(i) + cm.col_sum(i) - cm.at(i, i);
        iou[static_cast<std::size_t>(i)] =
            denom == 0 ? std::numeric_limits<double>::quiet_NaN()
                       : static_cast<double>(cm.at(i, i)) / static_cast<double>(denom);
    }
    return iou;
}

double miou(const ConfusionMatrix& cm, MiouPolicy policy) {
    std::vector<double> iou = per_class_iou(cm);
    double sum = 0;
    int counted = 0;
    for (double v : iou) {
        if (std::isnan(v)) {
            if (policy == MiouPolicy::include_absent) ++counted;  // contributes 0
            continue;
        }
        sum += v;
        ++counted;
    }
    if (counted == 0) throw ValidationError("miou undefined: every class is absent");
    return sum / counted;
}

double f1_macro(const ConfusionMatrix& cm) {
    if (cm.total() == 0) throw ValidationError("f1_macro undefined on an empty matrix");
    double sum = 0;
    for (int i = 0; i < cm.k; ++i) {
        std::int64_t col = cm.col_sum(i);
        std::int64_t row = cm.row_sum(i);
        double precision = col == 0 ? 0.0 : static_cast<double>(cm.at(i, i)) / static_cast<double>(col);
        double recall = row == 0 ? 0.0 : static_cast<double>(cm.at(i, i)) / static_cast<double>(row);
        double f1 = (precision + recall) == 0.0 ? 0.0 : 2.0 * precision * recall / (precision + recall);
        sum += f1;
    }
    return sum / cm.k;
}

double mape(std::span<const double> model, std::span<const double> reference, MapeDenominator denom) {
    if (model.size() != reference.size())
        throw ValidationError("mape: lists must have equal length");
    if (model.empty()) throw ValidationError("mape: lists must be nonempty");
    double sum = 0;
    for (std::size_t i = 0; i < model.size(); ++i) {
        double d = denom == MapeDenominator::model ? model[i] : reference[i];
        if (d == 0.0) throw ValidationError("mape: zero denominator entry at index " + std::to_string(i));
        sum += std::abs(model[i] - reference[i]) / d;
    }
    return 100.0 * sum / static_cast<double>(model.size());
}

double rmse_points(std::span<const Point2d> a, std::span<const Point2d> b) {
    if (a.size() != b.size()) throw ValidationError("rmse_points: sequences must have equal length");
    if (a.empty()) throw ValidationError("rmse_points: sequences must be nonempty");
    double sum = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double dx = a[i].x - b[i].x;
        double dy = a[i].y - b[i].y;
        sum += dx * dx + dy * dy;
    }
    return std::sqrt(sum / static_cast<double>(a.size()));
}

}  // namespace scenex
