#pragma once

#include <nlohmann/json.hpp>

#include "scenex/labelmap.hpp"
#include "scenex/scenario.hpp"

namespace scenex {

inline constexpr int kDefaultMaxClasses = 22;  // dataset-wide class maximum

struct ComplexityReport {
    double relation_c = 1.0;  // expectation of the per-scenario severity values
    double variety_m = 100.0; // segmentation accuracy, percent
    double quantity_n = 0;    // distinct non-background classes present
    double n_max = kDefaultMaxClasses;
    double inv_ttc = 0;       // 1/TTC, 0 when no conflict is closing
    double d = 0;

    nlohmann::json to_json() const;
    static ComplexityReport from_json(const nlohmann::json& j);
    bool operator==(const ComplexityReport&) const = default;
};

// C = sum_i s(i) p(i) over the four scenario labels.
double relation_complexity(const ScenarioDistribution& p);

// d = C * [(1 - m/100) + n/n_max + 1/TTC], with 1/inf = 0.
double scenario_complexity(double relation_c, double variety_m_percent, double quantity_n,
                           double n_max, double ttc_seconds);

// Distinct non-background classes present in the map.
int quantity_count(const LabelMap& map);

ComplexityReport evaluate_complexity(const ScenarioDistribution& p, double variety_m_percent,
                                     const LabelMap& map, double n_max, double ttc_seconds);

}  // namespace scenex
