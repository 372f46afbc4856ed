#include "scenex/complexity.hpp"

#include <cmath>
#include <limits>
#include <set>

namespace scenex {

nlohmann::json ComplexityReport::to_json() const {
    return nlohmann::json{{"relation_c", relation_c},
                          {"variety_m", variety_m},
                          {"quantity_n", quantity_n},
                          {"n_max", n_max},
                          {"inv_ttc", inv_ttc},
                          {"d", d}};
}

ComplexityReport ComplexityReport::from_json(const nlohmann::json& j) {
    ComplexityReport r;
    r.relation_c = j.at("relation_c").get<double>();
    r.variety_m = j.at("variety_m").get<double>();
    r.quantity_n = j.at("quantity_n").get<double>();
    r.n_max = j.at("n_max").get<double>();
    r.inv_ttc = j.at("inv_ttc").get<double>();
    r.d = j.at("d").get<double>();
    return r;
}

double relation_complexity(const ScenarioDistribution& dist) {
    dist.validate();
    double c = 0;
    for (std::size_t i = 0; i < dist.p.size(); ++i) c += kRelationComplexityValue[i] * dist.p[i];
    return c;
}

double scenario_complexity(double relation_c, double variety_m_percent, double quantity_n,
                           double n_max, double ttc_seconds) {
    if (relation_c < 1.0 || relation_c > 5.0)
        throw ValidationError("scenario_complexity: relation complexity must be in [1,5]");
    if (variety_m_percent < 0.0 || variety_m_percent > 100.0)
        throw ValidationError("scenario_complexity: variety m must be in [0,100]");
    if (n_max <= 0) throw ValidationError("scenario_complexity: n_max must be positive");
    if (quantity_n < 0 || quantity_n > n_max)
        throw ValidationError("scenario_complexity: n must be in [0, n_max]");
    if (std::isnan(ttc_seconds) || ttc_seconds <= 0)
        throw ValidationError("scenario_complexity: ttc must be positive or +inf");
    double inv_ttc = std::isinf(ttc_seconds) ? 0.0 : 1.0 / ttc_seconds;
    return relation_c * ((1.0 - variety_m_percent / 100.0) + quantity_n / n_max + inv_ttc);
}

int quantity_count(const LabelMap& map) {
    map.validate();
    std::set<int> present;
    for (std::uint8_t c : map.cells)
        if (c != 0) present.insert(c);
    return static_cast<int>(present.size());
}

ComplexityReport evaluate_complexity(const ScenarioDistribution& p, double variety_m_percent,
                                     const LabelMap& map, double n_max, double ttc_seconds) {
    ComplexityReport r;
    r.relation_c = relation_complexity(p);
    r.variety_m = variety_m_percent;
    r.quantity_n = quantity_count(map);
    r.n_max = n_max;
    r.inv_ttc = std::isinf(ttc_seconds) ? 0.0 : 1.0 / ttc_seconds;
    r.d = scenario_complexity(r.relation_c, r.variety_m, r.quantity_n, r.n_max, ttc_seconds);
    return r;
}

}  // namespace scenex
