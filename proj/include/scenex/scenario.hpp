#pragma once

#include <array>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scenex/features.hpp"
#include "scenex/gbdt.hpp"
#include "scenex/metrics.hpp"

namespace scenex {

enum class ScenarioLabel : int {
    FreeDriving = 0,
    Following = 1,
    CutIn = 2,
    EmergencyAvoidance = 3,
};

inline constexpr int kScenarioCount = 4;

// Relation-complexity values per scenario, indexed by ScenarioLabel.
inline constexpr std::array<double, kScenarioCount> kRelationComplexityValue = {1.0, 3.0, 4.0, 5.0};

const std::array<std::string, kScenarioCount>& scenario_names();
std::string to_string(ScenarioLabel label);
ScenarioLabel scenario_from_string(const std::string& name);

enum class RoadType : int { Cross = 0, Ground, FlyOver, Ramp, Tunnel, Expressway };

inline constexpr int kRoadTypeCount = 6;
const std::array<std::string, kRoadTypeCount>& road_type_names();
std::string to_string(RoadType type);
RoadType road_type_from_string(const std::string& name);

struct ScenarioDistribution {
    std::array<double, kScenarioCount> p{};

    bool operator==(const ScenarioDistribution&) const = default;
    void validate() const;
    // Exact probability ties resolve to the lower enum value.
    ScenarioLabel argmax() const;
    double operator[](ScenarioLabel l) const { return p[static_cast<std::size_t>(l)]; }
};

// Maps model classes (which must be exactly the four scenario names, in any
// order) onto the label enum and returns the softmax distribution.
ScenarioDistribution classify_scenario(const FeatureVector& x, const gbdt::BoostedEnsemble& model);
ScenarioDistribution classify_scenario(std::span<const double> row, const gbdt::BoostedEnsemble& model);

// One predicate over a derived feature field. Fields: presence_<id>,
// pixsum_<id>, cx_<id>, cy_<id>, frac_<id> (pixel share of the frame).
struct RoadPredicate {
    enum class Op { eq, ne, gt, gte, lt, lte };
    std::string field;
    Op op = Op::gte;
    double value = 0;

    bool holds(const FeatureVector& x) const;
};

struct RoadRule {
    std::string name;
    std::vector<RoadPredicate> when;  // conjunction
    RoadType then = RoadType::Ground;
};

// First-match rule table with a guaranteed Ground fallback.
class RoadRuleSet {
public:
    RoadRuleSet() = default;
    explicit RoadRuleSet(std::vector<RoadRule> rules) : rules_(std::move(rules)) {}

    // Built against the default taxonomy's infrastructure classes.
    static RoadRuleSet defaults();
    static RoadRuleSet from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    static RoadRuleSet load(const std::filesystem::path& path);

    RoadType evaluate(const FeatureVector& x) const;
    const std::vector<RoadRule>& rules() const { return rules_; }

private:
    std::vector<RoadRule> rules_;
};

RoadType classify_road_type(const FeatureVector& x, const RoadRuleSet& rules);

struct CrossValidationResult {
    ConfusionMatrix cm;
    double f1_macro = 0;
};

// Out-of-fold predictions aggregated into one confusion matrix.
CrossValidationResult cross_validate(const LabeledDataset& data, int folds,
                                     const gbdt::TrainConfig& cfg);

// Expert assessments arrive as a CSV with header "frame_id,expert_score";
// returned in file order for MAPE comparison against model scores.
struct ExpertScore {
    std::string frame_id;
    double score = 0;
};
std::vector<ExpertScore> load_expert_scores(const std::filesystem::path& path);

}  // namespace scenex
