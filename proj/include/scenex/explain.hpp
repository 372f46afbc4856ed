#pragma once

#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scenex/complexity.hpp"
#include "scenex/features.hpp"
#include "scenex/labelmap.hpp"
#include "scenex/motion.hpp"
#include "scenex/scenario.hpp"

namespace scenex {

enum class LightColor { red, green, yellow, unknown };
std::string to_string(LightColor c);
LightColor light_color_from_string(const std::string& s);

struct LightColorConfig {
    double min_saturation = 0.3;
    double min_value = 0.3;
    double min_qualifying_frac = 0.2;  // below this share of mask pixels -> unknown
};

// Dominant traffic-light hue over the masked pixels of the original RGB
// frame. Hue bands: red [345,15], green [90,150], yellow [45,70]; pixels
// failing the saturation/value gate do not qualify.
LightColor light_color(const RgbImage& rgb, const std::vector<PixelPoint>& mask,
                       const LightColorConfig& cfg = {});

struct ElementState {
    int class_id = 0;
    std::string name;
    bool present = false;
    std::int64_t pixel_sum = 0;
    Point2d centroid{-1.0, -1.0};
    std::optional<std::string> attribute;  // only on attribute-bearing classes (traffic light color)

    bool operator==(const ElementState&) const = default;
};

struct TrackState {
    int track_id = 0;
    int start_frame = 0;
    int length = 0;
    Point2d position{};
    std::optional<double> v_x, v_y;
    std::optional<double> a_x, a_y;
    std::optional<double> ttc;  // may be +inf
    bool severe = false;

    bool operator==(const TrackState&) const = default;
};

// Predicate over element and track states. Element tests are conjunctive on
// one element; track tests must hold on a single track.
struct AdvisoryCondition {
    std::optional<std::string> element;
    std::optional<bool> present;
    std::optional<std::string> attribute;
    std::optional<double> min_area;
    std::optional<double> min_frac;

    bool track_scoped = false;
    std::optional<double> max_ttc;
    std::optional<double> min_abs_vx;
    bool center_band = false;  // |x - W/2| <= W/6

    std::vector<AdvisoryCondition> all;

    bool holds(const std::vector<ElementState>& elements, const std::vector<TrackState>& tracks,
               int frame_width, int frame_height) const;
};

struct AdvisoryRule {
    std::string name;
    AdvisoryCondition when;
    std::string message;
};

class AdvisoryRuleSet {
public:
    AdvisoryRuleSet() = default;
    explicit AdvisoryRuleSet(std::vector<AdvisoryRule> rules) : rules_(std::move(rules)) {}

    // The three advisories quoted in the study plus a severe-TTC warning.
    static AdvisoryRuleSet defaults();
    static AdvisoryRuleSet from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    static AdvisoryRuleSet load(const std::filesystem::path& path);

    const std::vector<AdvisoryRule>& rules() const { return rules_; }

private:
    std::vector<AdvisoryRule> rules_;
};

// All matching rules fire in file order; duplicate messages are suppressed.
std::vector<std::string> apply_rules(const std::vector<ElementState>& elements,
                                     const std::vector<TrackState>& tracks,
                                     const AdvisoryRuleSet& rules, int frame_width, int frame_height);

struct ExplanationReport {
    std::string frame_id;
    int width = 0;
    int height = 0;
    ScenarioDistribution scenario;
    ScenarioLabel label = ScenarioLabel::FreeDriving;
    RoadType road_type = RoadType::Ground;
    std::vector<ElementState> elements;  // present classes, ascending id
    std::vector<TrackState> tracks;
    ComplexityReport complexity;
    std::vector<std::string> advisories;

    nlohmann::ordered_json to_json() const;
    static ExplanationReport from_json(const nlohmann::json& j);
    std::string to_text() const;
    bool operator==(const ExplanationReport&) const = default;
};

// Everything the pipeline assembled for one frame.
struct FrameAnalysis {
    std::string frame_id;
    const RgbImage* rgb = nullptr;  // enables the traffic-light attribute when set
    const LabelMap* map = nullptr;
    std::vector<TrackState> tracks;
    double variety_m = 100.0;
    double n_max = kDefaultMaxClasses;
};

ExplanationReport build_report(const FrameAnalysis& frame, const ClassTaxonomy& tax,
                               const gbdt::BoostedEnsemble& model, const RoadRuleSet& road_rules,
                               const AdvisoryRuleSet& advisory_rules,
                               const LightColorConfig& light_cfg = {});

}  // namespace scenex
