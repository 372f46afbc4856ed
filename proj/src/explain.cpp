#include "scenex/explain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

namespace scenex {

std::string to_string(LightColor c) {
    switch (c) {
        case LightColor::red: return "red";
        case LightColor::green: return "green";
        case LightColor::yellow: return "yellow";
        case LightColor::unknown: return "unknown";
    }
    throw ValidationError("unreachable");
}

LightColor light_color_from_string(const std::string& s) {
    if (s == "red") return LightColor::red;
    if (s == "green") return LightColor::green;
    if (s == "yellow") return LightColor::yellow;
    if (s == "unknown") return LightColor::unknown;
    throw ValidationError("unknown light color: '" + s + "'");
}

namespace {

struct Hsv {
    double h = 0;  // degrees [0,360)
    double s = 0;
    double v = 0;
};

Hsv rgb_to_hsv(std::uint8_t r8, std::uint8_t g8, std::uint8_t b8) {
    double r = r8 / 255.0, g = g8 / 255.0, b = b8 / 255.0;
    double mx = std::max({r, g, b});
    double mn = std::min({r, g, b});
    double delta = mx - mn;
    Hsv hsv;
    hsv.v = mx;
    hsv.s = mx == 0 ? 0 : delta / mx;
    if (delta > 0) {
        if (mx == r)
            hsv.h = 60.0 * std::fmod((g - b) / delta + 6.0, 6.0);
        else if (mx == g)
            hsv.h = 60.0 * ((b - r) / delta + 2.0);
        else
            hsv.h = 60.0 * ((r - g) / delta + 4.0);
    }
    return hsv;
}

}  // namespace

LightColor light_color(const RgbImage& rgb, const std::vector<PixelPoint>& mask,
                       const LightColorConfig& cfg) {
    rgb.validate();
    if (mask.empty()) return LightColor::unknown;
    std::int64_t counts[3] = {0, 0, 0};  // red, green, yellow
    for (const PixelPoint& p : mask) {
        if (p.x < 0 || p.x >= rgb.width || p.y < 0 || p.y >= rgb.height)
            throw ValidationError("light_color: mask pixel outside the frame");
        Hsv hsv = rgb_to_hsv(rgb.r(p.x, p.y), rgb.g(p.x, p.y), rgb.b(p.x, p.y));
        if (hsv.s < cfg.min_saturation || hsv.v < cfg.min_value) continue;
        if (hsv.h >= 345.0 || hsv.h <= 15.0)
            ++counts[0];
        else if (hsv.h >= 90.0 && hsv.h <= 150.0)
            ++counts[1];
        else if (hsv.h >= 45.0 && hsv.h <= 70.0)
            ++counts[2];
    }
    std::int64_t qualifying = counts[0] + counts[1] + counts[2];
    if (static_cast<double>(qualifying) <
        cfg.min_qualifying_frac * static_cast<double>(mask.size()))
        return LightColor::unknown;
    int best = 0;
    for (int i = 1; i < 3; ++i)
        if (counts[i] > counts[best]) best = i;
    return best == 0 ? LightColor::red : best == 1 ? LightColor::green : LightColor::yellow;
}

bool AdvisoryCondition::holds(const std::vector<ElementState>& elements,
                              const std::vector<TrackState>& tracks, int frame_width,
                              int frame_height) const {
    if (!all.empty()) {
        for (const AdvisoryCondition& sub : all)
            if (!sub.holds(elements, tracks, frame_width, frame_height)) return false;
        return true;
    }
    if (element) {
        const ElementState* state = nullptr;
        for (const ElementState& e : elements)
            if (e.name == *element) {
                state = &e;
                break;
            }
        bool is_present = state != nullptr && state->present;
        if (present && is_present != *present) return false;
        if (!present && !is_present && (attribute || min_area || min_frac)) return false;
        if (attribute && (!state || !state->attribute || *state->attribute != *attribute))
            return false;
        if (min_area && (!state || static_cast<double>(state->pixel_sum) < *min_area)) return false;
        if (min_frac) {
            double total = static_cast<double>(frame_width) * frame_height;
            if (!state || static_cast<double>(state->pixel_sum) < *min_frac * total) return false;
        }
        return true;
    }
    if (track_scoped) {
        for (const TrackState& t : tracks) {
            if (max_ttc && !(t.ttc && std::isfinite(*t.ttc) && *t.ttc <= *max_ttc)) continue;
            if (min_abs_vx && !(t.v_x && std::abs(*t.v_x) > *min_abs_vx)) continue;
            if (center_band &&
                !(std::abs(t.position.x - frame_width / 2.0) <= frame_width / 6.0))
                continue;
            return true;
        }
        return false;
    }
    throw ValidationError("advisory condition has no tests");
}

AdvisoryRuleSet AdvisoryRuleSet::defaults() {
    std::vector<AdvisoryRule> rules;
    {
        AdvisoryRule r;
        r.name = "red_light";
        r.when.element = "Sign";
        r.when.attribute = "red";
        r.message = "The traffic light is red, please slow down and stop.";
        rules.push_back(std::move(r));
    }
    {
        AdvisoryRule r;
        r.name = "intersection";
        r.when.element = "Zebra line";
        r.when.present = true;
        r.message = "There is an intersection, please be careful.";
        rules.push_back(std::move(r));
    }
    {
        AdvisoryRule r;
        r.name = "lateral_flow";
        r.when.track_scoped = true;
        r.when.min_abs_vx = 30.0;
        r.when.center_band = true;
        r.message = "There is an interaction in the vertical direction, please keep a safe distance";
        rules.push_back(std::move(r));
    }
    {
        AdvisoryRule r;
        r.name = "severe_conflict";
        r.when.track_scoped = true;
        r.when.max_ttc = kSevereTtcSeconds;
        r.message = "Severe conflict: time to collision is within 1.0 second, brake immediately.";
        rules.push_back(std::move(r));
    }
    return AdvisoryRuleSet(std::move(rules));
}

namespace {

AdvisoryCondition condition_from_json(const nlohmann::json& j) {
    if (!j.is_object()) throw ValidationError("advisory condition must be an object");
    AdvisoryCondition c;
    if (j.contains("all")) {
        for (const auto& sub : j.at("all")) c.all.push_back(condition_from_json(sub));
        if (c.all.empty()) throw ValidationError("advisory 'all' list must not be empty");
        return c;
    }
    if (j.contains("element")) {
        c.element = j.at("element").get<std::string>();
        if (j.contains("present")) c.present = j.at("present").get<bool>();
        if (j.contains("attribute")) c.attribute = j.at("attribute").get<std::string>();
        if (j.contains("min_area")) c.min_area = j.at("min_area").get<double>();
        if (j.contains("min_frac")) c.min_frac = j.at("min_frac").get<double>();
        if (!c.present && !c.attribute && !c.min_area && !c.min_frac) c.present = true;
        return c;
    }
    if (j.contains("track")) {
        const auto& t = j.at("track");
        c.track_scoped = true;
        if (t.contains("max_ttc")) c.max_ttc = t.at("max_ttc").get<double>();
        if (t.contains("min_abs_vx")) c.min_abs_vx = t.at("min_abs_vx").get<double>();
        if (t.contains("center_band")) c.center_band = t.at("center_band").get<bool>();
        if (!c.max_ttc && !c.min_abs_vx && !c.center_band)
            throw ValidationError("advisory track condition has no tests");
        return c;
    }
    throw ValidationError("advisory condition needs 'element', 'track' or 'all'");
}

nlohmann::json condition_to_json(const AdvisoryCondition& c) {
    nlohmann::json j = nlohmann::json::object();
    if (!c.all.empty()) {
        nlohmann::json subs = nlohmann::json::array();
        for (const AdvisoryCondition& sub : c.all) subs.push_back(condition_to_json(sub));
        j["all"] = std::move(subs);
        return j;
    }
    if (c.element) {
        j["element"] = *c.element;
        if (c.present) j["present"] = *c.present;
        if (c.attribute) j["attribute"] = *c.attribute;
        if (c.min_area) j["min_area"] = *c.min_area;
        if (c.min_frac) j["min_frac"] = *c.min_frac;
        return j;
    }
    nlohmann::json t = nlohmann::json::object();
    if (c.max_ttc) t["max_ttc"] = *c.max_ttc;
    if (c.min_abs_vx) t["min_abs_vx"] = *c.min_abs_vx;
    if (c.center_band) t["center_band"] = true;
    j["track"] = std::move(t);
    return j;
}

}  // namespace

AdvisoryRuleSet AdvisoryRuleSet::from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ValidationError("advisory rule JSON must be an array");
    std::vector<AdvisoryRule> rules;
    for (const auto& jr : j) {
        AdvisoryRule rule;
        rule.name = jr.value("name", "");
        rule.message = jr.at("message").get<std::string>();
        if (rule.message.empty()) throw ValidationError("advisory rule message must not be empty");
        rule.when = condition_from_json(jr.at("when"));
        rules.push_back(std::move(rule));
    }
    return AdvisoryRuleSet(std::move(rules));
}

nlohmann::json AdvisoryRuleSet::to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const AdvisoryRule& rule : rules_)
        j.push_back(
            {{"name", rule.name}, {"when", condition_to_json(rule.when)}, {"message", rule.message}});
    return j;
}

AdvisoryRuleSet AdvisoryRuleSet::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open advisory rule file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed advisory JSON in " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

std::vector<std::string> apply_rules(const std::vector<ElementState>& elements,
                                     const std::vector<TrackState>& tracks,
                                     const AdvisoryRuleSet& rules, int frame_width,
                                     int frame_height) {
    std::vector<std::string> messages;
    for (const AdvisoryRule& rule : rules.rules()) {
        if (!rule.when.holds(elements, tracks, frame_width, frame_height)) continue;
        if (std::find(messages.begin(), messages.end(), rule.message) == messages.end())
            messages.push_back(rule.message);
    }
    return messages;
}

namespace {

nlohmann::ordered_json ttc_to_json(const std::optional<double>& ttc) {
    if (!ttc) return nullptr;
    if (std::isinf(*ttc)) return "inf";
    return *ttc;
}

std::optional<double> ttc_from_json(const nlohmann::json& j) {
    if (j.is_null()) return std::nullopt;
    if (j.is_string()) {
        if (j.get<std::string>() == "inf") return std::numeric_limits<double>::infinity();
        throw ValidationError("bad ttc value in report JSON");
    }
    return j.get<double>();
}

nlohmann::ordered_json pair_to_json(const std::optional<double>& a, const std::optional<double>& b) {
    if (!a || !b) return nullptr;
    return nlohmann::ordered_json::array({*a, *b});
}

}  // namespace

nlohmann::ordered_json ExplanationReport::to_json() const {
    nlohmann::ordered_json j;
    j["frame_id"] = frame_id;
    j["width"] = width;
    j["height"] = height;
    nlohmann::ordered_json probs;
    for (int i = 0; i < kScenarioCount; ++i)
        probs[scenario_names()[static_cast<std::size_t>(i)]] = scenario.p[static_cast<std::size_t>(i)];
    j["scenario"] = {{"label", to_string(label)}, {"probabilities", std::move(probs)}};
    j["road_type"] = to_string(road_type);
    nlohmann::ordered_json elems = nlohmann::ordered_json::array();
    for (const ElementState& e : elements) {
        nlohmann::ordered_json je;
        je["class_id"] = e.class_id;
        je["name"] = e.name;
        je["pixel_sum"] = e.pixel_sum;
        je["centroid"] = {e.centroid.x, e.centroid.y};
        if (e.attribute) je["attribute"] = *e.attribute;
        elems.push_back(std::move(je));
    }
    j["elements"] = std::move(elems);
    nlohmann::ordered_json jtracks = nlohmann::ordered_json::array();
    for (const TrackState& t : tracks) {
        nlohmann::ordered_json jt;
        jt["track_id"] = t.track_id;
        jt["start_frame"] = t.start_frame;
        jt["length"] = t.length;
        jt["position"] = {t.position.x, t.position.y};
        jt["v"] = pair_to_json(t.v_x, t.v_y);
        jt["a"] = pair_to_json(t.a_x, t.a_y);
        jt["ttc"] = ttc_to_json(t.ttc);
        jt["severe"] = t.severe;
        jtracks.push_back(std::move(jt));
    }
    j["tracks"] = std::move(jtracks);
    j["complexity"] = nlohmann::ordered_json(complexity.to_json());
    j["advisories"] = advisories;
    return j;
}

ExplanationReport ExplanationReport::from_json(const nlohmann::json& j) {
    ExplanationReport r;
    r.frame_id = j.at("frame_id").get<std::string>();
    r.width = j.at("width").get<int>();
    r.height = j.at("height").get<int>();
    r.label = scenario_from_string(j.at("scenario").at("label").get<std::string>());
    for (int i = 0; i < kScenarioCount; ++i)
        r.scenario.p[static_cast<std::size_t>(i)] =
            j.at("scenario").at("probabilities").at(scenario_names()[static_cast<std::size_t>(i)]).get<double>();
    r.road_type = road_type_from_string(j.at("road_type").get<std::string>());
    for (const auto& je : j.at("elements")) {
        ElementState e;
        e.class_id = je.at("class_id").get<int>();
        e.name = je.at("name").get<std::string>();
        e.present = true;
        e.pixel_sum = je.at("pixel_sum").get<std::int64_t>();
        e.centroid = {je.at("centroid").at(0).get<double>(), je.at("centroid").at(1).get<double>()};
        if (je.contains("attribute")) e.attribute = je.at("attribute").get<std::string>();
        r.elements.push_back(std::move(e));
    }
    for (const auto& jt : j.at("tracks")) {
        TrackState t;
        t.track_id = jt.at("track_id").get<int>();
        t.start_frame = jt.at("start_frame").get<int>();
        t.length = jt.at("length").get<int>();
        t.position = {jt.at("position").at(0).get<double>(), jt.at("position").at(1).get<double>()};
        if (!jt.at("v").is_null()) {
            t.v_x = jt.at("v").at(0).get<double>();
            t.v_y = jt.at("v").at(1).get<double>();
        }
        if (!jt.at("a").is_null()) {
            t.a_x = jt.at("a").at(0).get<double>();
            t.a_y = jt.at("a").at(1).get<double>();
        }
        t.ttc = ttc_from_json(jt.at("ttc"));
        t.severe = jt.at("severe").get<bool>();
        r.tracks.push_back(std::move(t));
    }
    r.complexity = ComplexityReport::from_json(j.at("complexity"));
    r.advisories = j.at("advisories").get<std::vector<std::string>>();
    return r;
}

std::string ExplanationReport::to_text() const {
    std::ostringstream out;
    out << "Frame " << frame_id << " (" << width << "x" << height << ")\n";
    out << "  Scenario: " << to_string(label);
    out << " (";
    for (int i = 0; i < kScenarioCount; ++i) {
        if (i) out << ", ";
        out << scenario_names()[static_cast<std::size_t>(i)] << " "
            << format_double(scenario.p[static_cast<std::size_t>(i)]);
    }
    out << ")\n";
    out << "  Road type: " << to_string(road_type) << "\n";
    out << "  Elements:";
    if (elements.empty()) out << " none";
    out << "\n";
    for (const ElementState& e : elements) {
        out << "    - " << e.name << ": area " << e.pixel_sum << ", centroid ("
            << format_double(e.centroid.x) << ", " << format_double(e.centroid.y) << ")";
        if (e.attribute) out << ", " << *e.attribute;
        out << "\n";
    }
    for (const TrackState& t : tracks) {
        out << "  Track " << t.track_id << ": at (" << format_double(t.position.x) << ", "
            << format_double(t.position.y) << ")";
        if (t.v_x) out << ", v (" << format_double(*t.v_x) << ", " << format_double(*t.v_y) << ") px/s";
        if (t.ttc) out << ", ttc " << format_double(*t.ttc) << " s";
        if (t.severe) out << " [severe]";
        out << "\n";
    }
    out << "  Complexity d = " << format_double(complexity.d) << " (C " << format_double(complexity.relation_c)
        << ", m " << format_double(complexity.variety_m) << "%, n " << format_double(complexity.quantity_n)
        << "/" << format_double(complexity.n_max) << ", 1/TTC " << format_double(complexity.inv_ttc) << ")\n";
    for (const std::string& msg : advisories) out << "  Advisory: " << msg << "\n";
    return out.str();
}

ExplanationReport build_report(const FrameAnalysis& frame, const ClassTaxonomy& tax,
                               const gbdt::BoostedEnsemble& model, const RoadRuleSet& road_rules,
                               const AdvisoryRuleSet& advisory_rules,
                               const LightColorConfig& light_cfg) {
    if (frame.map == nullptr) throw ValidationError("build_report: label map is required");
    FeatureVector fv;
    try {
        fv = extract_features(*frame.map, tax);
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("features stage: ") + e.what());
    }

    ExplanationReport report;
    report.frame_id = frame.frame_id;
    report.width = frame.map->width;
    report.height = frame.map->height;
    try {
        report.scenario = classify_scenario(fv, model);
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("scenario stage: ") + e.what());
    }
    report.label = report.scenario.argmax();
    report.road_type = classify_road_type(fv, road_rules);

    for (int c = 0; c < fv.n_classes; ++c) {
        std::size_t i = static_cast<std::size_t>(c);
        if (!fv.presence[i]) continue;
        if (c == 0) continue;  // background is not a traffic element
        ElementState e;
        e.class_id = c;
        e.name = tax.entry(c).name;
        e.present = true;
        e.pixel_sum = fv.pixel_sum[i];
        e.centroid = fv.centroid[i];
        if (frame.rgb != nullptr && e.name == "Sign") {
            std::vector<PixelPoint> mask = conflict_points(*frame.map, {c});
            e.attribute = to_string(light_color(*frame.rgb, mask, light_cfg));
        }
        report.elements.push_back(std::move(e));
    }

    report.tracks = frame.tracks;
    double min_ttc = std::numeric_limits<double>::infinity();
    for (const TrackState& t : report.tracks)
        if (t.ttc && *t.ttc < min_ttc) min_ttc = *t.ttc;
    try {
        report.complexity =
            evaluate_complexity(report.scenario, frame.variety_m, *frame.map, frame.n_max, min_ttc);
    } catch (const ValidationError& e) {
        throw ValidationError(std::string("complexity stage: ") + e.what());
    }
    report.advisories =
        apply_rules(report.elements, report.tracks, advisory_rules, report.width, report.height);
    return report;
}

}  // namespace scenex
