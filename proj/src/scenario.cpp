#include "scenex/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace scenex {

const std::array<std::string, kScenarioCount>& scenario_names() {
    static const std::array<std::string, kScenarioCount> names = {
        "FreeDriving", "Following", "CutIn", "EmergencyAvoidance"};
    return names;
}

std::string to_string(ScenarioLabel label) {
    return scenario_names()[static_cast<std::size_t>(label)];
}

ScenarioLabel scenario_from_string(const std::string& name) {
    const auto& names = scenario_names();
    for (int i = 0; i < kScenarioCount; ++i)
        if (names[static_cast<std::size_t>(i)] == name) return static_cast<ScenarioLabel>(i);
    throw ValidationError("unknown scenario label: '" + name + "'");
}

const std::array<std::string, kRoadTypeCount>& road_type_names() {
    static const std::array<std::string, kRoadTypeCount> names = {"Cross",  "Ground", "FlyOver",
                                                                  "Ramp",   "Tunnel", "Expressway"};
    return names;
}

std::string to_string(RoadType type) { return road_type_names()[static_cast<std::size_t>(type)]; }

RoadType road_type_from_string(const std::string& name) {
    const auto& names = road_type_names();
    for (int i = 0; i < kRoadTypeCount; ++i)
        if (names[static_cast<std::size_t>(i)] == name) return static_cast<RoadType>(i);
    throw ValidationError("unknown road type: '" + name + "'");
}

void ScenarioDistribution::validate() const {
    double sum = 0;
    for (double v : p) {
        if (v < 0 || !std::isfinite(v)) throw ValidationError("scenario probability out of range");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-9) throw ValidationError("scenario probabilities must sum to 1");
}

ScenarioLabel ScenarioDistribution::argmax() const {
    std::size_t best = 0;
    for (std::size_t i = 1; i < p.size(); ++i)
        if (p[i] > p[best]) best = i;
    return static_cast<ScenarioLabel>(best);
}

ScenarioDistribution classify_scenario(std::span<const double> row,
                                       const gbdt::BoostedEnsemble& model) {
    if (model.n_classes() != kScenarioCount)
        throw ValidationError("scenario model must have exactly 4 classes");
    std::array<int, kScenarioCount> slot{};  // model class index -> enum index
    std::array<bool, kScenarioCount> used{};
    for (int c = 0; c < kScenarioCount; ++c) {
        ScenarioLabel l = scenario_from_string(model.classes[static_cast<std::size_t>(c)]);
        slot[static_cast<std::size_t>(c)] = static_cast<int>(l);
        if (used[static_cast<std::size_t>(static_cast<int>(l))])
            throw ValidationError("scenario model repeats a class name");
        used[static_cast<std::size_t>(static_cast<int>(l))] = true;
    }
    std::vector<double> proba = model.predict_proba(row);
    ScenarioDistribution dist;
    for (int c = 0; c < kScenarioCount; ++c)
        dist.p[static_cast<std::size_t>(slot[static_cast<std::size_t>(c)])] =
            proba[static_cast<std::size_t>(c)];
    return dist;
}

ScenarioDistribution classify_scenario(const FeatureVector& x, const gbdt::BoostedEnsemble& model) {
    return classify_scenario(std::span<const double>(x.to_row()), model);
}

namespace {

double field_value(const FeatureVector& x, const std::string& field) {
    auto split = field.rfind('_');
    if (split == std::string::npos || split + 1 >= field.size())
        throw ValidationError("road rule field must look like presence_<id>: '" + field + "'");
    int cls = 0;
    try {
        cls = std::stoi(field.substr(split + 1));
    } catch (const std::exception&) {
        throw ValidationError("road rule field has a non-numeric class id: '" + field + "'");
    }
    if (cls < 0 || cls >= x.n_classes)
        throw ValidationError("road rule field class id out of range: '" + field + "'");
    std::string kind = field.substr(0, split);
    std::size_t i = static_cast<std::size_t>(cls);
    if (kind == "presence") return x.presence[i];
    if (kind == "pixsum") return static_cast<double>(x.pixel_sum[i]);
    if (kind == "cx") return x.centroid[i].x;
    if (kind == "cy") return x.centroid[i].y;
    if (kind == "frac") {
        std::int64_t total = x.total_pixels();
        return total > 0 ? static_cast<double>(x.pixel_sum[i]) / static_cast<double>(total) : 0.0;
    }
    throw ValidationError("unknown road rule field kind: '" + kind + "'");
}

RoadPredicate::Op op_from_string(const std::string& s) {
    if (s == "eq") return RoadPredicate::Op::eq;
    if (s == "ne") return RoadPredicate::Op::ne;
    if (s == "gt") return RoadPredicate::Op::gt;
    if (s == "gte") return RoadPredicate::Op::gte;
    if (s == "lt") return RoadPredicate::Op::lt;
    if (s == "lte") return RoadPredicate::Op::lte;
    throw ValidationError("unknown road rule operator: '" + s + "'");
}

std::string op_to_string(RoadPredicate::Op op) {
    switch (op) {
        case RoadPredicate::Op::eq: return "eq";
        case RoadPredicate::Op::ne: return "ne";
        case RoadPredicate::Op::gt: return "gt";
        case RoadPredicate::Op::gte: return "gte";
        case RoadPredicate::Op::lt: return "lt";
        case RoadPredicate::Op::lte: return "lte";
    }
    throw ValidationError("unreachable");
}

}  // namespace

bool RoadPredicate::holds(const FeatureVector& x) const {
    double v = field_value(x, field);
    switch (op) {
        case Op::eq: return v == value;
        case Op::ne: return v != value;
        case Op::gt: return v > value;
        case Op::gte: return v >= value;
        case Op::lt: return v < value;
        case Op::lte: return v <= value;
    }
    return false;
}

RoadRuleSet RoadRuleSet::defaults() {
    // Class ids as in ClassTaxonomy::defaults(): 4=Zebra line, 13=Tunnel wall,
    // 9=Guardrail, 11=Sidewalk, 18=road, 19=Bridge, 1=Barrier.
    using Op = RoadPredicate::Op;
    std::vector<RoadRule> rules;
    rules.push_back({"crossing", {{"presence_4", Op::gte, 1}}, RoadType::Cross});
    rules.push_back({"tunnel", {{"frac_13", Op::gt, 0.15}}, RoadType::Tunnel});
    rules.push_back({"flyover", {{"presence_19", Op::gte, 1}}, RoadType::FlyOver});
    rules.push_back({"expressway",
                     {{"presence_9", Op::gte, 1}, {"presence_11", Op::eq, 0}, {"frac_18", Op::gt, 0.35}},
                     RoadType::Expressway});
    rules.push_back({"ramp",
                     {{"presence_9", Op::gte, 1}, {"presence_1", Op::gte, 1}},
                     RoadType::Ramp});
    return RoadRuleSet(std::move(rules));
}

RoadRuleSet RoadRuleSet::from_json(const nlohmann::json& j) {
    if (!j.is_array()) throw ValidationError("road rule JSON must be an array");
    std::vector<RoadRule> rules;
    for (const auto& jr : j) {
        RoadRule rule;
        rule.name = jr.value("name", "");
        rule.then = road_type_from_string(jr.at("then").get<std::string>());
        const auto& when = jr.at("when");
        if (!when.is_object()) throw ValidationError("road rule 'when' must be an object");
        for (auto it = when.begin(); it != when.end(); ++it) {
            if (!it.value().is_object())
                throw ValidationError("road rule predicate must map ops to values");
            for (auto op_it = it.value().begin(); op_it != it.value().end(); ++op_it)
                rule.when.push_back(
                    {it.key(), op_from_string(op_it.key()), op_it.value().get<double>()});
        }
        rules.push_back(std::move(rule));
    }
    return RoadRuleSet(std::move(rules));
}

nlohmann::json RoadRuleSet::to_json() const {
    nlohmann::json j = nlohmann::json::array();
    for (const RoadRule& rule : rules_) {
        nlohmann::json when = nlohmann::json::object();
        for (const RoadPredicate& p : rule.when) when[p.field][op_to_string(p.op)] = p.value;
        j.push_back({{"name", rule.name}, {"when", std::move(when)}, {"then", to_string(rule.then)}});
    }
    return j;
}

RoadRuleSet RoadRuleSet::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open road rule file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed road rule JSON in " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

RoadType RoadRuleSet::evaluate(const FeatureVector& x) const {
    for (const RoadRule& rule : rules_) {
        bool all = true;
        for (const RoadPredicate& p : rule.when)
            if (!p.holds(x)) {
                all = false;
                break;
            }
        if (all) return rule.then;
    }
    return RoadType::Ground;
}

RoadType classify_road_type(const FeatureVector& x, const RoadRuleSet& rules) {
    return rules.evaluate(x);
}

std::vector<ExpertScore> load_expert_scores(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open expert score file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty expert score file: " + path.string());
    std::vector<ExpertScore> scores;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        auto comma = line.find(',');
        if (comma == std::string::npos)
            throw ValidationError("expert score row " + std::to_string(line_no) + " needs two fields");
        std::string value = line.substr(comma + 1);
        if (!value.empty() && value.back() == '\r') value.pop_back();
        scores.push_back({line.substr(0, comma), parse_double(value)});
    }
    if (scores.empty()) throw ValidationError("expert score file has no rows");
    return scores;
}

CrossValidationResult cross_validate(const LabeledDataset& data, int folds,
                                     const gbdt::TrainConfig& cfg) {
    data.validate();
    if (!data.labeled()) throw ValidationError("cross_validate: dataset has no labels");
    const int k = static_cast<int>(data.class_names.size());
    std::vector<int> fold_of = stratified_folds(data.labels, k, folds, cfg.seed);

    CrossValidationResult result{ConfusionMatrix::zeros(k), 0.0};
    for (int fold = 0; fold < folds; ++fold) {
        LabeledDataset train_set;
        train_set.feature_names = data.feature_names;
        train_set.class_names = data.class_names;
        std::vector<std::size_t> test_rows;
        for (std::size_t i = 0; i < data.size(); ++i) {
            if (fold_of[i] == fold) {
                test_rows.push_back(i);
            } else {
                train_set.rows.push_back(data.rows[i]);
                train_set.labels.push_back(data.labels[i]);
            }
        }
        gbdt::BoostedEnsemble model = gbdt::train(train_set, cfg);
        for (std::size_t i : test_rows) {
            std::vector<double> p = model.predict_proba(data.rows[i]);
            int best = static_cast<int>(std::max_element(p.begin(), p.end()) - p.begin());
            ++result.cm.at(data.labels[i], best);
        }
    }
    result.f1_macro = f1_macro(result.cm);
    return result;
}

}  // namespace scenex
