#include <doctest.h>

#include "oracles.hpp"
#include "scenex/scenario.hpp"
#include "scenex/synth.hpp"

using namespace scenex;

TEST_SUITE("scenario") {

TEST_CASE("relation complexity constants match the taxonomy of scenarios") {
    CHECK(kRelationComplexityValue[static_cast<int>(ScenarioLabel::FreeDriving)] == 1.0);
    CHECK(kRelationComplexityValue[static_cast<int>(ScenarioLabel::Following)] == 3.0);
    CHECK(kRelationComplexityValue[static_cast<int>(ScenarioLabel::CutIn)] == 4.0);
    CHECK(kRelationComplexityValue[static_cast<int>(ScenarioLabel::EmergencyAvoidance)] == 5.0);
    CHECK(scenario_from_string("CutIn") == ScenarioLabel::CutIn);
    CHECK(to_string(RoadType::Expressway) == "Expressway");
    CHECK_THROWS_AS(scenario_from_string("Parking"), ValidationError);
}

TEST_CASE("distribution argmax ties break to the lower enum value") {
    ScenarioDistribution d{{0.25, 0.25, 0.25, 0.25}};
    d.validate();
    CHECK(d.argmax() == ScenarioLabel::FreeDriving);
    ScenarioDistribution e{{0.1, 0.4, 0.4, 0.1}};
    CHECK(e.argmax() == ScenarioLabel::Following);
    ScenarioDistribution bad{{0.5, 0.2, 0.2, 0.2}};
    CHECK_THROWS_AS(bad.validate(), ValidationError);
}

TEST_CASE("classify_scenario maps model classes onto the enum by name") {
    // A hand-built prior-only model with shuffled class order.
    gbdt::BoostedEnsemble model;
    model.classes = {"CutIn", "FreeDriving", "EmergencyAvoidance", "Following"};
    model.feature_names = {"x"};
    model.base_score = {std::log(0.4), std::log(0.3), std::log(0.2), std::log(0.1)};
    model.trees = {{}, {}, {}, {}};

    ScenarioDistribution dist = classify_scenario(std::span<const double>(std::vector<double>{0.0}),
                                                  model);
    dist.validate();
    CHECK(dist[ScenarioLabel::CutIn] == doctest::Approx(0.4).epsilon(1e-9));
    CHECK(dist[ScenarioLabel::FreeDriving] == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(dist[ScenarioLabel::EmergencyAvoidance] == doctest::Approx(0.2).epsilon(1e-9));
    CHECK(dist[ScenarioLabel::Following] == doctest::Approx(0.1).epsilon(1e-9));
    CHECK(dist.argmax() == ScenarioLabel::CutIn);

    gbdt::BoostedEnsemble wrong = model;
    wrong.classes = {"a", "b", "c", "d"};
    CHECK_THROWS_AS(classify_scenario(std::span<const double>(std::vector<double>{0.0}), wrong),
                    ValidationError);
}

TEST_CASE("argmax invariant under margin shifts") {
    gbdt::BoostedEnsemble model;
    model.classes = {"FreeDriving", "Following", "CutIn", "EmergencyAvoidance"};
    model.feature_names = {"x"};
    model.base_score = {0.2, 1.4, -0.5, 0.9};
    model.trees = {{}, {}, {}, {}};
    std::vector<double> x = {0.0};
    ScenarioLabel before = classify_scenario(std::span<const double>(x), model).argmax();
    for (double& b : model.base_score) b += 7.25;
    CHECK(classify_scenario(std::span<const double>(x), model).argmax() == before);
}

TEST_CASE("road rules: table lookups and fallback") {
    const ClassTaxonomy& tax = ClassTaxonomy::defaults();
    RoadRuleSet rules = RoadRuleSet::defaults();

    LabelMap zebra = LabelMap::filled(20, 20, 18);
    for (int x = 3; x < 9; ++x) zebra.set(x, 15, 4);
    CHECK(classify_road_type(extract_features(zebra, tax), rules) == RoadType::Cross);

    LabelMap plain = LabelMap::filled(20, 20, 0);
    CHECK(classify_road_type(extract_features(plain, tax), rules) == RoadType::Ground);

    // Tunnel-wall share above the threshold.
    LabelMap tunnel = LabelMap::filled(20, 20, 18);
    for (int y = 0; y < 20; ++y)
        for (int x = 0; x < 20; ++x)
            if (y < 4) tunnel.set(x, y, 13);
    CHECK(classify_road_type(extract_features(tunnel, tax), rules) == RoadType::Tunnel);

    // Guardrail, no sidewalk, mostly road.
    LabelMap express = LabelMap::filled(20, 20, 18);
    for (int y = 0; y < 20; ++y) {
        express.set(0, y, 9);
        express.set(19, y, 16);
    }
    CHECK(classify_road_type(extract_features(express, tax), rules) == RoadType::Expressway);

    // Adding a sidewalk strip knocks out the expressway rule.
    LabelMap with_sidewalk = express;
    for (int y = 0; y < 20; ++y) with_sidewalk.set(18, y, 11);
    CHECK(classify_road_type(extract_features(with_sidewalk, tax), rules) == RoadType::Ground);
}

TEST_CASE("road rule JSON round trip and evaluation order") {
    RoadRuleSet rules = RoadRuleSet::defaults();
    RoadRuleSet back = RoadRuleSet::from_json(rules.to_json());
    REQUIRE(back.rules().size() == rules.rules().size());

    const ClassTaxonomy& tax = ClassTaxonomy::defaults();
    Rng rng(6);
    for (int trial = 0; trial < 40; ++trial) {
        LabelMap m = oracles::random_map(rng, 16, 16, tax.size());
        FeatureVector fv = extract_features(m, tax);
        CHECK(back.evaluate(fv) == rules.evaluate(fv));
    }

    CHECK_THROWS_AS(RoadRuleSet::from_json(nlohmann::json{{"bad", 1}}), ValidationError);
}

TEST_CASE("permuting non-overlapping rules changes nothing on the corpus") {
    // In synthetic scenes zebra, bridge and tunnel-wall classes never share a
    // frame, so their rules are disjoint there.
    std::vector<RoadRule> rules = RoadRuleSet::defaults().rules();
    std::vector<RoadRule> permuted = {rules[2], rules[0], rules[1], rules[3], rules[4]};
    RoadRuleSet base{std::vector<RoadRule>(rules)};
    RoadRuleSet shuffled{std::move(permuted)};

    const ClassTaxonomy& tax = ClassTaxonomy::defaults();
    synth::Corpus corpus = synth::generate_corpus(48, 17);
    for (std::size_t i = 0; i < corpus.specs.size(); ++i) {
        synth::SynthFrame frame = synth::generate_frame(corpus.specs[i], corpus.frame_t[i]);
        FeatureVector fv = extract_features(frame.map, tax);
        CHECK(base.evaluate(fv) == shuffled.evaluate(fv));
    }
}

TEST_CASE("synthetic corpus cross-validates cleanly") {
    synth::Corpus corpus = synth::generate_corpus(120, 99);
    gbdt::TrainConfig cfg;
    cfg.rounds = 20;
    cfg.seed = 7;
    CrossValidationResult r = cross_validate(corpus.dataset, 5, cfg);
    CHECK(r.cm.total() == 120);
    CHECK(r.f1_macro >= 0.85);

    CrossValidationResult again = cross_validate(corpus.dataset, 5, cfg);
    CHECK(again.cm.counts == r.cm.counts);
    CHECK(again.f1_macro == r.f1_macro);
}

TEST_CASE("shuffled labels score near chance") {
    synth::Corpus corpus = synth::generate_corpus(120, 5);
    LabeledDataset shuffled = corpus.dataset;
    Rng rng(123);
    rng.shuffle(shuffled.labels);
    gbdt::TrainConfig cfg;
    cfg.rounds = 10;
    cfg.seed = 3;
    CrossValidationResult r = cross_validate(shuffled, 5, cfg);
    CHECK(r.f1_macro > 0.10);
    CHECK(r.f1_macro < 0.40);
}

TEST_CASE("cross_validate rejects classes thinner than the fold count") {
    LabeledDataset data;
    data.feature_names = {"x"};
    data.class_names = {"a", "b"};
    data.rows = {{0}, {1}, {2}, {3}};
    data.labels = {0, 0, 0, 1};
    gbdt::TrainConfig cfg;
    CHECK_THROWS_AS(cross_validate(data, 3, cfg), ValidationError);
}

}  // TEST_SUITE
