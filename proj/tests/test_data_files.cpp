#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "scenex/explain.hpp"
#include "scenex/labelmap.hpp"
#include "scenex/scenario.hpp"
#include "scenex/synth.hpp"

#ifndef SCENEX_DATA_DIR
#define SCENEX_DATA_DIR "data"
#endif

using namespace scenex;

namespace {
std::filesystem::path data_dir() { return SCENEX_DATA_DIR; }
}

TEST_SUITE("data_files") {

TEST_CASE("shipped taxonomy matches the embedded default") {
    ClassTaxonomy shipped = ClassTaxonomy::load(data_dir() / "taxonomy.json");
    const ClassTaxonomy& builtin = ClassTaxonomy::defaults();
    REQUIRE(shipped.size() == builtin.size());
    for (int id = 0; id < builtin.size(); ++id) {
        CHECK(shipped.entry(id).name == builtin.entry(id).name);
        CHECK(shipped.entry(id).gray == builtin.entry(id).gray);
        CHECK(shipped.entry(id).critical == builtin.entry(id).critical);
    }
}

TEST_CASE("shipped rule files match the embedded defaults") {
    RoadRuleSet roads = RoadRuleSet::load(data_dir() / "road_rules.json");
    CHECK(roads.to_json() == RoadRuleSet::defaults().to_json());

    AdvisoryRuleSet advisories = AdvisoryRuleSet::load(data_dir() / "advisories.json");
    CHECK(advisories.to_json() == AdvisoryRuleSet::defaults().to_json());
}

TEST_CASE("shipped migration file is total over Cityscapes train ids") {
    ClassMigrationMap rules = ClassMigrationMap::load(data_dir() / "migration_cityscapes.json");
    for (int src = 0; src <= 18; ++src) CHECK(rules.covers(src));
    CHECK(rules.target_for(13) == 7);                          // car
    CHECK(rules.target_for(16) == ClassMigrationMap::kDrop);   // train

    // All targets land in the default taxonomy.
    const ClassTaxonomy& tax = ClassTaxonomy::defaults();
    for (const auto& [src, dst] : rules.rules())
        if (dst != ClassMigrationMap::kDrop) CHECK(tax.has(dst));
}

TEST_CASE("shipped example scene spec renders") {
    synth::SceneSpec spec = synth::SceneSpec::load(data_dir() / "example_crossing.json");
    CHECK(spec.scenario == ScenarioLabel::EmergencyAvoidance);
    synth::SynthFrame frame = synth::generate_frame(spec, 0);
    frame.map.validate_against(ClassTaxonomy::defaults());
}

TEST_CASE("expert score CSV loads in order") {
    auto path = std::filesystem::temp_directory_path() / "scenex_expert.csv";
    std::ofstream(path) << "frame_id,expert_score\nsec_a,8.5\nsec_b,1.3\nsec_c,3.5\nsec_d,7.5\n";
    std::vector<ExpertScore> scores = load_expert_scores(path);
    REQUIRE(scores.size() == 4);
    CHECK(scores[0].frame_id == "sec_a");
    CHECK(scores[0].score == 8.5);
    CHECK(scores[3].score == 7.5);

    std::vector<double> expert, model = {8.7, 1.2, 3.3, 7.3};
    for (const ExpertScore& s : scores) expert.push_back(s.score);
    double err = mape(model, expert, MapeDenominator::model);
    CHECK(err > 4.6);
    CHECK(err < 4.9);
}

}  // TEST_SUITE
