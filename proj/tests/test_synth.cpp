#include <doctest.h>

#include <cmath>
#include <filesystem>

#include "oracles.hpp"
#include "scenex/motion.hpp"
#include "scenex/synth.hpp"

using namespace scenex;
using synth::SceneSpec;

TEST_SUITE("synth") {

TEST_CASE("frames are deterministic and taxonomy-valid") {
    SceneSpec spec = SceneSpec::preset(ScenarioLabel::Following, RoadType::Expressway, 5);
    synth::SynthFrame a = synth::generate_frame(spec, 7);
    synth::SynthFrame b = synth::generate_frame(spec, 7);
    CHECK(a.map == b.map);
    CHECK(a.rgb.pixels == b.rgb.pixels);
    a.map.validate_against(ClassTaxonomy::defaults());

    CHECK_THROWS_AS(synth::generate_frame(spec, spec.frames), ValidationError);
    CHECK_THROWS_AS(synth::generate_frame(spec, -1), ValidationError);
}

TEST_CASE("following spec keeps a car in the ego lane band") {
    SceneSpec spec = SceneSpec::preset(ScenarioLabel::Following, RoadType::Ground, 21);
    REQUIRE(spec.objects.size() == 1);
    CHECK(spec.objects[0].class_id == 7);
    for (int t = 0; t < spec.frames; t += 8) {
        synth::SynthFrame frame = synth::generate_frame(spec, t);
        REQUIRE(frame.truth.objects.size() == 1);
        double cx = frame.truth.objects[0].cx;
        CHECK(cx > spec.width * 0.40);
        CHECK(cx < spec.width * 0.60);
        auto hist = oracles::histogram(frame.map, 23);
        CHECK(hist[7] > 0);
    }
}

TEST_CASE("crosser ground truth carries the configured lateral speed") {
    SceneSpec spec;
    spec.scenario = ScenarioLabel::EmergencyAvoidance;
    spec.road = RoadType::Cross;
    spec.frames = 20;
    spec.objects.push_back({7, 60.0, 100.0, 100.0, 20.0, 24, 12});
    spec.validate();
    synth::SynthFrame frame = synth::generate_frame(spec, 4);
    REQUIRE(frame.truth.objects.size() == 1);
    CHECK(frame.truth.objects[0].vx == 100.0);
    CHECK(frame.truth.objects[0].cx == doctest::Approx(60.0 + 100.0 * 4 / 25.0));
    CHECK(frame.truth.objects[0].ttc ==
          doctest::Approx((spec.height - frame.truth.objects[0].cy) / 20.0));
}

TEST_CASE("rendered object centers track the analytic ones within rounding") {
    SceneSpec spec;
    spec.scenario = ScenarioLabel::EmergencyAvoidance;
    spec.road = RoadType::Expressway;
    spec.frames = 30;
    spec.objects.push_back({7, 50.0, 95.0, 75.0, 25.0, 25, 13});
    spec.validate();

    std::vector<Point2d> estimated, truth;
    for (int t = 0; t < spec.frames; ++t) {
        synth::SynthFrame frame = synth::generate_frame(spec, t);
        std::vector<PixelPoint> pts = conflict_points(frame.map, {7});
        REQUIRE(!pts.empty());
        DbscanResult clusters = dbscan(pts, 7.0, 8);
        REQUIRE(clusters.clusters.size() == 1);
        estimated.push_back(clusters.clusters[0].center);
        truth.push_back({frame.truth.objects[0].cx, frame.truth.objects[0].cy});
    }
    CHECK(rmse_points(estimated, truth) <= 1.0);
}

TEST_CASE("ground-truth ttc matches motion-module ttc within one frame interval") {
    SceneSpec spec;
    spec.scenario = ScenarioLabel::EmergencyAvoidance;
    spec.road = RoadType::Ground;
    spec.frames = 25;
    spec.fps = 25.0;
    // 2 px/frame vertical, 4 px/frame lateral: integer moves, exact velocity.
    spec.objects.push_back({7, 60.0, 90.0, 100.0, 50.0, 24, 12});
    spec.validate();

    std::vector<std::vector<Point2d>> centers;
    std::vector<double> truth_ttc;
    for (int t = 0; t < spec.frames; ++t) {
        synth::SynthFrame frame = synth::generate_frame(spec, t);
        DbscanResult clusters = dbscan(conflict_points(frame.map, {7}), 7.0, 8);
        REQUIRE(clusters.clusters.size() == 1);
        centers.push_back({clusters.clusters[0].center});
        truth_ttc.push_back(frame.truth.objects[0].ttc);
    }
    std::vector<Trajectory> tracks = track(centers, spec.fps, 20.0);
    REQUIRE(tracks.size() == 1);
    std::vector<KinematicState> states = kinematics(tracks[0], spec.height);
    double frame_dt = 1.0 / spec.fps;
    for (std::size_t i = 1; i < states.size(); ++i) {
        REQUIRE(states[i].ttc);
        CHECK(std::abs(*states[i].ttc - truth_ttc[i]) <= frame_dt + 1e-9);
        CHECK(*states[i].v_x == doctest::Approx(100.0).epsilon(1e-9));
        CHECK(*states[i].v_y == doctest::Approx(50.0).epsilon(1e-9));
    }
}

TEST_CASE("specs reject objects that leave the frame") {
    SceneSpec spec;
    spec.scenario = ScenarioLabel::EmergencyAvoidance;
    spec.frames = 50;
    spec.objects.push_back({7, 300.0, 100.0, 100.0, 0.0, 24, 12});
    CHECK_THROWS_AS(spec.validate(), ValidationError);
}

TEST_CASE("balanced corpus with reproducible features") {
    synth::Corpus corpus = synth::generate_corpus(40, 7);
    REQUIRE(corpus.dataset.size() == 40);
    auto counts = corpus.dataset.class_counts();
    for (std::int64_t c : counts) CHECK(c == 10);

    synth::Corpus again = synth::generate_corpus(40, 7);
    CHECK(again.dataset.rows == corpus.dataset.rows);
    CHECK(again.dataset.labels == corpus.dataset.labels);
}

TEST_CASE("corpus from explicit specs keeps spec order and labels") {
    std::vector<SceneSpec> specs;
    specs.push_back(SceneSpec::preset(ScenarioLabel::CutIn, RoadType::Tunnel, 1));
    specs.push_back(SceneSpec::preset(ScenarioLabel::FreeDriving, RoadType::Ground, 2));
    specs.push_back(SceneSpec::preset(ScenarioLabel::Following, RoadType::Cross, 3));
    synth::Corpus corpus = synth::generate_corpus(specs);
    REQUIRE(corpus.dataset.size() == 3);
    CHECK(corpus.dataset.labels ==
          std::vector<int>{static_cast<int>(ScenarioLabel::CutIn),
                           static_cast<int>(ScenarioLabel::FreeDriving),
                           static_cast<int>(ScenarioLabel::Following)});
    CHECK(corpus.truths[1].objects.empty());
}

TEST_CASE("corpus written to disk re-extracts to identical features") {
    synth::Corpus corpus = synth::generate_corpus(12, 3);
    auto dir = std::filesystem::temp_directory_path() / "scenex_corpus_roundtrip";
    std::filesystem::remove_all(dir);
    synth::write_corpus(corpus, dir);

    const ClassTaxonomy& tax = ClassTaxonomy::defaults();
    for (int i = 0; i < 12; ++i) {
        char name[32];
        std::snprintf(name, sizeof(name), "frame_%06d.pgm", i);
        LabelMap m = load_labelmap(dir / name);
        CHECK(extract_features(m, tax).to_row() == corpus.dataset.rows[static_cast<std::size_t>(i)]);
    }
    LabeledDataset csv = load_feature_csv(dir / "features.csv");
    CHECK(csv.rows == corpus.dataset.rows);
    CHECK(csv.labels.size() == corpus.dataset.labels.size());

    SceneSpec seq = SceneSpec::preset(ScenarioLabel::CutIn, RoadType::Ground, 9);
    seq.frames = 6;
    auto seq_dir = dir / "seq";
    synth::write_sequence(seq, seq_dir);
    CHECK(std::filesystem::exists(seq_dir / "frame_000005.pgm"));
    CHECK(std::filesystem::exists(seq_dir / "truth.csv"));
    CHECK(std::filesystem::exists(seq_dir / "spec.json"));

    SceneSpec loaded = SceneSpec::load(seq_dir / "spec.json");
    CHECK(loaded.scenario == seq.scenario);
    CHECK(loaded.objects.size() == seq.objects.size());
    synth::SynthFrame a = synth::generate_frame(loaded, 2);
    synth::SynthFrame b = synth::generate_frame(seq, 2);
    CHECK(a.map == b.map);
}

TEST_CASE("label flip noise stays deterministic and in range") {
    SceneSpec spec = SceneSpec::preset(ScenarioLabel::Following, RoadType::Ground, 13);
    spec.label_flip_prob = 0.05;
    synth::SynthFrame a = synth::generate_frame(spec, 1);
    synth::SynthFrame b = synth::generate_frame(spec, 1);
    CHECK(a.map == b.map);
    a.map.validate_against(ClassTaxonomy::defaults());

    SceneSpec clean = spec;
    clean.label_flip_prob = 0.0;
    synth::SynthFrame c = synth::generate_frame(clean, 1);
    CHECK(a.map.cells != c.map.cells);
}

}  // TEST_SUITE
