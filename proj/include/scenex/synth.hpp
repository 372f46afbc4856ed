#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "scenex/dataset.hpp"
#include "scenex/explain.hpp"
#include "scenex/labelmap.hpp"
#include "scenex/scenario.hpp"

namespace scenex::synth {

// One moving conflict object. Positions are centers in pixels, velocities in
// pixels/second.
struct ObjectSpec {
    int class_id = 7;  // Car
    double x0 = 0;
    double y0 = 0;
    double vx = 0;
    double vy = 0;
    int width = 24;
    int height = 14;
};

// Fully materialized scene recipe; the seed pins every remaining choice, so
// identical specs render identical frames.
struct SceneSpec {
    ScenarioLabel scenario = ScenarioLabel::FreeDriving;
    RoadType road = RoadType::Ground;
    int width = 320;
    int height = 180;
    double fps = 25.0;
    int frames = 40;
    std::vector<ObjectSpec> objects;
    double infrastructure_density = 0.5;  // 0..1, scales scenery coverage
    LightColor light = LightColor::green;
    double label_flip_prob = 0.0;
    std::uint64_t seed = 1;

    // Scenario-shaped object placement with seeded jitter; objects stay in
    // frame for the whole duration.
    static SceneSpec preset(ScenarioLabel scenario, RoadType road, std::uint64_t seed);

    static SceneSpec from_json(const nlohmann::json& j);
    nlohmann::json to_json() const;
    static SceneSpec load(const std::filesystem::path& path);
    void validate() const;
};

struct ObjectTruth {
    int class_id = 0;
    double cx = 0;
    double cy = 0;
    double vx = 0;
    double vy = 0;
    double ttc = 0;  // analytic, +inf when not closing
};

struct GroundTruth {
    int frame = 0;
    ScenarioLabel scenario = ScenarioLabel::FreeDriving;
    RoadType road = RoadType::Ground;
    LightColor light = LightColor::unknown;
    std::vector<ObjectTruth> objects;
};

struct SynthFrame {
    LabelMap map;
    RgbImage rgb;
    GroundTruth truth;
};

SynthFrame generate_frame(const SceneSpec& spec, int t);

struct Corpus {
    std::vector<SceneSpec> specs;   // one per frame
    std::vector<int> frame_t;       // render time per frame
    LabeledDataset dataset;         // features + scenario labels
    std::vector<GroundTruth> truths;
};

// Balanced corpus: scenario labels cycle through the four classes, road types
// through all six. Feature rows use the default taxonomy.
Corpus generate_corpus(int count, std::uint64_t seed);

// Corpus from explicit specs, one frame per spec rendered at t = 0.
Corpus generate_corpus(const std::vector<SceneSpec>& specs);

// Corpus as files: frame_NNNNNN.pgm / .ppm, features.csv, truth.csv.
void write_corpus(const Corpus& corpus, const std::filesystem::path& dir);

// One spec rendered over all its frames plus truth.csv.
void write_sequence(const SceneSpec& spec, const std::filesystem::path& dir);

void save_truth_csv(const std::vector<GroundTruth>& truths, const std::filesystem::path& path);

}  // namespace scenex::synth
