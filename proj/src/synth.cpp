#include "scenex/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>

#include "scenex/features.hpp"

namespace scenex::synth {

namespace {

// Class ids from ClassTaxonomy::defaults().
constexpr int kBackground = 0, kBarrier = 1, kBuilding = 2, kSky = 3, kZebra = 4, kSign = 5,
              kPedestrian = 6, kCar = 7, kNmt = 8, kGuardrail = 9, kInfra = 10, kSidewalk = 11,
              kRoadLine = 12, kTunnelWall = 13, kTree = 15, kTerrain = 16, kRoad = 18, kBridge = 19,
              kPole = 22;

struct Rgb {
    std::uint8_t r, g, b;
};

constexpr std::array<Rgb, 23> kPalette = {{
    {40, 40, 40},    // Background
    {180, 120, 60},  // Barrier
    {140, 140, 150}, // Building
    {120, 180, 235}, // Sky
    {235, 235, 235}, // Zebra line
    {128, 128, 128}, // Sign housing, lens drawn separately
    {220, 100, 60},  // Pedestrian
    {30, 60, 200},   // Car
    {200, 60, 160},  // nmt
    {170, 170, 170}, // Guardrail
    {90, 110, 130},  // infra
    {150, 140, 130}, // Sidewalk
    {250, 250, 210}, // Road line
    {70, 60, 55},    // Tunnel wall
    {120, 100, 90},  // Wall
    {40, 130, 50},   // Tree
    {110, 140, 70},  // Terrain
    {150, 120, 90},  // Fence
    {90, 90, 95},    // road
    {100, 90, 110},  // Bridge
    {255, 140, 0},   // Cone
    {190, 190, 185}, // Curb
    {60, 60, 60},    // pole
}};

Rgb light_rgb(LightColor c) {
    switch (c) {
        case LightColor::red: return {255, 0, 0};
        case LightColor::green: return {0, 255, 0};
        case LightColor::yellow: return {255, 255, 0};
        case LightColor::unknown: return {128, 128, 128};
    }
    return {128, 128, 128};
}

struct Canvas {
    LabelMap map;
    RgbImage rgb;

    void rect(int x0, int y0, int w, int h, int cls) {
        const Rgb& color = kPalette[static_cast<std::size_t>(cls)];
        rect(x0, y0, w, h, cls, color);
    }

    void rect(int x0, int y0, int w, int h, int cls, Rgb color) {
        int x1 = std::min(map.width, x0 + w);
        int y1 = std::min(map.height, y0 + h);
        x0 = std::max(0, x0);
        y0 = std::max(0, y0);
        for (int y = y0; y < y1; ++y) {
            for (int x = x0; x < x1; ++x) {
                map.set(x, y, static_cast<std::uint8_t>(cls));
                rgb.set(x, y, color.r, color.g, color.b);
            }
        }
    }
};

std::uint64_t mix(std::uint64_t a, std::uint64_t b) {
    return a * 0x9e3779b97f4a7c15ull + b + 0x7f4a7c15ull;
}

}  // namespace

SceneSpec SceneSpec::preset(ScenarioLabel scenario, RoadType road, std::uint64_t seed) {
    SceneSpec spec;
    spec.scenario = scenario;
    spec.road = road;
    spec.seed = seed;
    Rng rng(mix(seed, 0xabcdef));
    spec.infrastructure_density = rng.uniform(0.3, 0.8);
    spec.light = static_cast<LightColor>(rng.uniform_int(0, 2));  // red/green/yellow

    const double w = spec.width, h = spec.height;
    const double duration = spec.frames / spec.fps;
    ObjectSpec obj;
    switch (scenario) {
        case ScenarioLabel::FreeDriving:
            return spec;  // nothing ahead
        case ScenarioLabel::Following:
            obj.class_id = kCar;
            obj.width = static_cast<int>(w * rng.uniform(0.10, 0.12));
            obj.height = static_cast<int>(h * rng.uniform(0.095, 0.115));
            obj.x0 = w * 0.5 + rng.uniform(-4.0, 4.0);
            obj.y0 = h * 0.62 + rng.uniform(-5.0, 5.0);
            obj.vx = rng.uniform(-3.0, 3.0);
            obj.vy = rng.uniform(-2.0, 2.0);
            break;
        case ScenarioLabel::CutIn: {
            obj.class_id = kCar;
            obj.width = static_cast<int>(w * rng.uniform(0.090, 0.100));
            obj.height = static_cast<int>(h * rng.uniform(0.085, 0.095));
            bool from_left = rng.below(2) == 0;
            obj.x0 = (from_left ? w * 0.37 : w * 0.63) + rng.uniform(-4.0, 4.0);
            obj.y0 = h * 0.58 + rng.uniform(-4.0, 4.0);
            obj.vx = (from_left ? 1.0 : -1.0) * rng.uniform(12.0, 18.0);
            obj.vy = rng.uniform(2.0, 6.0);
            break;
        }
        case ScenarioLabel::EmergencyAvoidance: {
            int kind = static_cast<int>(rng.below(3));
            if (kind == 0) {
                obj.class_id = kCar;
                obj.width = static_cast<int>(w * rng.uniform(0.075, 0.085));
                obj.height = static_cast<int>(h * rng.uniform(0.065, 0.075));
            } else if (kind == 1) {
                obj.class_id = kPedestrian;
                obj.width = static_cast<int>(w * rng.uniform(0.028, 0.034));
                obj.height = static_cast<int>(h * rng.uniform(0.085, 0.10));
            } else {
                obj.class_id = kNmt;
                obj.width = static_cast<int>(w * rng.uniform(0.042, 0.050));
                obj.height = static_cast<int>(h * rng.uniform(0.080, 0.092));
            }
            bool from_left = rng.below(2) == 0;
            obj.vx = (from_left ? 1.0 : -1.0) * rng.uniform(85.0, 120.0);
            obj.vy = rng.uniform(15.0, 30.0);
            double travel = std::abs(obj.vx) * duration;
            double margin = obj.width / 2.0 + 2.0;
            obj.x0 = from_left ? margin + rng.uniform(0.0, std::max(1.0, w - travel - 2 * margin))
                               : w - margin - rng.uniform(0.0, std::max(1.0, w - travel - 2 * margin));
            obj.y0 = h * rng.uniform(0.52, 0.58);
            break;
        }
    }
    // Clamp the vertical drift so the block stays on the road band.
    double y_end = obj.y0 + obj.vy * duration;
    double y_limit = h - obj.height / 2.0 - 2.0;
    if (y_end > y_limit) obj.vy = (y_limit - obj.y0) / duration;
    spec.objects.push_back(obj);
    return spec;
}

void SceneSpec::validate() const {
    if (width < 32 || height < 32) throw ValidationError("scene spec: frame must be at least 32x32");
    if (fps <= 0) throw ValidationError("scene spec: fps must be positive");
    if (frames < 1) throw ValidationError("scene spec: frames must be >= 1");
    if (label_flip_prob < 0 || label_flip_prob > 1)
        throw ValidationError("scene spec: label_flip_prob must be in [0,1]");
    if (infrastructure_density < 0 || infrastructure_density > 1)
        throw ValidationError("scene spec: infrastructure_density must be in [0,1]");
    for (const ObjectSpec& obj : objects) {
        if (obj.width < 2 || obj.height < 2)
            throw ValidationError("scene spec: objects must be at least 2x2");
        if (!ClassTaxonomy::defaults().has(obj.class_id))
            throw ValidationError("scene spec: object class id out of range");
        for (int t : {0, frames - 1}) {
            double cx = obj.x0 + obj.vx * t / fps;
            double cy = obj.y0 + obj.vy * t / fps;
            if (cx - obj.width / 2.0 < 0 || cx + obj.width / 2.0 > width || cy - obj.height / 2.0 < 0 ||
                cy + obj.height / 2.0 > height)
                throw ValidationError("scene spec: object leaves the frame during the sequence");
        }
    }
}

SceneSpec SceneSpec::from_json(const nlohmann::json& j) {
    SceneSpec spec;
    spec.scenario = scenario_from_string(j.at("scenario").get<std::string>());
    if (j.contains("road")) spec.road = road_type_from_string(j.at("road").get<std::string>());
    spec.width = j.value("width", spec.width);
    spec.height = j.value("height", spec.height);
    spec.fps = j.value("fps", spec.fps);
    spec.frames = j.value("frames", spec.frames);
    spec.seed = j.value("seed", spec.seed);
    spec.infrastructure_density = j.value("infrastructure_density", spec.infrastructure_density);
    spec.label_flip_prob = j.value("label_flip_prob", spec.label_flip_prob);
    if (j.contains("light")) spec.light = light_color_from_string(j.at("light").get<std::string>());
    if (j.contains("objects")) {
        for (const auto& jo : j.at("objects")) {
            ObjectSpec obj;
            obj.class_id = jo.value("class_id", obj.class_id);
            obj.x0 = jo.at("x0").get<double>();
            obj.y0 = jo.at("y0").get<double>();
            obj.vx = jo.value("vx", 0.0);
            obj.vy = jo.value("vy", 0.0);
            obj.width = jo.value("width", obj.width);
            obj.height = jo.value("height", obj.height);
            spec.objects.push_back(obj);
        }
    } else {
        SceneSpec shaped = preset(spec.scenario, spec.road, spec.seed);
        spec.objects = shaped.objects;
    }
    spec.validate();
    return spec;
}

nlohmann::json SceneSpec::to_json() const {
    nlohmann::json objs = nlohmann::json::array();
    for (const ObjectSpec& obj : objects)
        objs.push_back({{"class_id", obj.class_id},
                        {"x0", obj.x0},
                        {"y0", obj.y0},
                        {"vx", obj.vx},
                        {"vy", obj.vy},
                        {"width", obj.width},
                        {"height", obj.height}});
    return nlohmann::json{{"scenario", to_string(scenario)},
                          {"road", to_string(road)},
                          {"width", width},
                          {"height", height},
                          {"fps", fps},
                          {"frames", frames},
                          {"seed", seed},
                          {"infrastructure_density", infrastructure_density},
                          {"label_flip_prob", label_flip_prob},
                          {"light", to_string(light)},
                          {"objects", std::move(objs)}};
}

SceneSpec SceneSpec::load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open scene spec file: " + path.string());
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed scene spec JSON in " + path.string() + ": " + e.what());
    }
    return from_json(j);
}

SynthFrame generate_frame(const SceneSpec& spec, int t) {
    spec.validate();
    if (t < 0 || t >= spec.frames)
        throw ValidationError("generate_frame: t " + std::to_string(t) + " out of range [0," +
                              std::to_string(spec.frames) + ")");

    const int w = spec.width, h = spec.height;
    Canvas canvas;
    canvas.map = LabelMap::filled(w, h, kBackground);
    canvas.rgb = RgbImage::filled(w, h, kPalette[0].r, kPalette[0].g, kPalette[0].b);

    Rng layout(mix(spec.seed, 0x5ce9e));  // scene dressing, frame independent
    const double density = spec.infrastructure_density;
    const int horizon = h * 2 / 5;
    const int road_l = w * 18 / 100;
    const int road_r = w * 82 / 100;

    // Upper band.
    if (spec.road == RoadType::Tunnel) {
        canvas.rect(0, 0, w, horizon, kTunnelWall);
    } else {
        canvas.rect(0, 0, w, horizon, kSky);
        if (spec.road == RoadType::FlyOver)
            canvas.rect(0, horizon / 3, w, horizon / 4 + 2, kBridge);
        int bw = static_cast<int>(w * 0.10 * (0.5 + density)) + layout.uniform_int(0, 6);
        int bh = horizon - layout.uniform_int(2, 10);
        canvas.rect(0, horizon - bh, bw, bh, kBuilding);
        canvas.rect(w - bw + layout.uniform_int(-4, 4), horizon - bh + layout.uniform_int(0, 6), bw, bh,
                    kBuilding);
        int tw = static_cast<int>(w * 0.05 * (0.5 + density)) + 2;
        canvas.rect(bw + layout.uniform_int(0, 4), horizon - tw - 2, tw, tw + 2, kTree);
        canvas.rect(w - bw - tw - layout.uniform_int(0, 4), horizon - tw - 4, tw, tw + 4, kTree);
    }

    // Road band and shoulders.
    canvas.rect(0, horizon, w, h - horizon, kTerrain);
    canvas.rect(road_l, horizon, road_r - road_l, h - horizon, kRoad);
    switch (spec.road) {
        case RoadType::Ground:
        case RoadType::Cross: {
            int sw = static_cast<int>(w * 0.06);
            canvas.rect(road_l - sw, horizon, sw, h - horizon, kSidewalk);
            canvas.rect(road_r, horizon, sw, h - horizon, kSidewalk);
            break;
        }
        case RoadType::Expressway:
            canvas.rect(road_l - 3, horizon, 3, h - horizon, kGuardrail);
            canvas.rect(road_r, horizon, 3, h - horizon, kGuardrail);
            break;
        case RoadType::Ramp:
            canvas.rect(road_l - 3, horizon, 3, h - horizon, kGuardrail);
            canvas.rect(road_r, horizon, 4, h - horizon, kBarrier);
            break;
        case RoadType::FlyOver:
            canvas.rect(road_l - 3, horizon, 3, h - horizon, kGuardrail);
            canvas.rect(road_r, horizon, 3, h - horizon, kGuardrail);
            break;
        case RoadType::Tunnel: {
            int tw2 = static_cast<int>(w * 0.05);
            canvas.rect(road_l - tw2, horizon, tw2, h - horizon, kTunnelWall);
            canvas.rect(road_r, horizon, tw2, h - horizon, kTunnelWall);
            break;
        }
    }

    // Dashed lane lines scroll with t toward the viewer.
    const int lane_w = std::max(2, w / 160);
    const int dash_on = 8, dash_cycle = 14;
    for (int lane_x : {w * 40 / 100, w * 60 / 100}) {
        for (int y = horizon; y < h; ++y) {
            int phase = (y + t * 2) % dash_cycle;
            if (phase < dash_on)
                canvas.rect(lane_x, y, lane_w, 1, kRoadLine);
        }
    }

    if (spec.road == RoadType::Cross) {
        // Zebra band near the bottom plus a signal head.
        int zebra_top = h * 78 / 100;
        int zebra_h = std::max(4, h * 7 / 100);
        for (int x = road_l + 2; x + 6 <= road_r - 2; x += 12)
            canvas.rect(x, zebra_top, 6, zebra_h, kZebra);
        int sign_w = std::max(4, w / 50);
        int sign_h = sign_w * 2;
        int sign_x = road_r - w / 10;
        int sign_y = horizon - sign_h - 2;
        canvas.rect(sign_x + sign_w / 2 - 1, sign_y + sign_h, 2, h * 8 / 100, kPole);
        canvas.rect(sign_x, sign_y, sign_w, sign_h, kSign, light_rgb(spec.light));
    }
    if (density > 0.55 && spec.road != RoadType::Tunnel) {
        // Overhead gantry.
        canvas.rect(road_l, horizon - h / 30 - 1, road_r - road_l, h / 30, kInfra);
    }

    SynthFrame frame;
    frame.truth.frame = t;
    frame.truth.scenario = spec.scenario;
    frame.truth.road = spec.road;
    frame.truth.light = spec.road == RoadType::Cross ? spec.light : LightColor::unknown;

    for (const ObjectSpec& obj : spec.objects) {
        double cx = obj.x0 + obj.vx * t / spec.fps;
        double cy = obj.y0 + obj.vy * t / spec.fps;
        int left = static_cast<int>(std::lround(cx - (obj.width - 1) / 2.0));
        int top = static_cast<int>(std::lround(cy - (obj.height - 1) / 2.0));
        canvas.rect(left, top, obj.width, obj.height, obj.class_id);
        ObjectTruth truth;
        truth.class_id = obj.class_id;
        truth.cx = cx;
        truth.cy = cy;
        truth.vx = obj.vx;
        truth.vy = obj.vy;
        truth.ttc = obj.vy > 0 ? (h - cy) / obj.vy : std::numeric_limits<double>::infinity();
        frame.truth.objects.push_back(truth);
    }

    if (spec.label_flip_prob > 0) {
        Rng noise(mix(spec.seed, 0xf11b000 + static_cast<std::uint64_t>(t)));
        for (std::uint8_t& cell : canvas.map.cells)
            if (noise.uniform() < spec.label_flip_prob)
                cell = static_cast<std::uint8_t>(noise.below(
                    static_cast<std::uint64_t>(ClassTaxonomy::defaults().size())));
    }

    frame.map = std::move(canvas.map);
    frame.rgb = std::move(canvas.rgb);
    return frame;
}

Corpus generate_corpus(int count, std::uint64_t seed) {
    if (count < 1) throw ValidationError("generate_corpus: count must be >= 1");
    const ClassTaxonomy& tax = ClassTaxonomy::defaults();
    Corpus corpus;
    corpus.dataset.feature_names = FeatureVector::column_names(tax.size());
    corpus.dataset.class_names.assign(scenario_names().begin(), scenario_names().end());

    for (int i = 0; i < count; ++i) {
        auto scenario = static_cast<ScenarioLabel>(i % kScenarioCount);
        auto road = static_cast<RoadType>((i / kScenarioCount) % kRoadTypeCount);
        SceneSpec spec = SceneSpec::preset(scenario, road, mix(seed, static_cast<std::uint64_t>(i)));
        Rng pick(mix(seed, 0x70000 + static_cast<std::uint64_t>(i)));
        int t = static_cast<int>(pick.below(6));  // early frames keep cut-ins near the lane line
        SynthFrame frame = generate_frame(spec, t);
        corpus.specs.push_back(std::move(spec));
        corpus.frame_t.push_back(t);
        corpus.dataset.rows.push_back(extract_features(frame.map, tax).to_row());
        corpus.dataset.labels.push_back(static_cast<int>(scenario));
        frame.truth.frame = i;  // corpus indexes frames, not sequence time
        corpus.truths.push_back(std::move(frame.truth));
    }
    return corpus;
}

Corpus generate_corpus(const std::vector<SceneSpec>& specs) {
    if (specs.empty()) throw ValidationError("generate_corpus: need at least one spec");
    const ClassTaxonomy& tax = ClassTaxonomy::defaults();
    Corpus corpus;
    corpus.dataset.feature_names = FeatureVector::column_names(tax.size());
    corpus.dataset.class_names.assign(scenario_names().begin(), scenario_names().end());
    for (std::size_t i = 0; i < specs.size(); ++i) {
        SynthFrame frame = generate_frame(specs[i], 0);
        corpus.specs.push_back(specs[i]);
        corpus.frame_t.push_back(0);
        corpus.dataset.rows.push_back(extract_features(frame.map, tax).to_row());
        corpus.dataset.labels.push_back(static_cast<int>(specs[i].scenario));
        frame.truth.frame = static_cast<int>(i);
        corpus.truths.push_back(std::move(frame.truth));
    }
    return corpus;
}

namespace {

std::string frame_name(int i, const char* ext) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "frame_%06d.%s", i, ext);
    return buf;
}

}  // namespace

void save_truth_csv(const std::vector<GroundTruth>& truths, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + path.string());
    out << "frame_id,scenario,road_type,light,object_index,class_id,cx,cy,vx,vy,ttc\n";
    for (const GroundTruth& g : truths) {
        std::string prefix = std::to_string(g.frame) + "," + to_string(g.scenario) + "," +
                             to_string(g.road) + "," + to_string(g.light);
        if (g.objects.empty()) {
            out << prefix << ",-1,,,,,\n";
            continue;
        }
        for (std::size_t o = 0; o < g.objects.size(); ++o) {
            const ObjectTruth& obj = g.objects[o];
            out << prefix << ',' << o << ',' << obj.class_id << ',' << format_double(obj.cx) << ','
                << format_double(obj.cy) << ',' << format_double(obj.vx) << ','
                << format_double(obj.vy) << ',' << format_double(obj.ttc) << '\n';
        }
    }
    if (!out) throw IoError("write failed: " + path.string());
}

void write_corpus(const Corpus& corpus, const std::filesystem::path& dir) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory: " + dir.string());
    for (std::size_t i = 0; i < corpus.specs.size(); ++i) {
        SynthFrame frame = generate_frame(corpus.specs[i], corpus.frame_t[i]);
        save_labelmap(frame.map, dir / frame_name(static_cast<int>(i), "pgm"));
        save_ppm(frame.rgb, dir / frame_name(static_cast<int>(i), "ppm"));
    }
    save_feature_csv(corpus.dataset, dir / "features.csv");
    save_truth_csv(corpus.truths, dir / "truth.csv");
}

void write_sequence(const SceneSpec& spec, const std::filesystem::path& dir) {
    spec.validate();
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) throw IoError("cannot create directory: " + dir.string());
    std::vector<GroundTruth> truths;
    for (int t = 0; t < spec.frames; ++t) {
        SynthFrame frame = generate_frame(spec, t);
        save_labelmap(frame.map, dir / frame_name(t, "pgm"));
        save_ppm(frame.rgb, dir / frame_name(t, "ppm"));
        truths.push_back(std::move(frame.truth));
    }
    save_truth_csv(truths, dir / "truth.csv");
    std::ofstream spec_out(dir / "spec.json");
    spec_out << spec.to_json().dump(2) << '\n';
}

}  // namespace scenex::synth
