// scenex: batch front end for the label-map explanation pipeline.
//
// Exit codes: 0 success, 1 validation error, 2 I/O error. Identical inputs
// and seeds produce byte-identical outputs; --jobs only changes wall time.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "scenex/complexity.hpp"
#include "scenex/dataset.hpp"
#include "scenex/explain.hpp"
#include "scenex/features.hpp"
#include "scenex/gbdt.hpp"
#include "scenex/labelmap.hpp"
#include "scenex/metrics.hpp"
#include "scenex/motion.hpp"
#include "scenex/scenario.hpp"
#include "scenex/synth.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace scenex;

namespace {

// ---------------------------------------------------------------------------
// Run configuration

const std::set<std::string>& config_allowlist() {
    static const std::set<std::string> keys = {
        "taxonomy",   "model",     "rules",   "road_rules", "mode",      "policy",
        "k",          "classes",   "eps",     "min_pts",    "fps",       "max_jump",
        "severe_ttc", "variety_m", "n_max",   "rounds",     "depth",     "gamma",
        "lambda",     "eta",       "min_child_weight",      "seed",      "folds",
        "target_size", "count",    "jobs",    "frames",     "text",
    };
    return keys;
}

json load_config(const fs::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file: " + path.string());
    json cfg;
    try {
        in >> cfg;
    } catch (const json::exception& e) {
        throw IoError("malformed config JSON in " + path.string() + ": " + e.what());
    }
    if (!cfg.is_object()) throw ValidationError("config must be a JSON object");
    for (auto it = cfg.begin(); it != cfg.end(); ++it) {
        if (!config_allowlist().count(it.key()))
            throw ValidationError("unknown config key: '" + it.key() + "'");
        for (const char* file_key : {"taxonomy", "model", "rules", "road_rules"}) {
            if (it.key() == file_key && !fs::exists(it.value().get<std::string>()))
                throw ValidationError("config references missing file: " +
                                      it.value().get<std::string>());
        }
    }
    return cfg;
}

// Config values fill in only where the command line stayed silent.
struct ConfigOverlay {
    const CLI::App* cmd;
    const json& cfg;

    template <typename T>
    void fill(const std::string& flag, const std::string& key, T& var) const {
        if (cfg.contains(key) && cmd->count(flag) == 0) var = cfg.at(key).get<T>();
    }
};

// ---------------------------------------------------------------------------
// Small shared helpers

std::vector<fs::path> list_files(const fs::path& dir, const std::set<std::string>& exts) {
    if (!fs::exists(dir)) throw IoError("no such path: " + dir.string());
    std::vector<fs::path> files;
    if (fs::is_regular_file(dir)) {
        files.push_back(dir);
        return files;
    }
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file() && exts.count(entry.path().extension().string()))
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw ValidationError("no matching input files under " + dir.string());
    return files;
}

const std::set<std::string> kMapExts = {".pgm", ".png"};
const std::set<std::string> kRgbExts = {".ppm"};

ClassTaxonomy taxonomy_from(const std::string& path) {
    return path.empty() ? ClassTaxonomy::defaults() : ClassTaxonomy::load(path);
}

std::set<int> parse_class_list(const std::string& text) {
    std::set<int> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        try {
            out.insert(std::stoi(item));
        } catch (const std::exception&) {
            throw ValidationError("bad class id in list: '" + item + "'");
        }
    }
    if (out.empty()) throw ValidationError("class list is empty");
    return out;
}

void write_text_output(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw IoError("cannot write file: " + out_path);
    out << text;
    if (!out) throw IoError("write failed: " + out_path);
}

std::string csv_cell(const std::optional<double>& v) {
    return v ? format_double(*v) : "nan";
}

// Tracking shared by `track` and `explain`.
struct TrackingParams {
    std::set<int> classes = {6, 7, 8};  // Pedestrian, Car, nmt
    double eps = 0;                     // 0 = 2% of the frame diagonal
    int min_pts = 8;
    double fps = 25.0;
    double max_jump = 40.0;
    double severe_ttc = kSevereTtcSeconds;
};

struct TrackingResult {
    std::vector<Trajectory> tracks;
    std::vector<std::vector<KinematicState>> states;            // per track
    std::vector<std::vector<TrackState>> per_frame;             // frame -> active states
};

TrackingResult run_tracking(const std::vector<LabelMap>& maps, const TrackingParams& params) {
    if (maps.empty()) throw ValidationError("tracking needs at least one frame");
    for (const LabelMap& m : maps)
        if (m.width != maps[0].width || m.height != maps[0].height)
            throw ValidationError("tracking stage: frames must share one resolution");
    double eps = params.eps;
    if (eps <= 0)
        eps = 0.02 * std::hypot(static_cast<double>(maps[0].width),
                                static_cast<double>(maps[0].height));

    std::vector<std::vector<Point2d>> centers(maps.size());
    for (std::size_t f = 0; f < maps.size(); ++f) {
        DbscanResult clusters = dbscan(conflict_points(maps[f], params.classes), eps, params.min_pts);
        for (const Cluster& c : clusters.clusters) centers[f].push_back(c.center);
    }

    TrackingResult result;
    result.tracks = track(centers, params.fps, params.max_jump);
    result.states.resize(result.tracks.size());
    result.per_frame.resize(maps.size());
    for (std::size_t ti = 0; ti < result.tracks.size(); ++ti) {
        const Trajectory& tr = result.tracks[ti];
        if (tr.points.size() >= 2)
            result.states[ti] = kinematics(tr, maps[0].height, params.severe_ttc);
        else
            result.states[ti].resize(tr.points.size());
        for (std::size_t s = 0; s < tr.points.size(); ++s) {
            TrackState state;
            state.track_id = static_cast<int>(ti);
            state.start_frame = tr.start_frame;
            state.length = static_cast<int>(tr.points.size());
            state.position = tr.points[s];
            state.v_x = result.states[ti][s].v_x;
            state.v_y = result.states[ti][s].v_y;
            state.a_x = result.states[ti][s].a_x;
            state.a_y = result.states[ti][s].a_y;
            state.ttc = result.states[ti][s].ttc;
            state.severe = result.states[ti][s].severe;
            result.per_frame[static_cast<std::size_t>(tr.frame_at(s))].push_back(state);
        }
    }
    return result;
}

// ---------------------------------------------------------------------------
// Commands

int cmd_gray(const std::string& in, const std::string& out, const std::string& mode, int jobs) {
    GrayMode gray_mode;
    if (mode == "normalized")
        gray_mode = GrayMode::normalized;
    else if (mode == "literal")
        gray_mode = GrayMode::literal;
    else
        throw ValidationError("gray stage: mode must be 'normalized' or 'literal'");

    std::vector<fs::path> files = list_files(in, kRgbExts);
    bool dir_mode = !fs::is_regular_file(in);
    if (dir_mode) fs::create_directories(out);
    std::vector<GrayImage> results(files.size());
    parallel_for(files.size(), jobs,
                 [&](std::size_t i) { results[i] = rgb_to_gray(load_ppm(files[i]), gray_mode); });
    for (std::size_t i = 0; i < files.size(); ++i) {
        fs::path target = dir_mode ? fs::path(out) / files[i].filename().replace_extension(".pgm")
                                   : fs::path(out);
        save_gray_image(results[i], target);
    }
    return 0;
}

int cmd_eval_seg(const std::string& pred_dir, const std::string& truth_dir,
                 const std::string& policy_name, int k, const std::string& out_path) {
    MiouPolicy policy;
    if (policy_name == "exclude_absent")
        policy = MiouPolicy::exclude_absent;
    else if (policy_name == "include_absent")
        policy = MiouPolicy::include_absent;
    else
        throw ValidationError("eval-seg stage: policy must be exclude_absent or include_absent");

    std::vector<fs::path> pred_files = list_files(pred_dir, kMapExts);
    std::vector<fs::path> truth_files = list_files(truth_dir, kMapExts);
    if (pred_files.size() != truth_files.size())
        throw ValidationError("eval-seg stage: prediction and truth counts differ (" +
                              std::to_string(pred_files.size()) + " vs " +
                              std::to_string(truth_files.size()) + ")");

    ConfusionMatrix cm = ConfusionMatrix::zeros(k);
    double entropy_sum = 0;
    std::int64_t pixel_total = 0;
    for (std::size_t i = 0; i < pred_files.size(); ++i) {
        LabelMap pred = load_labelmap(pred_files[i]);
        LabelMap truth = load_labelmap(truth_files[i]);
        ConfusionMatrix frame_cm = confusion(pred, truth, k);
        for (std::size_t c = 0; c < cm.counts.size(); ++c) cm.counts[c] += frame_cm.counts[c];
        // Hard predictions read as a one-hot probability field.
        std::int64_t n = static_cast<std::int64_t>(truth.cells.size());
        std::int64_t wrong = n - frame_cm.diag_sum();
        entropy_sum += static_cast<double>(wrong) * -std::log(1e-12);
        pixel_total += n;
    }

    json report;
    report["miou"] = miou(cm, policy);
    json per_class = json::array();
    for (double v : per_class_iou(cm))
        per_class.push_back(std::isnan(v) ? json(nullptr) : json(v));
    report["per_class_iou"] = std::move(per_class);
    report["cross_entropy"] = entropy_sum / static_cast<double>(pixel_total);
    report["f1_macro"] = f1_macro(cm);
    report["confusion"] = cm.to_json();
    write_text_output(report.dump(2) + "\n", out_path);
    return 0;
}

int cmd_migrate(const std::string& in, const std::string& rules_path, const std::string& out,
                const std::string& taxonomy_path) {
    ClassTaxonomy target = taxonomy_from(taxonomy_path);
    ClassMigrationMap rules = ClassMigrationMap::load(rules_path);
    std::vector<fs::path> files = list_files(in, kMapExts);
    bool dir_mode = !fs::is_regular_file(in);
    if (dir_mode) fs::create_directories(out);
    for (const fs::path& file : files) {
        LabelMap migrated = migrate(load_labelmap(file), rules, target);
        fs::path resolved = dir_mode ? fs::path(out) / file.filename().replace_extension(".pgm")
                                     : fs::path(out);
        save_labelmap(migrated, resolved);
    }
    return 0;
}

// Scenario labels per frame from a synth truth.csv (first row of each frame).
std::vector<std::string> labels_from_truth(const fs::path& path, std::size_t expected) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open truth file: " + path.string());
    std::string line;
    if (!std::getline(in, line)) throw IoError("empty truth file: " + path.string());
    std::vector<std::string> labels;
    std::string last_frame;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string frame_id, scenario;
        std::getline(ss, frame_id, ',');
        std::getline(ss, scenario, ',');
        if (frame_id == last_frame) continue;
        last_frame = frame_id;
        labels.push_back(scenario);
    }
    if (labels.size() != expected)
        throw ValidationError("truth file has " + std::to_string(labels.size()) +
                              " frames, expected " + std::to_string(expected));
    return labels;
}

int cmd_extract(const std::string& frames, const std::string& out_csv,
                const std::string& taxonomy_path, const std::string& truth_path, int jobs) {
    ClassTaxonomy tax = taxonomy_from(taxonomy_path);
    std::vector<fs::path> files = list_files(frames, kMapExts);

    LabeledDataset data;
    data.feature_names = FeatureVector::column_names(tax.size());
    data.rows.resize(files.size());
    parallel_for(files.size(), jobs, [&](std::size_t i) {
        data.rows[i] = extract_features(load_labelmap(files[i]), tax).to_row();
    });

    if (!truth_path.empty()) {
        std::vector<std::string> labels = labels_from_truth(truth_path, files.size());
        std::vector<std::string> names = labels;
        std::sort(names.begin(), names.end());
        names.erase(std::unique(names.begin(), names.end()), names.end());
        data.class_names = names;
        for (const std::string& l : labels)
            data.labels.push_back(static_cast<int>(
                std::lower_bound(names.begin(), names.end(), l) - names.begin()));
    }
    save_feature_csv(data, out_csv);
    return 0;
}

gbdt::TrainConfig train_config_from_flags(int rounds, int depth, double gamma, double lambda,
                                          double eta, double min_child_weight, std::uint64_t seed) {
    gbdt::TrainConfig cfg;
    cfg.rounds = rounds;
    cfg.max_depth = depth;
    cfg.gamma = gamma;
    cfg.lambda = lambda;
    cfg.learning_rate = eta;
    cfg.min_child_weight = min_child_weight;
    cfg.seed = seed;
    return cfg;
}

int cmd_train(const std::string& features_csv, const std::string& out_model,
              const gbdt::TrainConfig& cfg, const std::string& loss_curve_csv) {
    LabeledDataset data = load_feature_csv(features_csv);
    if (!data.labeled())
        throw ValidationError("train stage: feature CSV has no 'label' column");
    gbdt::BoostedEnsemble model = gbdt::train(data, cfg);
    gbdt::save_model(model, out_model);
    if (!loss_curve_csv.empty()) {
        std::ostringstream csv;
        csv << "round,train_log_loss\n";
        std::vector<double> curve = gbdt::training_loss_curve(model, data);
        for (std::size_t r = 0; r < curve.size(); ++r)
            csv << r << ',' << format_double(curve[r]) << '\n';
        write_text_output(csv.str(), loss_curve_csv);
    }
    std::cerr << "trained " << model.n_classes() << "-class model, " << cfg.rounds << " rounds, "
              << data.size() << " rows\n";
    return 0;
}

int cmd_select(const std::string& features_csv, int folds, int target_size,
               const gbdt::TrainConfig& cfg, const std::string& out_path) {
    LabeledDataset data = load_feature_csv(features_csv);
    FeatureSelection sel = rfe_select(data, folds, target_size, cfg);
    write_text_output(sel.to_json().dump(2) + "\n", out_path);
    return 0;
}

int cmd_cv(const std::string& features_csv, int folds, const gbdt::TrainConfig& cfg,
           const std::string& out_path) {
    LabeledDataset data = load_feature_csv(features_csv);
    CrossValidationResult result = cross_validate(data, folds, cfg);
    json report;
    report["classes"] = data.class_names;
    report["confusion"] = result.cm.to_json();
    report["f1_macro"] = result.f1_macro;
    write_text_output(report.dump(2) + "\n", out_path);
    return 0;
}

int cmd_track(const std::string& frames, const TrackingParams& params, const std::string& out_path) {
    std::vector<fs::path> files = list_files(frames, kMapExts);
    std::vector<LabelMap> maps;
    maps.reserve(files.size());
    for (const fs::path& f : files) maps.push_back(load_labelmap(f));
    TrackingResult tracking = run_tracking(maps, params);

    std::ostringstream csv;
    csv << "frame_index,track_id,x,y,v_x,v_y,a_x,a_y,ttc\n";
    for (std::size_t ti = 0; ti < tracking.tracks.size(); ++ti) {
        const Trajectory& tr = tracking.tracks[ti];
        for (std::size_t s = 0; s < tr.points.size(); ++s) {
            const KinematicState& k = tracking.states[ti][s];
            csv << tr.frame_at(s) << ',' << ti << ',' << format_double(tr.points[s].x) << ','
                << format_double(tr.points[s].y) << ',' << csv_cell(k.v_x) << ',' << csv_cell(k.v_y)
                << ',' << csv_cell(k.a_x) << ',' << csv_cell(k.a_y) << ',' << csv_cell(k.ttc)
                << '\n';
        }
    }
    write_text_output(csv.str(), out_path);
    return 0;
}

int cmd_explain(const std::string& frames, const std::string& rgb_dir, const std::string& model_path,
                const std::string& rules_path, const std::string& road_rules_path,
                const std::string& taxonomy_path, const TrackingParams& params, double variety_m,
                double n_max, bool text_mode, int jobs, const std::string& out_path,
                const std::string& complexity_csv) {
    ClassTaxonomy tax = taxonomy_from(taxonomy_path);
    gbdt::BoostedEnsemble model = gbdt::load_model(model_path);
    AdvisoryRuleSet advisories =
        rules_path.empty() ? AdvisoryRuleSet::defaults() : AdvisoryRuleSet::load(rules_path);
    RoadRuleSet road_rules =
        road_rules_path.empty() ? RoadRuleSet::defaults() : RoadRuleSet::load(road_rules_path);

    std::vector<fs::path> files = list_files(frames, kMapExts);
    std::vector<LabelMap> maps(files.size());
    parallel_for(files.size(), jobs, [&](std::size_t i) { maps[i] = load_labelmap(files[i]); });

    std::vector<std::optional<RgbImage>> rgbs(files.size());
    if (!rgb_dir.empty()) {
        for (std::size_t i = 0; i < files.size(); ++i) {
            fs::path candidate = fs::path(rgb_dir) / files[i].filename().replace_extension(".ppm");
            if (fs::exists(candidate)) rgbs[i] = load_ppm(candidate);
        }
    }

    TrackingResult tracking = run_tracking(maps, params);

    std::vector<ExplanationReport> reports(files.size());
    parallel_for(files.size(), jobs, [&](std::size_t i) {
        FrameAnalysis analysis;
        analysis.frame_id = files[i].stem().string();
        analysis.map = &maps[i];
        if (rgbs[i]) analysis.rgb = &*rgbs[i];
        analysis.tracks = tracking.per_frame[i];
        analysis.variety_m = variety_m;
        analysis.n_max = n_max;
        reports[i] = build_report(analysis, tax, model, road_rules, advisories);
    });

    std::ostringstream out;
    for (const ExplanationReport& r : reports) {
        if (text_mode)
            out << r.to_text() << '\n';
        else
            out << r.to_json().dump() << '\n';
    }
    write_text_output(out.str(), out_path);

    if (!complexity_csv.empty()) {
        std::ostringstream csv;
        csv << "frame_id,C,m,n,n_max,ttc,d\n";
        for (const ExplanationReport& r : reports) {
            double ttc = r.complexity.inv_ttc > 0 ? 1.0 / r.complexity.inv_ttc
                                                  : std::numeric_limits<double>::infinity();
            csv << r.frame_id << ',' << format_double(r.complexity.relation_c) << ','
                << format_double(r.complexity.variety_m) << ','
                << format_double(r.complexity.quantity_n) << ','
                << format_double(r.complexity.n_max) << ',' << format_double(ttc) << ','
                << format_double(r.complexity.d) << '\n';
        }
        write_text_output(csv.str(), complexity_csv);
    }
    return 0;
}

int cmd_synth(const std::string& spec_path, int count, std::uint64_t seed,
              const std::string& out_dir) {
    if (!spec_path.empty()) {
        synth::SceneSpec spec = synth::SceneSpec::load(spec_path);
        synth::write_sequence(spec, out_dir);
        std::cerr << "wrote " << spec.frames << " frames to " << out_dir << "\n";
    } else {
        if (count < 1) throw ValidationError("synth stage: --count must be >= 1");
        synth::Corpus corpus = synth::generate_corpus(count, seed);
        synth::write_corpus(corpus, out_dir);
        std::cerr << "wrote corpus of " << count << " frames to " << out_dir << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Textual explanation toolkit for driving-scene label maps"};
    app.require_subcommand(1);

    std::string config_path;
    app.add_option("--config", config_path, "JSON config; flags override keys of the same name");

    // gray
    auto* gray = app.add_subcommand("gray", "Convert RGB (PPM) frames to gray-scale PGM");
    std::string gray_in, gray_out, gray_mode = "normalized";
    int gray_jobs = 1;
    gray->add_option("input", gray_in)->required();
    gray->add_option("output", gray_out)->required();
    gray->add_option("--mode", gray_mode, "normalized|literal");
    gray->add_option("--jobs", gray_jobs);

    // eval-seg
    auto* eval = app.add_subcommand("eval-seg", "Confusion/mIoU/cross-entropy report for label maps");
    std::string eval_pred, eval_truth, eval_policy = "exclude_absent", eval_out;
    int eval_k = ClassTaxonomy::defaults().size();
    eval->add_option("pred", eval_pred)->required();
    eval->add_option("truth", eval_truth)->required();
    eval->add_option("--policy", eval_policy, "exclude_absent|include_absent");
    eval->add_option("--k", eval_k, "class count");
    eval->add_option("--out", eval_out);

    // migrate
    auto* mig = app.add_subcommand("migrate", "Rewrite label maps through class migration rules");
    std::string mig_in, mig_rules, mig_out, mig_tax;
    mig->add_option("input", mig_in)->required();
    mig->add_option("rules", mig_rules)->required();
    mig->add_option("output", mig_out)->required();
    mig->add_option("--taxonomy", mig_tax, "target taxonomy JSON");

    // extract
    auto* ext = app.add_subcommand("extract", "Feature matrix CSV from label-map frames");
    std::string ext_frames, ext_out, ext_tax, ext_truth;
    int ext_jobs = 1;
    ext->add_option("frames", ext_frames)->required();
    ext->add_option("output", ext_out)->required();
    ext->add_option("--taxonomy", ext_tax);
    ext->add_option("--truth", ext_truth, "synth truth.csv supplying scenario labels");
    ext->add_option("--jobs", ext_jobs);

    // train
    auto* trn = app.add_subcommand("train", "Train the boosted-tree scenario classifier");
    std::string trn_features, trn_model;
    int trn_rounds = 50, trn_depth = 4;
    double trn_gamma = 0.0, trn_lambda = 1.0, trn_eta = 0.3, trn_mcw = 1e-3;
    std::uint64_t trn_seed = 0;
    trn->add_option("features", trn_features)->required();
    trn->add_option("model", trn_model)->required();
    trn->add_option("--rounds", trn_rounds);
    trn->add_option("--depth", trn_depth);
    trn->add_option("--gamma", trn_gamma);
    trn->add_option("--lambda", trn_lambda);
    trn->add_option("--eta", trn_eta);
    trn->add_option("--min-child-weight", trn_mcw);
    trn->add_option("--seed", trn_seed);
    std::string trn_loss_curve;
    trn->add_option("--loss-curve", trn_loss_curve, "write the per-round training log-loss CSV");

    // select
    auto* sel = app.add_subcommand("select", "Recursive feature elimination report");
    std::string sel_features, sel_out;
    int sel_folds = 5, sel_target = 4, sel_rounds = 20, sel_depth = 4;
    std::uint64_t sel_seed = 0;
    sel->add_option("features", sel_features)->required();
    sel->add_option("--folds", sel_folds);
    sel->add_option("--target-size", sel_target);
    sel->add_option("--rounds", sel_rounds);
    sel->add_option("--depth", sel_depth);
    sel->add_option("--seed", sel_seed);
    sel->add_option("--out", sel_out);

    // cv
    auto* cv = app.add_subcommand("cv", "Stratified cross-validation matrix and macro F1");
    std::string cv_features, cv_out;
    int cv_folds = 5, cv_rounds = 50, cv_depth = 4;
    std::uint64_t cv_seed = 0;
    cv->add_option("features", cv_features)->required();
    cv->add_option("--folds", cv_folds);
    cv->add_option("--rounds", cv_rounds);
    cv->add_option("--depth", cv_depth);
    cv->add_option("--seed", cv_seed);
    cv->add_option("--out", cv_out);

    // track
    auto* trk = app.add_subcommand("track", "Conflict-object trajectories, kinematics and TTC");
    std::string trk_frames, trk_out, trk_classes;
    TrackingParams trk_params;
    trk->add_option("frames", trk_frames)->required();
    trk->add_option("--classes", trk_classes, "comma-separated conflict class ids");
    trk->add_option("--eps", trk_params.eps, "DBSCAN radius in px (0 = 2% of frame diagonal)");
    trk->add_option("--min-pts", trk_params.min_pts);
    trk->add_option("--fps", trk_params.fps);
    trk->add_option("--max-jump", trk_params.max_jump);
    trk->add_option("--severe-ttc", trk_params.severe_ttc);
    trk->add_option("--out", trk_out);

    // explain
    auto* exp = app.add_subcommand("explain", "Full per-frame explanation reports (NDJSON)");
    std::string exp_frames, exp_model, exp_rgb, exp_rules, exp_road_rules, exp_tax, exp_out,
        exp_classes, exp_complexity_csv;
    TrackingParams exp_params;
    double exp_variety = 78.8;  // validated segmentation accuracy of the source study
    double exp_nmax = kDefaultMaxClasses;
    bool exp_text = false;
    int exp_jobs = 1;
    exp->add_option("frames", exp_frames)->required();
    exp->add_option("model", exp_model)->required();
    exp->add_option("--rgb-dir", exp_rgb, "PPM frames for traffic-light color");
    exp->add_option("--rules", exp_rules, "advisory rule JSON");
    exp->add_option("--road-rules", exp_road_rules, "road-type rule JSON");
    exp->add_option("--taxonomy", exp_tax);
    exp->add_option("--classes", exp_classes);
    exp->add_option("--eps", exp_params.eps);
    exp->add_option("--min-pts", exp_params.min_pts);
    exp->add_option("--fps", exp_params.fps);
    exp->add_option("--max-jump", exp_params.max_jump);
    exp->add_option("--severe-ttc", exp_params.severe_ttc);
    exp->add_option("--variety-m", exp_variety, "segmentation accuracy m%% supplied per run");
    exp->add_option("--n-max", exp_nmax);
    exp->add_flag("--text", exp_text, "human-readable blocks instead of NDJSON");
    exp->add_option("--jobs", exp_jobs);
    exp->add_option("--out", exp_out);
    exp->add_option("--complexity-csv", exp_complexity_csv, "also write the per-frame complexity CSV");

    // synth
    auto* syn = app.add_subcommand("synth", "Generate synthetic scenario frames");
    std::string syn_spec, syn_out;
    int syn_count = 0;
    std::uint64_t syn_seed = 1;
    syn->add_option("--spec", syn_spec, "scene spec JSON (sequence mode)");
    syn->add_option("--count", syn_count, "corpus size (corpus mode)");
    syn->add_option("--seed", syn_seed);
    syn->add_option("output", syn_out)->required();

    CLI11_PARSE(app, argc, argv);

    try {
        json cfg = json::object();
        if (!config_path.empty()) cfg = load_config(config_path);

        if (*gray) {
            ConfigOverlay overlay{gray, cfg};
            overlay.fill("--mode", "mode", gray_mode);
            overlay.fill("--jobs", "jobs", gray_jobs);
            return cmd_gray(gray_in, gray_out, gray_mode, gray_jobs);
        }
        if (*eval) {
            ConfigOverlay overlay{eval, cfg};
            overlay.fill("--policy", "policy", eval_policy);
            overlay.fill("--k", "k", eval_k);
            return cmd_eval_seg(eval_pred, eval_truth, eval_policy, eval_k, eval_out);
        }
        if (*mig) {
            ConfigOverlay overlay{mig, cfg};
            overlay.fill("--taxonomy", "taxonomy", mig_tax);
            return cmd_migrate(mig_in, mig_rules, mig_out, mig_tax);
        }
        if (*ext) {
            ConfigOverlay overlay{ext, cfg};
            overlay.fill("--taxonomy", "taxonomy", ext_tax);
            overlay.fill("--jobs", "jobs", ext_jobs);
            return cmd_extract(ext_frames, ext_out, ext_tax, ext_truth, ext_jobs);
        }
        if (*trn) {
            ConfigOverlay overlay{trn, cfg};
            overlay.fill("--rounds", "rounds", trn_rounds);
            overlay.fill("--depth", "depth", trn_depth);
            overlay.fill("--gamma", "gamma", trn_gamma);
            overlay.fill("--lambda", "lambda", trn_lambda);
            overlay.fill("--eta", "eta", trn_eta);
            overlay.fill("--min-child-weight", "min_child_weight", trn_mcw);
            overlay.fill("--seed", "seed", trn_seed);
            return cmd_train(trn_features, trn_model,
                             train_config_from_flags(trn_rounds, trn_depth, trn_gamma, trn_lambda,
                                                     trn_eta, trn_mcw, trn_seed),
                             trn_loss_curve);
        }
        if (*sel) {
            ConfigOverlay overlay{sel, cfg};
            overlay.fill("--folds", "folds", sel_folds);
            overlay.fill("--target-size", "target_size", sel_target);
            overlay.fill("--rounds", "rounds", sel_rounds);
            overlay.fill("--depth", "depth", sel_depth);
            overlay.fill("--seed", "seed", sel_seed);
            gbdt::TrainConfig cfg_t = train_config_from_flags(sel_rounds, sel_depth, 0.0, 1.0, 0.3,
                                                              1e-3, sel_seed);
            return cmd_select(sel_features, sel_folds, sel_target, cfg_t, sel_out);
        }
        if (*cv) {
            ConfigOverlay overlay{cv, cfg};
            overlay.fill("--folds", "folds", cv_folds);
            overlay.fill("--rounds", "rounds", cv_rounds);
            overlay.fill("--depth", "depth", cv_depth);
            overlay.fill("--seed", "seed", cv_seed);
            gbdt::TrainConfig cfg_t =
                train_config_from_flags(cv_rounds, cv_depth, 0.0, 1.0, 0.3, 1e-3, cv_seed);
            return cmd_cv(cv_features, cv_folds, cfg_t, cv_out);
        }
        if (*trk) {
            ConfigOverlay overlay{trk, cfg};
            overlay.fill("--classes", "classes", trk_classes);
            overlay.fill("--eps", "eps", trk_params.eps);
            overlay.fill("--min-pts", "min_pts", trk_params.min_pts);
            overlay.fill("--fps", "fps", trk_params.fps);
            overlay.fill("--max-jump", "max_jump", trk_params.max_jump);
            overlay.fill("--severe-ttc", "severe_ttc", trk_params.severe_ttc);
            if (!trk_classes.empty()) trk_params.classes = parse_class_list(trk_classes);
            return cmd_track(trk_frames, trk_params, trk_out);
        }
        if (*exp) {
            ConfigOverlay overlay{exp, cfg};
            overlay.fill("--rules", "rules", exp_rules);
            overlay.fill("--road-rules", "road_rules", exp_road_rules);
            overlay.fill("--taxonomy", "taxonomy", exp_tax);
            overlay.fill("--classes", "classes", exp_classes);
            overlay.fill("--eps", "eps", exp_params.eps);
            overlay.fill("--min-pts", "min_pts", exp_params.min_pts);
            overlay.fill("--fps", "fps", exp_params.fps);
            overlay.fill("--max-jump", "max_jump", exp_params.max_jump);
            overlay.fill("--severe-ttc", "severe_ttc", exp_params.severe_ttc);
            overlay.fill("--variety-m", "variety_m", exp_variety);
            overlay.fill("--n-max", "n_max", exp_nmax);
            overlay.fill("--jobs", "jobs", exp_jobs);
            if (!exp_classes.empty()) exp_params.classes = parse_class_list(exp_classes);
            return cmd_explain(exp_frames, exp_rgb, exp_model, exp_rules, exp_road_rules, exp_tax,
                               exp_params, exp_variety, exp_nmax, exp_text, exp_jobs, exp_out,
                               exp_complexity_csv);
        }
        if (*syn) {
            ConfigOverlay overlay{syn, cfg};
            overlay.fill("--count", "count", syn_count);
            overlay.fill("--seed", "seed", syn_seed);
            if (syn_spec.empty() && syn_count == 0)
                throw ValidationError("synth stage: provide --spec or --count");
            return cmd_synth(syn_spec, syn_count, syn_seed, syn_out);
        }
    } catch (const ValidationError& e) {
        std::cerr << "scenex: " << e.what() << "\n";
        return 1;
    } catch (const IoError& e) {
        std::cerr << "scenex: " << e.what() << "\n";
        return 2;
    } catch (const json::exception& e) {
        std::cerr << "scenex: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
