#include "splat/ensemble.hpp"
#include "splat/sparsification.hpp"
#include "splat/synth.hpp"
#include "splat/trainer.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <random>
#include <sstream>

namespace fs = std::filesystem;
using nlohmann::json;
using namespace splat;

namespace {

// Cross-flag validation failures that should exit like flag-parse errors (2).
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string frame_name(int i, const char* ext) {
    std::ostringstream s;
    s << std::setw(4) << std::setfill('0') << i << "." << ext;
    return s.str();
}

std::vector<ColorImage> load_gt(const std::string& dir, size_t count) {
    std::vector<ColorImage> images;
    for (size_t i = 0; i < count; ++i)
        images.push_back(read_ppm((fs::path(dir) / frame_name(i, "ppm")).string()));
    return images;
}

void write_json(const json& j, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("cannot open " + path);
    f << j.dump(2) << "\n";
}

// ---------------------------------------------------------------- synth

struct SynthArgs {
    std::string kind = "poster";
    int n = 2000;
    std::uint64_t seed = 0;
    int cams = 64;
    double radius = 3.0;
    double elevation = 30.0;
    double arc = 360.0;
    int holdout = 16;
    int width = 128, height = 128;
    std::string out_dir;
};

int run_synth(const SynthArgs& a) {
    if (a.holdout >= a.cams)
        throw UsageError("--holdout must be smaller than --cams");
    const SceneKind kind = scene_kind_from_string(a.kind);
    fs::create_directories(a.out_dir);

    const Scene scene = make_scene(kind, a.n, a.seed);
    const auto orbit =
        make_orbit(a.cams, a.radius, a.elevation, a.arc, a.width, a.height);
    const auto [train, eval] = split_consecutive_holdout(orbit, a.holdout, a.seed);

    const fs::path out(a.out_dir);
    save_scene(scene, (out / "scene.ply").string());
    save_cameras(train, (out / "cameras_train.json").string());
    save_cameras(eval, (out / "cameras_eval.json").string());

    for (const char* split : {"gt_train", "gt_eval"}) {
        const auto& cams = split == std::string("gt_train") ? train : eval;
        fs::create_directories(out / split);
        for (size_t i = 0; i < cams.size(); ++i)
            write_ppm(render(scene, cams[i], RenderMode::kColor).color,
                      (out / split / frame_name(i, "ppm")).string());
    }

    write_json(json{{"config",
                     {{"kind", a.kind},
                      {"n", a.n},
                      {"seed", a.seed},
                      {"cams", a.cams},
                      {"radius", a.radius},
                      {"elevation", a.elevation},
                      {"arc", a.arc},
                      {"holdout", a.holdout},
                      {"width", a.width},
                      {"height", a.height}}}},
               (out / "synth.json").string());
    return 0;
}

// ---------------------------------------------------------------- train-uncert

struct TrainArgs {
    std::string scene, cameras, out_dir;
    std::string variant = "opposite";
    TrainConfig cfg;
};

int run_train(const TrainArgs& a) {
    Scene scene = load_scene(a.scene);
    const auto cams = load_cameras(a.cameras);
    TrainConfig cfg = a.cfg;
    if (a.variant == "opposite")
        cfg.variant = LossVariant::kOpposite;
    else if (a.variant == "sampled_mean")
        cfg.variant = LossVariant::kSampledMean;
    else
        throw UsageError("unknown --variant '" + a.variant + "'");

    const TrainReport report = train_uncertainty(scene, cams, cfg);

    fs::create_directories(a.out_dir);
    const fs::path out(a.out_dir);
    save_scene(scene, (out / "scene.ply").string());
    write_json(json{{"iterations", report.iterations},
                    {"records", report.records},
                    {"final_loss", report.final_loss},
                    {"loss_curve", report.loss_curve},
                    {"config",
                     {{"scene", a.scene},
                      {"cameras", a.cameras},
                      {"lambda", cfg.lambda},
                      {"threshold", cfg.threshold_t},
                      {"variant", a.variant},
                      {"iters", cfg.iterations},
                      {"lr", cfg.learning_rate},
                      {"seed", cfg.seed}}}},
               (out / "report.json").string());
    // wall time kept out of report.json so reruns stay byte-identical
    write_json(json{{"wall_time_s", report.wall_time_s}},
               (out / "timing.json").string());
    return 0;
}

// ---------------------------------------------------------------- ensemble

struct EnsembleArgs {
    std::string scene, cameras, gt_dir, out_dir;
    EnsembleConfig cfg;
};

int run_ensemble(const EnsembleArgs& a) {
    const Scene scene = load_scene(a.scene);
    const auto cams = load_cameras(a.cameras);
    const auto targets = load_gt(a.gt_dir, cams.size());

    std::vector<double> seconds;
    const auto members = fit_ensemble(scene, cams, targets, a.cfg, &seconds);

    fs::create_directories(a.out_dir);
    const fs::path out(a.out_dir);
    json manifest;
    for (int k = 0; k < a.cfg.members; ++k) {
        const std::string name =
            "member_" + std::string(k < 10 ? "0" : "") + std::to_string(k) + ".ply";
        save_scene(members[k], (out / name).string());
        manifest["members"].push_back(name);
    }
    manifest["seed"] = a.cfg.seed;
    manifest["config"] = {{"scene", a.scene},
                          {"cameras", a.cameras},
                          {"gt_dir", a.gt_dir},
                          {"members", a.cfg.members},
                          {"seed", a.cfg.seed},
                          {"fit_iterations", a.cfg.fit_iterations},
                          {"lr", a.cfg.learning_rate},
                          {"bootstrap", a.cfg.bootstrap}};
    write_json(manifest, (out / "manifest.json").string());
    double total = 0.0;
    for (double s : seconds) total += s;
    write_json(json{{"member_seconds", seconds}, {"total_s", total}},
               (out / "timing.json").string());
    return 0;
}

// ---------------------------------------------------------------- render

struct RenderArgs {
    std::string scene, cameras, out_dir;
    std::string mode = "color";
};

int run_render(const RenderArgs& a) {
    const Scene scene = load_scene(a.scene);
    const auto cams = load_cameras(a.cameras);
    fs::create_directories(a.out_dir);
    const fs::path out(a.out_dir);
    for (size_t i = 0; i < cams.size(); ++i) {
        if (a.mode == "color") {
            write_ppm(render(scene, cams[i], RenderMode::kColor).color,
                      (out / frame_name(i, "ppm")).string());
        } else {
            write_pgm(render(scene, cams[i], RenderMode::kUncertainty).uncert,
                      (out / frame_name(i, "pgm")).string());
        }
    }
    return 0;
}

// ---------------------------------------------------------------- eval

struct EvalArgs {
    std::string scene, cameras_eval, gt_dir, out = "report.json";
    std::string uncert = "sh";
    std::string curves_csv, curves_svg;
    bool self_oracle = false;
};

ScalarImage random_map(int width, int height, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    ScalarImage img(width, height);
    for (double& v : img.data) v = uni(rng);
    return img;
}

int run_eval(const EvalArgs& a) {
    const Scene scene = load_scene(a.scene);
    const auto cams = load_cameras(a.cameras_eval);
    const auto gt = load_gt(a.gt_dir, cams.size());

    std::vector<ScalarImage> maps;
    if (a.self_oracle) {
        for (size_t i = 0; i < cams.size(); ++i)
            maps.push_back(
                error_map(render(scene, cams[i], RenderMode::kColor).color, gt[i]));
    } else if (a.uncert == "sh") {
        for (const Camera& cam : cams)
            maps.push_back(render(scene, cam, RenderMode::kUncertainty).uncert);
    } else if (a.uncert.rfind("ensemble:", 0) == 0) {
        const fs::path manifest_path = a.uncert.substr(9);
        std::ifstream f(manifest_path);
        if (!f) throw std::runtime_error("cannot open " + manifest_path.string());
        const json manifest = json::parse(f);
        std::vector<Scene> members;
        for (const auto& name : manifest.at("members"))
            members.push_back(load_scene(
                (manifest_path.parent_path() / name.get<std::string>()).string()));
        for (const Camera& cam : cams)
            maps.push_back(ensemble_uncertainty(members, cam));
    } else if (a.uncert.rfind("random:", 0) == 0) {
        const std::uint64_t seed = std::stoull(a.uncert.substr(7));
        for (size_t i = 0; i < cams.size(); ++i)
            maps.push_back(random_map(cams[i].width, cams[i].height, seed + i));
    } else {
        throw UsageError("--uncert must be sh, ensemble:<manifest> or random:<seed>");
    }

    const EvalReport report = evaluate_method(scene, cams, gt, maps);
    write_json(json{{"per_view_ause", report.per_view_ause},
                    {"mean_ause", report.mean_ause},
                    {"zero_error_warning", report.any_zero_error_warning},
                    {"config",
                     {{"scene", a.scene},
                      {"cameras_eval", a.cameras_eval},
                      {"gt_dir", a.gt_dir},
                      {"uncert", a.uncert},
                      {"self_oracle", a.self_oracle}}}},
               a.out);

    if (!a.curves_csv.empty() || !a.curves_svg.empty()) {
        // mean of the per-view normalized curves
        AuseResult mean = report.per_view.front();
        const size_t npts = mean.uncertainty_curve.mae.size();
        for (size_t v = 1; v < report.per_view.size(); ++v)
            for (size_t i = 0; i < npts; ++i) {
                mean.uncertainty_curve.mae[i] +=
                    report.per_view[v].uncertainty_curve.mae[i];
                mean.oracle_curve.mae[i] += report.per_view[v].oracle_curve.mae[i];
            }
        for (size_t i = 0; i < npts; ++i) {
            mean.uncertainty_curve.mae[i] /= report.per_view.size();
            mean.oracle_curve.mae[i] /= report.per_view.size();
        }
        mean.ause = report.mean_ause;
        if (!a.curves_csv.empty()) write_curve_csv(mean, a.curves_csv);
        if (!a.curves_svg.empty()) write_curve_svg(mean, a.curves_svg);
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"View-dependent uncertainty for gaussian splat scenes"};
    app.require_subcommand(1);

    SynthArgs sa;
    CLI::App* synth = app.add_subcommand("synth", "generate a synthetic scene");
    synth->add_option("--kind", sa.kind)->check(CLI::IsMember({"box", "poster", "cluster"}));
    synth->add_option("--n", sa.n)->check(CLI::PositiveNumber);
    synth->add_option("--seed", sa.seed);
    synth->add_option("--cams", sa.cams)->check(CLI::PositiveNumber);
    synth->add_option("--radius", sa.radius)->check(CLI::PositiveNumber);
    synth->add_option("--elevation", sa.elevation);
    synth->add_option("--arc", sa.arc);
    synth->add_option("--holdout", sa.holdout)->check(CLI::PositiveNumber);
    synth->add_option("--width", sa.width)->check(CLI::PositiveNumber);
    synth->add_option("--height", sa.height)->check(CLI::PositiveNumber);
    synth->add_option("--out-dir", sa.out_dir)->required();

    TrainArgs ta;
    CLI::App* train = app.add_subcommand("train-uncert", "train the uncertainty field");
    train->add_option("--scene", ta.scene)->required();
    train->add_option("--cameras", ta.cameras)->required();
    train->add_option("--lambda", ta.cfg.lambda)
        ->check(CLI::Range(0.0, 0.5).description("FLOAT in (0, 0.5)"))
        ->check([](const std::string& v) {
            try {
                if (std::stod(v) < 0.5) return std::string();
            } catch (...) {
            }
            return std::string("lambda must be strictly smaller than 0.5");
        });
    train->add_option("--threshold", ta.cfg.threshold_t);
    train->add_option("--variant", ta.variant)
        ->check(CLI::IsMember({"opposite", "sampled_mean"}));
    train->add_option("--iters", ta.cfg.iterations)->check(CLI::PositiveNumber);
    train->add_option("--lr", ta.cfg.learning_rate)->check(CLI::PositiveNumber);
    train->add_option("--seed", ta.cfg.seed);
    train->add_option("--out", ta.out_dir)->required();

    EnsembleArgs ea;
    CLI::App* ens = app.add_subcommand("ensemble", "fit an ensemble baseline");
    ens->add_option("--scene", ea.scene)->required();
    ens->add_option("--cameras", ea.cameras)->required();
    ens->add_option("--gt-dir", ea.gt_dir)->required();
    ens->add_option("--members", ea.cfg.members)->check(CLI::Range(2, 1000));
    ens->add_option("--seed", ea.cfg.seed);
    ens->add_option("--iters", ea.cfg.fit_iterations)->check(CLI::PositiveNumber);
    ens->add_option("--lr", ea.cfg.learning_rate)->check(CLI::PositiveNumber);
    ens->add_flag("--no-bootstrap", [&ea](std::int64_t) { ea.cfg.bootstrap = false; },
                  "fit every member on all views");
    ens->add_option("--out-dir", ea.out_dir)->required();

    RenderArgs ra;
    CLI::App* rnd = app.add_subcommand("render", "render color or uncertainty images");
    rnd->add_option("--scene", ra.scene)->required();
    rnd->add_option("--cameras", ra.cameras)->required();
    rnd->add_option("--mode", ra.mode)->check(CLI::IsMember({"color", "uncert"}));
    rnd->add_option("--out-dir", ra.out_dir)->required();

    EvalArgs va;
    CLI::App* ev = app.add_subcommand("eval", "sparsification evaluation");
    ev->add_option("--scene", va.scene)->required();
    ev->add_option("--cameras-eval", va.cameras_eval)->required();
    ev->add_option("--gt-dir", va.gt_dir)->required();
    ev->add_option("--uncert", va.uncert);
    ev->add_option("--out", va.out);
    ev->add_option("--curves-csv", va.curves_csv);
    ev->add_option("--curves-svg", va.curves_svg);
    ev->add_flag("--self-oracle", va.self_oracle);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (synth->parsed()) return run_synth(sa);
        if (train->parsed()) return run_train(ta);
        if (ens->parsed()) return run_ensemble(ea);
        if (rnd->parsed()) return run_render(ra);
        if (ev->parsed()) return run_eval(va);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
