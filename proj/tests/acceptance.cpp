// Acceptance suite: one pass/fail line per criterion, exit code = #failures.
// All tolerances are pinned here.

#include "splat/ensemble.hpp"
#include "splat/sparsification.hpp"
#include "splat/synth.hpp"
#include "splat/trainer.hpp"

#include "render_oracle.hpp"

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>

using namespace splat;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

Eigen::Vector3d random_direction(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Vector3d v(n(rng), n(rng), n(rng));
    while (v.norm() < 1e-9) v = Eigen::Vector3d(n(rng), n(rng), n(rng));
    return v.normalized();
}

// ---------------------------------------------------------------- criterion 1

bool criterion_sh(std::string& detail) {
    const auto t0 = Clock::now();
    bool ok = true;

    // Monte-Carlo Gram matrix of the degree-3 basis against identity.
    std::mt19937_64 rng(1);
    Eigen::Matrix<double, 16, 16> gram = Eigen::Matrix<double, 16, 16>::Zero();
    const int samples = 1000000;
    std::array<double, kMaxShCoeffs> b;
    for (int s = 0; s < samples; ++s) {
        eval_sh_basis(random_direction(rng), 3, b);
        for (int i = 0; i < 16; ++i)
            for (int j = i; j < 16; ++j) gram(i, j) += b[i] * b[j];
    }
    gram *= 4.0 * M_PI / samples;
    double worst = 0.0;
    for (int i = 0; i < 16; ++i)
        for (int j = i; j < 16; ++j)
            worst = std::max(worst, std::abs(gram(i, j) - (i == j ? 1.0 : 0.0)));
    ok &= worst < 0.01;

    // Field gradients against central finite differences.
    double worst_fd = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        ShCoeffs c = ShCoeffs::zeros(3);
        std::normal_distribution<double> n(0.0, 1.0);
        for (double& v : c.values) v = n(rng);
        const Eigen::Vector3d d = random_direction(rng);
        const auto grad = sh_field_gradient(c, d);
        const double h = 1e-5;
        for (size_t i = 0; i < c.values.size(); ++i) {
            ShCoeffs cp = c, cm = c;
            cp.values[i] += h;
            cm.values[i] -= h;
            const double fd =
                (eval_sh_field(cp, d) - eval_sh_field(cm, d)) / (2 * h);
            worst_fd = std::max(worst_fd, std::abs(grad[i] - fd));
        }
    }
    ok &= worst_fd < 1e-6;

    const double t = seconds_since(t0);
    ok &= t < 30.0;
    std::ostringstream s;
    s << "gram max dev " << worst << " (<0.01), grad fd dev " << worst_fd
      << " (<1e-6), " << t << " s (<30)";
    detail = s.str();
    return ok;
}

// ---------------------------------------------------------------- criterion 2

Scene random_tiny_scene(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> nrm(0.0, 1.0);
    Scene scene;
    scene.background_color = Eigen::Vector3d(uni(rng), uni(rng), uni(rng));
    const int n = std::uniform_int_distribution<int>(1, 5)(rng);
    for (int i = 0; i < n; ++i) {
        Gaussian g;
        g.position =
            Eigen::Vector3d(0.4 * nrm(rng), 0.4 * nrm(rng), 1.5 + uni(rng));
        Eigen::Vector4d q(nrm(rng), nrm(rng), nrm(rng), nrm(rng));
        q.normalize();
        g.rotation = Eigen::Quaterniond(q[0], q[1], q[2], q[3]);
        g.scale = Eigen::Vector3d(0.05 + 0.3 * uni(rng), 0.05 + 0.3 * uni(rng),
                                  0.05 + 0.3 * uni(rng));
        g.opacity = 0.05 + 0.9 * uni(rng);
        for (int ch = 0; ch < 3; ++ch)
            for (int j = 0; j < 16; ++j) g.color_sh[ch].values[j] = 0.3 * nrm(rng);
        scene.gaussians.push_back(g);
    }
    return scene;
}

bool criterion_renderer(std::string& detail) {
    std::mt19937_64 rng(2);
    Camera cam;
    cam.width = cam.height = 8;
    cam.fx = cam.fy = 12.0;
    cam.cx = cam.cy = 4.0;

    double worst_color = 0.0, worst_conserve = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const Scene scene = random_tiny_scene(rng);
        const RenderBuffer buf = render(scene, cam, RenderMode::kColor);
        auto prj = oracle::project_all(scene, cam);
        std::vector<Splat2D> splats;
        for (const auto& p : prj)
            splats.push_back({p.id, p.mean, p.cov, p.depth, p.view_dir});
        for (int y = 0; y < 8; ++y)
            for (int x = 0; x < 8; ++x) {
                const auto ref = oracle::render_pixel(scene, cam, x, y);
                worst_color = std::max(
                    worst_color,
                    (buf.color.at(x, y) - ref.color).cwiseAbs().maxCoeff());
                const auto b = blend_pixel(splats, {x + 0.5, y + 0.5}, scene,
                                           RenderMode::kColor);
                double wsum = 0.0;
                for (double w : b.weights) wsum += w;
                worst_conserve = std::max(
                    worst_conserve, std::abs(wsum + b.transmittance - 1.0));
            }
    }
    std::ostringstream s;
    s << "oracle dev " << worst_color << " (<1e-6), conservation dev "
      << worst_conserve << " (<1e-6)";
    detail = s.str();
    return worst_color < 1e-6 && worst_conserve < 1e-6;
}

// ---------------------------------------------------------------- criterion 3

bool criterion_trainer(std::string& detail) {
    const auto t0 = Clock::now();
    bool ok = true;

    // analytic per-record gradients against central finite differences
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0.0, 1.0);
    double worst_fd = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        ShCoeffs c = ShCoeffs::zeros(2);
        for (double& v : c.values) v = n(rng);
        const Eigen::Vector3d x = random_direction(rng);
        std::vector<Eigen::Vector3d> samples;
        for (int s = 0; s < 8; ++s) samples.push_back(random_direction(rng));
        const double lambda = 0.2;
        const auto opp = record_loss_opposite_grad(c, x, lambda);
        const auto smp = record_loss_sampled_mean_grad(c, x, samples, lambda);
        const double h = 1e-4;
        for (size_t i = 0; i < c.values.size(); ++i) {
            ShCoeffs cp = c, cm = c;
            cp.values[i] += h;
            cm.values[i] -= h;
            worst_fd = std::max(
                worst_fd,
                std::abs(opp.grad[i] - (record_loss_opposite_grad(cp, x, lambda).loss -
                                        record_loss_opposite_grad(cm, x, lambda).loss) /
                                           (2 * h)));
            worst_fd = std::max(
                worst_fd,
                std::abs(smp.grad[i] -
                         (record_loss_sampled_mean_grad(cp, x, samples, lambda).loss -
                          record_loss_sampled_mean_grad(cm, x, samples, lambda).loss) /
                             (2 * h)));
        }
    }
    ok &= worst_fd < 1e-5;

    // single gaussian, one camera: seen direction certain, opposite uncertain
    Scene scene;
    Gaussian g;
    g.scale = Eigen::Vector3d::Constant(0.1);
    g.opacity = 0.9;
    scene.gaussians.push_back(g);
    const auto one_cam = make_orbit(1, 3.0, 0.0, 360.0, 32, 32);
    TrainConfig cfg;  // lambda 0.2, threshold 0.05, 2000 iters
    train_uncertainty(scene, one_cam, cfg);
    const Eigen::Vector3d toward = one_cam[0].center().normalized();
    const double u_toward = scene.gaussians[0].uncertainty_value(toward);
    const double u_away = scene.gaussians[0].uncertainty_value(-toward);
    ok &= u_toward < 0.1 && u_away > 0.6;

    // bidirectional supervision keeps both directions below 0.5
    Scene scene2;
    scene2.gaussians.push_back(g);
    const auto two_cams = make_orbit(2, 3.0, 0.0, 360.0, 32, 32);
    train_uncertainty(scene2, two_cams, cfg);
    const double u_a = scene2.gaussians[0].uncertainty_value(toward);
    const double u_b = scene2.gaussians[0].uncertainty_value(-toward);
    ok &= u_a < 0.5 && u_b < 0.5;

    const double t = seconds_since(t0);
    ok &= t < 60.0;
    std::ostringstream s;
    s << "grad fd dev " << worst_fd << " (<1e-5), u(toward) " << u_toward
      << " (<0.1), u(away) " << u_away << " (>0.6), bidirectional " << u_a << "/"
      << u_b << " (<0.5), " << t << " s (<60)";
    detail = s.str();
    return ok;
}

// ---------------------------------------------------------------- criterion 4

bool criterion_variants(std::string& detail) {
    const auto cams = make_orbit(8, 3.0, 20.0, 360.0, 64, 64);
    const auto probes = make_orbit(4, 3.0, 45.0, 360.0, 64, 64);

    Scene a = make_scene(SceneKind::kCluster, 50, 4);
    Scene b = make_scene(SceneKind::kCluster, 50, 4);
    TrainConfig cfg;
    cfg.iterations = 1500;
    cfg.variant = LossVariant::kOpposite;
    train_uncertainty(a, cams, cfg);
    cfg.variant = LossVariant::kSampledMean;
    train_uncertainty(b, cams, cfg);

    double diff = 0.0;
    size_t count = 0;
    for (const Camera& cam : probes) {
        const ScalarImage ua = render(a, cam, RenderMode::kUncertainty).uncert;
        const ScalarImage ub = render(b, cam, RenderMode::kUncertainty).uncert;
        for (size_t p = 0; p < ua.size(); ++p) diff += std::abs(ua.data[p] - ub.data[p]);
        count += ua.size();
    }
    diff /= count;
    std::ostringstream s;
    s << "mean |opposite - sampled_mean| " << diff << " (<0.15)";
    detail = s.str();
    return diff < 0.15;
}

// ---------------------------------------------------------------- criterion 5

bool criterion_ause(std::string& detail) {
    bool ok = true;
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> uni(0.0, 1.0);

    // oracle self-AUSE exactly zero
    ScalarImage errors(16, 16);
    for (double& v : errors.data) v = uni(rng);
    ok &= ause(errors, errors) == 0.0;

    // 4-pixel hand example on the coarse grid
    ScalarImage hand(2, 2), reversed(2, 2);
    hand.data = {4, 3, 2, 1};
    reversed.data = {1, 2, 3, 4};
    const std::vector<double> fr = {0.0, 0.25, 0.5, 0.75};
    const auto worst_curve = sparsification_curve(hand, reversed, fr, true);
    const auto best_curve = sparsification_curve(hand, hand, fr, true);
    double coarse = 0.0;
    for (size_t i = 0; i < fr.size(); ++i)
        coarse += worst_curve.mae[i] - best_curve.mae[i];
    coarse /= fr.size();
    ok &= std::abs(coarse - 0.6) < 1e-12;

    // monotone-transform invariance over 50 random monotone maps
    ScalarImage ranking(16, 16);
    for (double& v : ranking.data) v = uni(rng);
    const double base = ause(errors, ranking);
    double worst_inv = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        const double a = 0.1 + 3.0 * uni(rng), b = uni(rng), p = 0.2 + 2.0 * uni(rng);
        ScalarImage mapped = ranking;
        for (double& v : mapped.data) v = a * std::pow(v, p) + b;
        worst_inv = std::max(worst_inv, std::abs(ause(errors, mapped) - base));
    }
    ok &= worst_inv < 1e-12;

    std::ostringstream s;
    s << "self-AUSE exact 0, hand example " << coarse
      << " (=0.6), monotone dev " << worst_inv << " (<1e-12)";
    detail = s.str();
    return ok;
}

// ------------------------------------------------------- criteria 6 + 7 + 8

struct PipelineTimes {
    double sh_train = 0.0;
    double ensemble = 0.0;
};
PipelineTimes g_times;  // filled by criterion 6, consumed by criterion 7

bool criterion_end_to_end(std::string& detail) {
    const auto t0 = Clock::now();
    bool ok = true;
    std::ostringstream s;

    for (std::uint64_t seed = 0; seed < 3 && ok; ++seed) {
        const Scene truth = make_scene(SceneKind::kPoster, 2000, seed);
        const auto orbit = make_orbit(64, 3.0, 30.0, 360.0, 128, 128);
        const auto [train_cams, eval_cams] =
            split_consecutive_holdout(orbit, 16, seed);

        std::vector<ColorImage> train_gt, eval_gt;
        for (const Camera& c : train_cams)
            train_gt.push_back(render(truth, c, RenderMode::kColor).color);
        for (const Camera& c : eval_cams)
            eval_gt.push_back(render(truth, c, RenderMode::kColor).color);

        // imperfect reconstruction: colors refit from the training views only
        EnsembleConfig fit_cfg;
        fit_cfg.fit_iterations = 150;
        fit_cfg.learning_rate = 0.05;
        fit_cfg.bootstrap = false;
        Scene recon = fit_member(truth, train_cams, train_gt, 1234 + seed, fit_cfg);

        auto t_sh = Clock::now();
        TrainConfig tcfg;
        tcfg.iterations = 1000;
        tcfg.seed = seed;
        train_uncertainty(recon, train_cams, tcfg);
        g_times.sh_train += seconds_since(t_sh);

        std::vector<ScalarImage> sh_maps;
        for (const Camera& c : eval_cams)
            sh_maps.push_back(render(recon, c, RenderMode::kUncertainty).uncert);

        auto t_ens = Clock::now();
        EnsembleConfig ecfg;
        ecfg.members = 10;
        ecfg.seed = seed;
        ecfg.fit_iterations = 150;
        ecfg.learning_rate = 0.05;
        const auto members = fit_ensemble(truth, train_cams, train_gt, ecfg);
        std::vector<ScalarImage> ens_maps;
        for (const Camera& c : eval_cams)
            ens_maps.push_back(ensemble_uncertainty(members, c));
        g_times.ensemble += seconds_since(t_ens);

        std::vector<ScalarImage> rnd_maps;
        std::mt19937_64 rng(900 + seed);
        std::uniform_real_distribution<double> uni(0.0, 1.0);
        for (const Camera& c : eval_cams) {
            ScalarImage m(c.width, c.height);
            for (double& v : m.data) v = uni(rng);
            rnd_maps.push_back(std::move(m));
        }

        const double a_sh =
            evaluate_method(recon, eval_cams, eval_gt, sh_maps).mean_ause;
        const double a_ens =
            evaluate_method(recon, eval_cams, eval_gt, ens_maps).mean_ause;
        const double a_rnd =
            evaluate_method(recon, eval_cams, eval_gt, rnd_maps).mean_ause;

        s << "seed " << seed << ": AUSE sh " << a_sh << ", ensemble " << a_ens
          << ", random " << a_rnd << "; ";
        ok &= a_sh < a_rnd && a_ens < a_rnd;
    }

    const double t = seconds_since(t0);
    ok &= t < 900.0;
    s << t << " s (<900)";
    detail = s.str();
    return ok;
}

bool criterion_timing(std::string& detail) {
    std::ostringstream s;
    s << "sh training " << g_times.sh_train << " s vs ensemble pipeline "
      << g_times.ensemble << " s (need < 1/5)";
    detail = s.str();
    return g_times.sh_train > 0.0 && g_times.ensemble > 0.0 &&
           g_times.sh_train < g_times.ensemble / 5.0;
}

bool criterion_view_dependency(std::string& detail) {
    Scene scene = make_scene(SceneKind::kPoster, 800, 8);
    const auto train_cams = make_orbit(24, 3.0, 30.0, 180.0, 96, 96);
    TrainConfig cfg;
    cfg.iterations = 1000;
    train_uncertainty(scene, train_cams, cfg);

    const auto probes = make_orbit(4, 3.0, 30.0, 360.0, 96, 96);
    auto mean_uncert = [&](const Camera& cam) {
        const ScalarImage u = render(scene, cam, RenderMode::kUncertainty).uncert;
        double acc = 0.0;
        for (double v : u.data) acc += v;
        return acc / u.size();
    };
    const double on_arc = mean_uncert(probes[1]);   // azimuth 90, trained
    const double off_arc = mean_uncert(probes[3]);  // azimuth 270, held out
    std::ostringstream s;
    s << "mean uncert held-out " << off_arc << " vs training " << on_arc
      << " (need >= 1.5x)";
    detail = s.str();
    return off_arc >= 1.5 * on_arc;
}

}  // namespace

int main() {
    struct Criterion {
        const char* name;
        std::function<bool(std::string&)> run;
    };
    const Criterion criteria[] = {
        {"1 SH basis correctness", criterion_sh},
        {"2 renderer matches brute-force oracle", criterion_renderer},
        {"3 loss gradients and trainer behavior", criterion_trainer},
        {"4 loss variant agreement", criterion_variants},
        {"5 AUSE metric properties", criterion_ause},
        {"6 end-to-end sparsification ordering", criterion_end_to_end},
        {"7 training time vs ensemble", criterion_timing},
        {"8 view-dependent uncertainty", criterion_view_dependency},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        std::string detail;
        bool ok = false;
        try {
            ok = c.run(detail);
        } catch (const std::exception& e) {
            detail = std::string("exception: ") + e.what();
        }
        std::printf("%s criterion %s — %s\n", ok ? "PASS" : "FAIL", c.name,
                    detail.c_str());
        std::fflush(stdout);
        if (!ok) ++failures;
    }
    return failures;
}
