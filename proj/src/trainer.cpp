#include "splat/trainer.hpp"

#include "splat/parallel.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <random>
#include <stdexcept>

namespace splat {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;

void check_unit_interval(double v, const char* name) {
    if (!(v > 0.0 && v < 1.0))
        throw std::invalid_argument(std::string(name) + " must be in (0,1)");
}

void check_lambda(double lambda) {
    if (!(lambda > 0.0 && lambda < 0.5))
        throw std::invalid_argument("lambda must be strictly smaller than 0.5");
}

Eigen::Vector3d sample_sphere(std::mt19937_64& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    Eigen::Vector3d v;
    do {
        v = Eigen::Vector3d(n(rng), n(rng), n(rng));
    } while (v.norm() < 1e-9);
    return v.normalized();
}

// One supervised direction for a gaussian, with precomputed basis rows.
struct Supervision {
    std::vector<double> basis_x;     // B(x)
    std::vector<double> basis_negx;  // B(-x), opposite variant
};

struct GaussianWork {
    int gaussian_id = -1;
    std::vector<Supervision> records;
    std::vector<std::vector<double>> sample_basis;  // sampled-mean variant
    std::vector<double> m, v;                       // Adam state
    std::vector<double> grad;
    double loss = 0.0;
};

}  // namespace

void TrainConfig::validate() const {
    check_lambda(lambda);
    check_unit_interval(threshold_t, "threshold_t");
    if (iterations <= 0) throw std::invalid_argument("iterations must be positive");
    if (learning_rate <= 0) throw std::invalid_argument("learning_rate must be positive");
    if (variant == LossVariant::kSampledMean && mean_samples <= 0)
        throw std::invalid_argument("mean_samples must be positive");
}

double loss_opposite(double u_x, double u_negx, double lambda) {
    check_lambda(lambda);
    check_unit_interval(u_x, "u_x");
    check_unit_interval(u_negx, "u_negx");
    return (1.0 - lambda) * u_x + lambda * (1.0 - u_negx);
}

double loss_sampled_mean(double u_x, double u_bar, double lambda) {
    check_lambda(lambda);
    check_unit_interval(u_x, "u_x");
    check_unit_interval(u_bar, "u_bar");
    return (1.0 - lambda) * u_x + lambda * (1.0 - u_bar);
}

RecordGrad record_loss_opposite_grad(const ShCoeffs& coeffs,
                                     const Eigen::Vector3d& x, double lambda) {
    check_lambda(lambda);
    const auto bx = eval_sh_basis(x, coeffs.degree);
    const auto bnx = eval_sh_basis(-x, coeffs.degree);
    const int n = sh_coeff_count(coeffs.degree);
    double fx = 0.0, fnx = 0.0;
    for (int i = 0; i < n; ++i) {
        fx += coeffs.values[i] * bx[i];
        fnx += coeffs.values[i] * bnx[i];
    }
    const double u_x = sigmoid(fx), u_nx = sigmoid(fnx);
    RecordGrad out;
    out.loss = (1.0 - lambda) * u_x + lambda * (1.0 - u_nx);
    out.grad.resize(n);
    const double dux = u_x * (1.0 - u_x), dunx = u_nx * (1.0 - u_nx);
    for (int i = 0; i < n; ++i)
        out.grad[i] = (1.0 - lambda) * dux * bx[i] - lambda * dunx * bnx[i];
    return out;
}

RecordGrad record_loss_sampled_mean_grad(const ShCoeffs& coeffs,
                                         const Eigen::Vector3d& x,
                                         const std::vector<Eigen::Vector3d>& samples,
                                         double lambda) {
    check_lambda(lambda);
    if (samples.empty())
        throw std::invalid_argument("record_loss_sampled_mean_grad: no samples");
    const auto bx = eval_sh_basis(x, coeffs.degree);
    const int n = sh_coeff_count(coeffs.degree);
    double fx = 0.0;
    for (int i = 0; i < n; ++i) fx += coeffs.values[i] * bx[i];
    const double u_x = sigmoid(fx);

    RecordGrad out;
    out.grad.assign(n, 0.0);
    const double dux = u_x * (1.0 - u_x);
    for (int i = 0; i < n; ++i) out.grad[i] = (1.0 - lambda) * dux * bx[i];

    double u_bar = 0.0;
    const double scale = -lambda / static_cast<double>(samples.size());
    for (const Eigen::Vector3d& s : samples) {
        const auto bs = eval_sh_basis(s, coeffs.degree);
        double fs = 0.0;
        for (int i = 0; i < n; ++i) fs += coeffs.values[i] * bs[i];
        const double us = sigmoid(fs);
        u_bar += us;
        const double dus = us * (1.0 - us);
        for (int i = 0; i < n; ++i) out.grad[i] += scale * dus * bs[i];
    }
    u_bar /= static_cast<double>(samples.size());
    out.loss = (1.0 - lambda) * u_x + lambda * (1.0 - u_bar);
    return out;
}

void save_train_report(const TrainReport& report, const std::string& path) {
    nlohmann::json j;
    j["iterations"] = report.iterations;
    j["final_loss"] = report.final_loss;
    j["loss_curve"] = report.loss_curve;
    j["wall_time_s"] = report.wall_time_s;
    j["records"] = report.records;
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("save_train_report: cannot open " + path);
    f << j.dump(2) << "\n";
}

TrainReport train_uncertainty(Scene& scene, const std::vector<Camera>& cameras,
                              const TrainConfig& config) {
    config.validate();
    if (cameras.empty()) throw std::invalid_argument("train: no cameras");
    scene.validate();

    const auto t_start = std::chrono::steady_clock::now();
    const int ncoeff = sh_coeff_count(scene.uncert_degree);

    // Harvest once: geometry is frozen, so records never change.
    // Dedup to one record per (gaussian, camera), keeping the max weight.
    std::vector<std::vector<std::pair<Eigen::Vector3d, double>>> per_gaussian(
        scene.gaussians.size());
    for (const Camera& cam : cameras) {
        std::vector<double> best(scene.gaussians.size(), 0.0);
        std::vector<Eigen::Vector3d> dir(scene.gaussians.size());
        for (const ContributionRecord& r :
             collect_contributions(scene, cam, config.threshold_t)) {
            if (r.weight > best[r.gaussian_id]) {
                best[r.gaussian_id] = r.weight;
                dir[r.gaussian_id] = r.view_dir;
            }
        }
        for (size_t g = 0; g < best.size(); ++g)
            if (best[g] > 0.0) per_gaussian[g].emplace_back(dir[g], best[g]);
    }

    std::vector<GaussianWork> work;
    std::size_t total_records = 0;
    for (size_t g = 0; g < per_gaussian.size(); ++g) {
        if (per_gaussian[g].empty()) continue;
        GaussianWork w;
        w.gaussian_id = static_cast<int>(g);
        for (const auto& [d, weight] : per_gaussian[g]) {
            Supervision s;
            s.basis_x = eval_sh_basis(d, scene.uncert_degree);
            if (config.variant == LossVariant::kOpposite)
                s.basis_negx = eval_sh_basis(-d, scene.uncert_degree);
            w.records.push_back(std::move(s));
        }
        if (config.variant == LossVariant::kSampledMean) {
            std::mt19937_64 rng(config.seed * 0x9E3779B97F4A7C15ULL + g + 1);
            for (int s = 0; s < config.mean_samples; ++s)
                w.sample_basis.push_back(
                    eval_sh_basis(sample_sphere(rng), scene.uncert_degree));
        }
        w.m.assign(ncoeff, 0.0);
        w.v.assign(ncoeff, 0.0);
        w.grad.assign(ncoeff, 0.0);
        total_records += w.records.size();
        work.push_back(std::move(w));
    }
    if (work.empty())
        throw std::runtime_error("train: threshold too high: no supervision");

    const double lam = config.lambda;
    const double inv_n = 1.0 / static_cast<double>(total_records);

    TrainReport report;
    report.records = total_records;
    report.iterations = config.iterations;
    report.loss_curve.reserve(config.iterations);

    for (int it = 1; it <= config.iterations; ++it) {
        parallel_for(static_cast<int>(work.size()), [&](int wi) {
            GaussianWork& w = work[wi];
            const std::vector<double>& coeffs =
                scene.gaussians[w.gaussian_id].uncert_sh.values;
            std::fill(w.grad.begin(), w.grad.end(), 0.0);
            w.loss = 0.0;

            auto field = [&](const std::vector<double>& basis) {
                double acc = 0.0;
                for (int i = 0; i < ncoeff; ++i) acc += coeffs[i] * basis[i];
                return acc;
            };

            double u_bar = 0.0;
            if (config.variant == LossVariant::kSampledMean) {
                for (const auto& b : w.sample_basis) u_bar += sigmoid(field(b));
                u_bar /= static_cast<double>(w.sample_basis.size());
            }

            for (const Supervision& rec : w.records) {
                const double u_x = sigmoid(field(rec.basis_x));
                const double dux = u_x * (1.0 - u_x);
                if (config.variant == LossVariant::kOpposite) {
                    const double u_nx = sigmoid(field(rec.basis_negx));
                    const double dunx = u_nx * (1.0 - u_nx);
                    w.loss += (1.0 - lam) * u_x + lam * (1.0 - u_nx);
                    for (int i = 0; i < ncoeff; ++i)
                        w.grad[i] += (1.0 - lam) * dux * rec.basis_x[i] -
                                     lam * dunx * rec.basis_negx[i];
                } else {
                    w.loss += (1.0 - lam) * u_x + lam * (1.0 - u_bar);
                    for (int i = 0; i < ncoeff; ++i)
                        w.grad[i] += (1.0 - lam) * dux * rec.basis_x[i];
                }
            }
            if (config.variant == LossVariant::kSampledMean) {
                // d(u_bar)/dc, shared by every record of this gaussian
                const double scale = -lam * static_cast<double>(w.records.size()) /
                                     static_cast<double>(w.sample_basis.size());
                for (const auto& b : w.sample_basis) {
                    const double u = sigmoid(field(b));
                    const double du = u * (1.0 - u);
                    for (int i = 0; i < ncoeff; ++i) w.grad[i] += scale * du * b[i];
                }
            }
        });

        double loss = 0.0;
        for (const GaussianWork& w : work) loss += w.loss;
        loss *= inv_n;
        report.loss_curve.push_back(loss);

        const double bc1 = 1.0 - std::pow(kAdamBeta1, it);
        const double bc2 = 1.0 - std::pow(kAdamBeta2, it);
        for (GaussianWork& w : work) {
            std::vector<double>& coeffs =
                scene.gaussians[w.gaussian_id].uncert_sh.values;
            for (int i = 0; i < ncoeff; ++i) {
                const double g = w.grad[i] * inv_n;
                w.m[i] = kAdamBeta1 * w.m[i] + (1.0 - kAdamBeta1) * g;
                w.v[i] = kAdamBeta2 * w.v[i] + (1.0 - kAdamBeta2) * g * g;
                coeffs[i] -= config.learning_rate * (w.m[i] / bc1) /
                             (std::sqrt(w.v[i] / bc2) + kAdamEps);
            }
        }
    }

    report.final_loss = report.loss_curve.empty() ? 0.0 : report.loss_curve.back();
    report.wall_time_s =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    return report;
}

}  // namespace splat
