#pragma once

#include "splat/render.hpp"
#include "splat/scene.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace splat {

enum class LossVariant { kOpposite, kSampledMean };

struct TrainConfig {
    double lambda = 0.2;       // strictly < 0.5
    double threshold_t = 0.05; // contribution harvest threshold
    LossVariant variant = LossVariant::kOpposite;
    int mean_samples = 16;     // sampled-mean variant only
    int iterations = 2000;
    double learning_rate = 0.05;
    std::uint64_t seed = 0;

    void validate() const;
};

/// (1-lambda)*u_x + lambda*(1-u_negx): pulls the seen direction toward 0 and
/// the opposite direction toward 1.
double loss_opposite(double u_x, double u_negx, double lambda);

/// (1-lambda)*u_x + lambda*(1-u_bar), u_bar a sampled spherical mean.
double loss_sampled_mean(double u_x, double u_bar, double lambda);

struct RecordGrad {
    double loss = 0.0;
    std::vector<double> grad;  // d loss / d uncert_sh coefficients
};

/// Loss and analytic gradient of one contribution record under the
/// opposite-direction loss, with u = sigmoid(sh field).
RecordGrad record_loss_opposite_grad(const ShCoeffs& coeffs,
                                     const Eigen::Vector3d& x, double lambda);

/// Same for the sampled-mean loss; samples are the directions estimating
/// the spherical mean.
RecordGrad record_loss_sampled_mean_grad(const ShCoeffs& coeffs,
                                         const Eigen::Vector3d& x,
                                         const std::vector<Eigen::Vector3d>& samples,
                                         double lambda);

struct TrainReport {
    int iterations = 0;
    double final_loss = 0.0;
    std::vector<double> loss_curve;
    double wall_time_s = 0.0;
    std::size_t records = 0;
};

void save_train_report(const TrainReport& report, const std::string& path);

/// Optimizes uncert_sh of every supervised gaussian with Adam against the
/// harvested contribution records; geometry and color are untouched.
/// Records are deduplicated to one per (gaussian, camera), keeping the
/// maximum blend weight.
TrainReport train_uncertainty(Scene& scene, const std::vector<Camera>& cameras,
                              const TrainConfig& config);

}  // namespace splat
