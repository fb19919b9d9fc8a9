#pragma once

#include "splat/image.hpp"
#include "splat/render.hpp"
#include "splat/scene.hpp"

#include <cstdint>
#include <vector>

namespace splat {

struct EnsembleConfig {
    int members = 10;  // >= 2
    std::uint64_t seed = 0;
    int fit_iterations = 500;
    double learning_rate = 0.01;
    bool bootstrap = true;

    void validate() const;
};

/// Frozen-geometry color path: per camera, the (splat, pixel, weight) pairs
/// and per-splat SH basis rows that make the rendered color linear in the
/// color coefficients.
struct PhotometricCache {
    struct PerCamera {
        int width = 0, height = 0;
        std::vector<int> gaussian_ids;                     // compact -> scene index
        std::vector<std::array<double, kMaxShCoeffs>> basis;  // per compact splat
        struct Pair {
            int splat;   // compact index
            int pixel;   // row-major
            float weight;
        };
        std::vector<Pair> pairs;
        std::vector<float> bg_transmittance;  // per pixel
    };
    std::vector<PerCamera> cameras;
};

PhotometricCache build_photometric_cache(const Scene& scene,
                                         const std::vector<Camera>& cameras);

/// One ensemble member: same geometry/opacity, color SH refit by Adam from a
/// random-normal initialization against an L2 photometric loss on the
/// (optionally bootstrap-resampled) training views.
Scene fit_member(const Scene& scene, const std::vector<Camera>& cameras,
                 const std::vector<ColorImage>& targets, std::uint64_t seed,
                 const EnsembleConfig& config);

Scene fit_member(const Scene& scene, const PhotometricCache& cache,
                 const std::vector<ColorImage>& targets, std::uint64_t seed,
                 const EnsembleConfig& config);

/// Fits config.members members with seeds seed, seed+1, ...; optionally
/// reports per-member wall time.
std::vector<Scene> fit_ensemble(const Scene& scene,
                                const std::vector<Camera>& cameras,
                                const std::vector<ColorImage>& targets,
                                const EnsembleConfig& config,
                                std::vector<double>* member_seconds = nullptr);

/// Per-pixel population std of rendered luminance across members,
/// max-normalized to [0,1] (an all-zero map stays zero).
ScalarImage ensemble_uncertainty(const std::vector<Scene>& members,
                                 const Camera& cam);

}  // namespace splat
