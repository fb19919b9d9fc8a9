#pragma once

#include "splat/image.hpp"
#include "splat/scene.hpp"

#include <optional>
#include <span>
#include <vector>

namespace splat {

// Rasterizer numerics shared with the reference rasterizers this follows.
inline constexpr double kAlphaClamp = 0.99;
inline constexpr double kMinAlpha = 1.0 / 255.0;
inline constexpr double kMinTransmittance = 1e-4;
inline constexpr double kCov2dLowPass = 0.3;  // px^2, added to the diagonal
inline constexpr double kNearPlane = 0.01;
inline constexpr double kCullSigma = 3.5;  // bounding radius in screen sigmas

enum class RenderMode { kColor, kUncertainty };

struct Splat2D {
    int gaussian_id = -1;
    Eigen::Vector2d mean2d = Eigen::Vector2d::Zero();  // pixels
    Eigen::Matrix2d cov2d = Eigen::Matrix2d::Identity();
    double depth = 0.0;                                // camera-space z
    Eigen::Vector3d view_dir = Eigen::Vector3d::UnitZ();  // gaussian -> camera
};

struct RenderBuffer {
    int width = 0, height = 0;
    ColorImage color;    // filled in color mode
    ScalarImage uncert;  // filled in uncertainty mode
    ScalarImage alpha;   // 1 - final transmittance
};

/// One (gaussian, pixel) supervision sample: blend weight T_i k_i at a pixel
/// where it reached at least the harvest threshold.
struct ContributionRecord {
    int gaussian_id = -1;
    Eigen::Vector2i pixel = Eigen::Vector2i::Zero();
    Eigen::Vector3d view_dir = Eigen::Vector3d::UnitZ();
    double weight = 0.0;
};

/// EWA projection to screen space. Empty when the center is behind the near
/// plane or the bounding extent misses the image.
std::optional<Splat2D> project(const Gaussian& g, const Camera& cam);

struct PixelBlend {
    Eigen::Vector3d value = Eigen::Vector3d::Zero();  // [0] holds scalar modes
    std::vector<double> weights;                      // T_i k_i per input splat
    double transmittance = 1.0;
};

/// Front-to-back alpha blend of depth-ascending splats at one pixel position
/// (pixel centers are at integer + 0.5).
PixelBlend blend_pixel(std::span<const Splat2D> splats, const Eigen::Vector2d& pixel,
                       const Scene& scene, RenderMode mode);

RenderBuffer render(const Scene& scene, const Camera& cam, RenderMode mode);

/// Records every (gaussian, pixel) pair whose blend weight reaches threshold,
/// in row-major pixel order, front-to-back within a pixel.
std::vector<ContributionRecord> collect_contributions(const Scene& scene,
                                                      const Camera& cam,
                                                      double threshold);

}  // namespace splat
