#pragma once

#include "splat/scene.hpp"

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace splat {

enum class SceneKind { kBox, kPoster, kCluster };

SceneKind scene_kind_from_string(const std::string& name);

/// Layout of the poster scene: a box on the ground with a planar card leaning
/// against its +x face, the wedge behind the card closed by two side walls so
/// the card's back is unobservable from above the horizon.
struct PosterGeometry {
    Eigen::Vector3d box_min{-0.8, -0.6, 0.0};
    Eigen::Vector3d box_max{0.4, 0.6, 0.8};
    double card_bottom_x = 0.7;   // bottom edge on the ground
    double card_top_x = 0.4;      // top edge resting on the box top edge
    double card_top_z = 0.8;
    double card_half_y = 0.35;
};

/// Deterministic scene; uncert_sh zeroed. "poster" reproduces an
/// under-observed underside when captured from an upper orbit.
Scene make_scene(SceneKind kind, int n_gaussians, std::uint64_t seed);

/// Evenly spaced look-at-origin cameras along an azimuth arc at fixed
/// elevation; capture order is arc order. focal <= 0 picks a default.
std::vector<Camera> make_orbit(int n_cams, double radius, double elevation_deg,
                               double arc_deg, int width = 128, int height = 128,
                               double focal = 0.0);

/// Splits off one seeded contiguous block (wrap-around allowed) as the eval
/// set; train keeps the original order.
std::pair<std::vector<Camera>, std::vector<Camera>> split_consecutive_holdout(
    const std::vector<Camera>& cameras, int holdout_count, std::uint64_t seed);

}  // namespace splat
