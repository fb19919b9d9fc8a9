#pragma once

#include "splat/sh.hpp"

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <array>
#include <string>
#include <vector>

namespace splat {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }
inline double logit(double p) { return std::log(p / (1.0 - p)); }

struct Gaussian {
    Eigen::Vector3d position = Eigen::Vector3d::Zero();
    Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();  // wxyz on disk
    Eigen::Vector3d scale = Eigen::Vector3d::Ones();               // linear, > 0
    double opacity = 0.5;                                          // in (0, 1)
    std::array<ShCoeffs, 3> color_sh;                              // degree 3 per channel
    ShCoeffs uncert_sh;                                            // default degree 2

    Gaussian();

    Eigen::Matrix3d covariance() const;  // R S S^T R^T
    /// sigmoid-squashed SH field, strictly inside (0, 1)
    double uncertainty_value(const Eigen::Vector3d& direction) const;
};

struct Camera {
    int width = 0, height = 0;
    double fx = 0, fy = 0, cx = 0, cy = 0;
    Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();  // world -> camera
    Eigen::Vector3d translation = Eigen::Vector3d::Zero();

    Eigen::Vector3d center() const { return -rotation.transpose() * translation; }
    void validate() const;
};

struct Scene {
    std::vector<Gaussian> gaussians;
    Eigen::Vector3d background_color = Eigen::Vector3d::Zero();
    int uncert_degree = 2;

    void validate() const;
};

/// Binary little-endian PLY with the de-facto 3DGS vertex layout
/// (f_dc_*, f_rest_*, logit opacity, log scales, wxyz quaternion) extended
/// with u_0..u_{k-1} uncertainty SH coefficients and a
/// "comment uncert_sh_degree <d>" header line.
Scene load_scene(const std::string& path);
void save_scene(const Scene& scene, const std::string& path);

/// { "cameras": [ { width, height, fx, fy, cx, cy, world_to_camera: 16 row-major } ] }
std::vector<Camera> load_cameras(const std::string& path);
void save_cameras(const std::vector<Camera>& cameras, const std::string& path);

}  // namespace splat
