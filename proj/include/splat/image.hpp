#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

namespace splat {

/// Row-major scalar raster, values nominally in [0,1].
struct ScalarImage {
    int width = 0, height = 0;
    std::vector<double> data;

    ScalarImage() = default;
    ScalarImage(int w, int h, double fill = 0.0)
        : width(w), height(h), data(static_cast<size_t>(w) * h, fill) {}
    double& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    double at(int x, int y) const { return data[static_cast<size_t>(y) * width + x]; }
    size_t size() const { return data.size(); }
};

struct ColorImage {
    int width = 0, height = 0;
    std::vector<Eigen::Vector3d> data;

    ColorImage() = default;
    ColorImage(int w, int h)
        : width(w), height(h),
          data(static_cast<size_t>(w) * h, Eigen::Vector3d::Zero()) {}
    Eigen::Vector3d& at(int x, int y) { return data[static_cast<size_t>(y) * width + x]; }
    const Eigen::Vector3d& at(int x, int y) const {
        return data[static_cast<size_t>(y) * width + x];
    }
    size_t size() const { return data.size(); }
};

// 8-bit image files; values mapped via round(255 * clamp(v, 0, 1)).
void write_ppm(const ColorImage& img, const std::string& path);
void write_pgm(const ScalarImage& img, const std::string& path);
ColorImage read_ppm(const std::string& path);
ScalarImage read_pgm(const std::string& path);

}  // namespace splat
