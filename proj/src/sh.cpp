#include "splat/sh.hpp"

#include <cmath>
#include <stdexcept>

namespace splat {

namespace {

constexpr double C0 = 0.28209479177387814;  // 1 / (2 sqrt(pi))
constexpr double C1 = 0.4886025119029199;   // sqrt(3 / (4 pi))
constexpr double C2[] = {
    1.0925484305920792,   // sqrt(15 / (4 pi))
    -1.0925484305920792,
    0.31539156525252005,  // sqrt(5 / (16 pi))
    -1.0925484305920792,
    0.5462742152960396,   // sqrt(15 / (16 pi))
};
constexpr double C3[] = {
    -0.5900435899266435,  // sqrt(35 / (32 pi))
    2.890611442640554,    // sqrt(105 / (4 pi))
    -0.4570457994644658,  // sqrt(21 / (32 pi))
    0.3731763325901154,   // sqrt(7 / (16 pi))
    -0.4570457994644658,
    1.445305721320277,    // sqrt(105 / (16 pi))
    -0.5900435899266435,
};

Eigen::Vector3d checked_direction(const Eigen::Vector3d& d) {
    const double n = d.norm();
    if (!std::isfinite(n) || std::abs(n - 1.0) >= 1e-3)
        throw std::invalid_argument("sh: direction is not unit length (|d| = " +
                                    std::to_string(n) + ")");
    return d / n;
}

}  // namespace

bool ShCoeffs::valid() const {
    if (degree < 0 || degree > kMaxShDegree) return false;
    if (static_cast<int>(values.size()) != sh_coeff_count(degree)) return false;
    for (double v : values)
        if (!std::isfinite(v)) return false;
    return true;
}

void eval_sh_basis(const Eigen::Vector3d& direction, int degree,
                   std::array<double, kMaxShCoeffs>& out) {
    if (degree < 0 || degree > kMaxShDegree)
        throw std::invalid_argument("sh: degree must be in [0, 3]");
    const Eigen::Vector3d d = checked_direction(direction);
    const double x = d.x(), y = d.y(), z = d.z();

    out[0] = C0;
    if (degree < 1) return;
    out[1] = -C1 * y;
    out[2] = C1 * z;
    out[3] = -C1 * x;
    if (degree < 2) return;
    const double xx = x * x, yy = y * y, zz = z * z;
    const double xy = x * y, yz = y * z, xz = x * z;
    out[4] = C2[0] * xy;
    out[5] = C2[1] * yz;
    out[6] = C2[2] * (2.0 * zz - xx - yy);
    out[7] = C2[3] * xz;
    out[8] = C2[4] * (xx - yy);
    if (degree < 3) return;
    out[9] = C3[0] * y * (3.0 * xx - yy);
    out[10] = C3[1] * xy * z;
    out[11] = C3[2] * y * (4.0 * zz - xx - yy);
    out[12] = C3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy);
    out[13] = C3[4] * x * (4.0 * zz - xx - yy);
    out[14] = C3[5] * z * (xx - yy);
    out[15] = C3[6] * x * (xx - 3.0 * yy);
}

std::vector<double> eval_sh_basis(const Eigen::Vector3d& direction, int degree) {
    std::array<double, kMaxShCoeffs> buf{};
    eval_sh_basis(direction, degree, buf);
    return std::vector<double>(buf.begin(), buf.begin() + sh_coeff_count(degree));
}

double eval_sh_field(const ShCoeffs& coeffs, const Eigen::Vector3d& direction) {
    if (!coeffs.valid())
        throw std::invalid_argument("sh: invalid coefficient vector");
    std::array<double, kMaxShCoeffs> buf{};
    eval_sh_basis(direction, coeffs.degree, buf);
    double acc = 0.0;
    for (int i = 0; i < sh_coeff_count(coeffs.degree); ++i)
        acc += coeffs.values[i] * buf[i];
    return acc;
}

std::vector<double> sh_field_gradient(const ShCoeffs& coeffs,
                                      const Eigen::Vector3d& direction) {
    if (!coeffs.valid())
        throw std::invalid_argument("sh: invalid coefficient vector");
    return eval_sh_basis(direction, coeffs.degree);
}

}  // namespace splat
