#pragma once

#include <Eigen/Core>

#include <array>
#include <vector>

namespace splat {

inline constexpr int kMaxShDegree = 3;
inline constexpr int kMaxShCoeffs = 16;

constexpr int sh_coeff_count(int degree) { return (degree + 1) * (degree + 1); }

/// Coefficient vector for a real SH expansion of a scalar field on the sphere.
struct ShCoeffs {
    int degree = 0;
    std::vector<double> values;  // size (degree+1)^2, band order l asc, m -l..l

    static ShCoeffs zeros(int degree) {
        return ShCoeffs{degree, std::vector<double>(sh_coeff_count(degree), 0.0)};
    }
    bool valid() const;
};

/// Real SH basis values at a unit direction, in the band ordering used by
/// splatting rasterizers: band 1 is (-c1*y, c1*z, -c1*x).
/// Directions with |1 - |d|| < 1e-3 are normalized; anything further off
/// the unit sphere is a contract violation.
void eval_sh_basis(const Eigen::Vector3d& direction, int degree,
                   std::array<double, kMaxShCoeffs>& out);

std::vector<double> eval_sh_basis(const Eigen::Vector3d& direction, int degree);

/// coeffs . basis(direction)
double eval_sh_field(const ShCoeffs& coeffs, const Eigen::Vector3d& direction);

/// d(eval_sh_field)/d(coeffs); the field is linear in its coefficients so
/// this is just the basis vector.
std::vector<double> sh_field_gradient(const ShCoeffs& coeffs,
                                      const Eigen::Vector3d& direction);

}  // namespace splat
