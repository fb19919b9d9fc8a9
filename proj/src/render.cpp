#include "splat/render.hpp"

#include "splat/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace splat {

namespace {

struct Prepared {
    int id = -1;
    Eigen::Vector2d mean = Eigen::Vector2d::Zero();
    Eigen::Matrix2d inv_cov = Eigen::Matrix2d::Identity();
    double opacity = 0.0;
    double depth = 0.0;
    Eigen::Vector3d value = Eigen::Vector3d::Zero();
    Eigen::Vector3d view_dir = Eigen::Vector3d::UnitZ();
    // clipped pixel bounding box, inclusive; empty when x0 > x1
    int x0 = 0, x1 = -1, y0 = 0, y1 = -1;
};

Eigen::Vector3d splat_value(const Gaussian& g, const Eigen::Vector3d& view_dir,
                            RenderMode mode) {
    if (mode == RenderMode::kUncertainty) {
        const double u = g.uncertainty_value(view_dir);
        return Eigen::Vector3d(u, u, u);
    }
    std::array<double, kMaxShCoeffs> basis{};
    eval_sh_basis(view_dir, kMaxShDegree, basis);
    Eigen::Vector3d c;
    for (int ch = 0; ch < 3; ++ch) {
        double acc = 0.0;
        for (int i = 0; i < kMaxShCoeffs; ++i) acc += g.color_sh[ch].values[i] * basis[i];
        c[ch] = std::max(0.0, acc + 0.5);  // dc offset convention
    }
    return c;
}

Prepared prepare_one(const Splat2D& s, const Gaussian& g, RenderMode mode,
                     int width, int height) {
    Prepared p;
    p.id = s.gaussian_id;
    p.mean = s.mean2d;
    p.inv_cov = s.cov2d.inverse();
    p.opacity = g.opacity;
    p.depth = s.depth;
    p.view_dir = s.view_dir;
    p.value = splat_value(g, s.view_dir, mode);

    const double mid = 0.5 * (s.cov2d(0, 0) + s.cov2d(1, 1));
    const double det = s.cov2d.determinant();
    const double lmax = mid + std::sqrt(std::max(0.0, mid * mid - det));
    const double r = kCullSigma * std::sqrt(lmax);
    p.x0 = std::max(0, static_cast<int>(std::floor(s.mean2d.x() - r - 0.5)));
    p.x1 = std::min(width - 1, static_cast<int>(std::ceil(s.mean2d.x() + r - 0.5)));
    p.y0 = std::max(0, static_cast<int>(std::floor(s.mean2d.y() - r - 0.5)));
    p.y1 = std::min(height - 1, static_cast<int>(std::ceil(s.mean2d.y() + r - 0.5)));
    return p;
}

std::vector<Prepared> prepare_scene(const Scene& scene, const Camera& cam,
                                    RenderMode mode) {
    if (scene.gaussians.empty())
        throw std::runtime_error("render: empty scene");
    cam.validate();
    std::vector<Prepared> out;
    out.reserve(scene.gaussians.size());
    for (size_t i = 0; i < scene.gaussians.size(); ++i) {
        const Gaussian& g = scene.gaussians[i];
        auto proj = project(g, cam);
        if (!proj) continue;
        proj->gaussian_id = static_cast<int>(i);
        out.push_back(prepare_one(*proj, g, mode, cam.width, cam.height));
    }
    std::stable_sort(out.begin(), out.end(), [](const Prepared& a, const Prepared& b) {
        if (a.depth != b.depth) return a.depth < b.depth;
        return a.id < b.id;
    });
    return out;
}

/// Front-to-back accumulation; calls on_weight(splat, w) for every splat that
/// survives the alpha floor. Returns with bg already composited.
template <typename OnWeight>
void blend_core(std::span<const Prepared* const> splats, const Eigen::Vector2d& p,
                const Eigen::Vector3d& background, Eigen::Vector3d& value,
                double& transmittance, OnWeight&& on_weight) {
    value.setZero();
    transmittance = 1.0;
    for (const Prepared* s : splats) {
        const Eigen::Vector2d d = p - s->mean;
        const double power = -0.5 * d.dot(s->inv_cov * d);
        double k = s->opacity * std::exp(power);
        if (k > kAlphaClamp) k = kAlphaClamp;
        if (k < kMinAlpha) continue;
        const double w = transmittance * k;
        value += w * s->value;
        on_weight(*s, w);
        transmittance *= 1.0 - k;
        if (transmittance < kMinTransmittance) break;
    }
    value += transmittance * background;
}

}  // namespace

std::optional<Splat2D> project(const Gaussian& g, const Camera& cam) {
    const Eigen::Vector3d t = cam.rotation * g.position + cam.translation;
    const double z = t.z();
    if (z <= kNearPlane) return std::nullopt;

    const double inv_z = 1.0 / z;
    Eigen::Matrix<double, 2, 3> jac;
    jac << cam.fx * inv_z, 0.0, -cam.fx * t.x() * inv_z * inv_z,
           0.0, cam.fy * inv_z, -cam.fy * t.y() * inv_z * inv_z;
    const Eigen::Matrix<double, 2, 3> m = jac * cam.rotation;
    Eigen::Matrix2d cov2d = m * g.covariance() * m.transpose();
    cov2d(0, 0) += kCov2dLowPass;
    cov2d(1, 1) += kCov2dLowPass;

    Splat2D s;
    s.mean2d = Eigen::Vector2d(cam.fx * t.x() * inv_z + cam.cx,
                               cam.fy * t.y() * inv_z + cam.cy);
    s.cov2d = cov2d;
    s.depth = z;
    s.view_dir = (cam.center() - g.position).normalized();

    const double mid = 0.5 * (cov2d(0, 0) + cov2d(1, 1));
    const double det = cov2d.determinant();
    const double r = kCullSigma * std::sqrt(mid + std::sqrt(std::max(0.0, mid * mid - det)));
    if (s.mean2d.x() + r < 0.0 || s.mean2d.x() - r > cam.width ||
        s.mean2d.y() + r < 0.0 || s.mean2d.y() - r > cam.height)
        return std::nullopt;
    return s;
}

PixelBlend blend_pixel(std::span<const Splat2D> splats, const Eigen::Vector2d& pixel,
                       const Scene& scene, RenderMode mode) {
    std::vector<Prepared> prepared;
    prepared.reserve(splats.size());
    for (size_t i = 0; i < splats.size(); ++i) {
        const Splat2D& s = splats[i];
        if (i > 0 && s.depth < splats[i - 1].depth)
            throw std::invalid_argument("blend_pixel: splats not sorted by depth");
        if (s.gaussian_id < 0 ||
            s.gaussian_id >= static_cast<int>(scene.gaussians.size()))
            throw std::invalid_argument("blend_pixel: gaussian_id out of range");
        Prepared p = prepare_one(s, scene.gaussians[s.gaussian_id], mode, 1, 1);
        p.id = static_cast<int>(i);  // index into the input span
        prepared.push_back(p);
    }
    std::vector<const Prepared*> ptrs;
    ptrs.reserve(prepared.size());
    for (const Prepared& p : prepared) ptrs.push_back(&p);

    PixelBlend out;
    out.weights.assign(splats.size(), 0.0);
    const Eigen::Vector3d bg =
        mode == RenderMode::kColor ? scene.background_color : Eigen::Vector3d::Zero();
    blend_core(std::span<const Prepared* const>(ptrs), pixel, bg, out.value,
               out.transmittance,
               [&out](const Prepared& s, double w) { out.weights[s.id] = w; });
    return out;
}

RenderBuffer render(const Scene& scene, const Camera& cam, RenderMode mode) {
    const std::vector<Prepared> splats = prepare_scene(scene, cam, mode);

    RenderBuffer buf;
    buf.width = cam.width;
    buf.height = cam.height;
    buf.alpha = ScalarImage(cam.width, cam.height);
    if (mode == RenderMode::kColor)
        buf.color = ColorImage(cam.width, cam.height);
    else
        buf.uncert = ScalarImage(cam.width, cam.height);
    const Eigen::Vector3d bg =
        mode == RenderMode::kColor ? scene.background_color : Eigen::Vector3d::Zero();

    parallel_for(cam.height, [&](int y) {
        std::vector<const Prepared*> row;
        for (const Prepared& s : splats)
            if (y >= s.y0 && y <= s.y1) row.push_back(&s);
        std::vector<const Prepared*> cell;
        for (int x = 0; x < cam.width; ++x) {
            cell.clear();
            for (const Prepared* s : row)
                if (x >= s->x0 && x <= s->x1) cell.push_back(s);
            Eigen::Vector3d value;
            double transmittance;
            const Eigen::Vector2d p(x + 0.5, y + 0.5);
            blend_core(std::span<const Prepared* const>(cell), p, bg, value,
                       transmittance, [](const Prepared&, double) {});
            buf.alpha.at(x, y) = 1.0 - transmittance;
            if (mode == RenderMode::kColor)
                buf.color.at(x, y) = value.cwiseMax(0.0).cwiseMin(1.0);
            else
                buf.uncert.at(x, y) = std::clamp(value[0], 0.0, 1.0);
        }
    });
    return buf;
}

std::vector<ContributionRecord> collect_contributions(const Scene& scene,
                                                      const Camera& cam,
                                                      double threshold) {
    if (!(threshold > 0.0 && threshold < 1.0))
        throw std::invalid_argument("collect_contributions: threshold must be in (0,1)");
    const std::vector<Prepared> splats =
        prepare_scene(scene, cam, RenderMode::kUncertainty);
    const Eigen::Vector3d bg = Eigen::Vector3d::Zero();

    std::vector<std::vector<ContributionRecord>> rows(cam.height);
    parallel_for(cam.height, [&](int y) {
        std::vector<const Prepared*> row;
        for (const Prepared& s : splats)
            if (y >= s.y0 && y <= s.y1) row.push_back(&s);
        std::vector<const Prepared*> cell;
        for (int x = 0; x < cam.width; ++x) {
            cell.clear();
            for (const Prepared* s : row)
                if (x >= s->x0 && x <= s->x1) cell.push_back(s);
            Eigen::Vector3d value;
            double transmittance;
            const Eigen::Vector2d p(x + 0.5, y + 0.5);
            blend_core(std::span<const Prepared* const>(cell), p, bg, value,
                       transmittance, [&](const Prepared& s, double w) {
                           if (w >= threshold)
                               rows[y].push_back(ContributionRecord{
                                   s.id, Eigen::Vector2i(x, y), s.view_dir, w});
                       });
        }
    });

    std::vector<ContributionRecord> out;
    for (auto& r : rows)
        out.insert(out.end(), r.begin(), r.end());
    return out;
}

}  // namespace splat
