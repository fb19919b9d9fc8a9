#include "splat/synth.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace splat {

namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kShC0 = 0.28209479177387814;

double deg2rad(double d) { return d * kPi / 180.0; }

struct SurfacePoint {
    Eigen::Vector3d position;
    Eigen::Vector3d normal;
    Eigen::Vector3d base_color;
};

Gaussian make_surface_gaussian(const SurfacePoint& sp, double tangent_scale,
                               double normal_scale, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    std::normal_distribution<double> normal(0.0, 1.0);

    Gaussian g;
    g.position = sp.position;
    g.rotation = Eigen::Quaterniond::FromTwoVectors(Eigen::Vector3d::UnitZ(),
                                                    sp.normal)
                     .normalized();
    g.scale = Eigen::Vector3d(tangent_scale * (0.7 + 0.6 * uni(rng)),
                              tangent_scale * (0.7 + 0.6 * uni(rng)), normal_scale);
    g.opacity = 0.75 + 0.2 * uni(rng);
    for (int ch = 0; ch < 3; ++ch) {
        const double rgb =
            std::clamp(sp.base_color[ch] + 0.08 * normal(rng), 0.05, 0.95);
        g.color_sh[ch].values[0] = (rgb - 0.5) / kShC0;
        for (int i = 1; i < 4; ++i) g.color_sh[ch].values[i] = 0.05 * normal(rng);
    }
    return g;
}

// Jittered point on a rectangle patch: origin + s*edge_u + t*edge_v.
SurfacePoint rect_point(const Eigen::Vector3d& origin, const Eigen::Vector3d& eu,
                        const Eigen::Vector3d& ev, const Eigen::Vector3d& n,
                        const Eigen::Vector3d& color, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    return SurfacePoint{origin + uni(rng) * eu + uni(rng) * ev, n, color};
}

Scene make_poster(int n, std::mt19937_64& rng) {
    const PosterGeometry geo;
    const Eigen::Vector3d bmin = geo.box_min, bmax = geo.box_max;
    const Eigen::Vector3d ext = bmax - bmin;

    // card plane, leaning from the ground up to the box top edge
    const Eigen::Vector3d card_origin(geo.card_bottom_x, -geo.card_half_y, 0.0);
    const Eigen::Vector3d card_eu(geo.card_top_x - geo.card_bottom_x, 0.0,
                                  geo.card_top_z);
    const Eigen::Vector3d card_ev(0.0, 2.0 * geo.card_half_y, 0.0);
    const Eigen::Vector3d card_normal = card_eu.cross(card_ev).normalized() * -1.0;

    struct Patch {
        Eigen::Vector3d origin, eu, ev, n, color;
        double weight;
    };
    std::vector<Patch> patches;
    // box top and the four vertical faces (the bottom face sits on the ground)
    patches.push_back({{bmin.x(), bmin.y(), bmax.z()},
                       {ext.x(), 0, 0},
                       {0, ext.y(), 0},
                       {0, 0, 1},
                       {0.75, 0.6, 0.35},
                       ext.x() * ext.y()});
    patches.push_back({{bmin.x(), bmin.y(), 0},
                       {0, ext.y(), 0},
                       {0, 0, ext.z()},
                       {-1, 0, 0},
                       {0.7, 0.5, 0.3},
                       ext.y() * ext.z()});
    patches.push_back({{bmax.x(), bmin.y(), 0},
                       {0, ext.y(), 0},
                       {0, 0, ext.z()},
                       {1, 0, 0},
                       {0.7, 0.5, 0.3},
                       ext.y() * ext.z()});
    patches.push_back({{bmin.x(), bmin.y(), 0},
                       {ext.x(), 0, 0},
                       {0, 0, ext.z()},
                       {0, -1, 0},
                       {0.65, 0.45, 0.3},
                       ext.x() * ext.z()});
    patches.push_back({{bmin.x(), bmax.y(), 0},
                       {ext.x(), 0, 0},
                       {0, 0, ext.z()},
                       {0, 1, 0},
                       {0.65, 0.45, 0.3},
                       ext.x() * ext.z()});
    // the card itself, weighted up so it stays densely covered
    patches.push_back({card_origin, card_eu, card_ev, card_normal,
                       {0.25, 0.4, 0.75}, 2.5 * card_eu.norm() * card_ev.norm()});
    // side walls closing the wedge (triangles handled via rejection below)
    for (double side : {-1.0, 1.0}) {
        const double y = side * geo.card_half_y;
        patches.push_back({{geo.card_top_x, y, 0.0},
                           {geo.card_bottom_x - geo.card_top_x, 0.0, 0.0},
                           {0.0, 0.0, geo.card_top_z},
                           {0.0, side, 0.0},
                           {0.5, 0.5, 0.55},
                           0.5 * (geo.card_bottom_x - geo.card_top_x) * geo.card_top_z});
    }

    double wsum = 0.0;
    for (const Patch& p : patches) wsum += p.weight;

    Scene scene;
    scene.background_color = Eigen::Vector3d::Zero();
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    while (static_cast<int>(scene.gaussians.size()) < n) {
        double pick = uni(rng) * wsum;
        size_t pi = 0;
        while (pi + 1 < patches.size() && pick > patches[pi].weight) {
            pick -= patches[pi].weight;
            ++pi;
        }
        const Patch& p = patches[pi];
        SurfacePoint sp = rect_point(p.origin, p.eu, p.ev, p.n, p.color, rng);
        const bool wall = pi >= patches.size() - 2;
        if (wall) {
            // keep the triangular half under the card line x/0.3 + z/0.8 wedge
            const double fx = (sp.position.x() - geo.card_top_x) /
                              (geo.card_bottom_x - geo.card_top_x);
            const double fz = sp.position.z() / geo.card_top_z;
            if (fx + fz > 1.0) continue;
        }
        Gaussian g = make_surface_gaussian(sp, 0.045, 0.01, rng);
        g.position.z() = std::max(g.position.z(), 0.0);
        scene.gaussians.push_back(g);
    }
    return scene;
}

Scene make_box(int n, std::mt19937_64& rng) {
    Scene scene;
    scene.background_color = Eigen::Vector3d::Zero();
    const Eigen::Vector3d half(0.5, 0.5, 0.5);
    std::uniform_real_distribution<double> uni(-1.0, 1.0);
    std::uniform_int_distribution<int> face(0, 5);
    for (int i = 0; i < n; ++i) {
        const int f = face(rng);
        const int axis = f / 2;
        const double sign = f % 2 ? 1.0 : -1.0;
        Eigen::Vector3d pos(uni(rng) * half.x(), uni(rng) * half.y(),
                            uni(rng) * half.z());
        pos[axis] = sign * half[axis];
        Eigen::Vector3d normal = Eigen::Vector3d::Zero();
        normal[axis] = sign;
        const Eigen::Vector3d color =
            0.5 * (Eigen::Vector3d::Ones() + normal * 0.6);
        scene.gaussians.push_back(
            make_surface_gaussian({pos, normal, color}, 0.05, 0.012, rng));
    }
    return scene;
}

Scene make_cluster(int n, std::mt19937_64& rng) {
    Scene scene;
    scene.background_color = Eigen::Vector3d::Zero();
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> uni(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
        Gaussian g;
        if (n > 1)
            g.position = Eigen::Vector3d(normal(rng), normal(rng), normal(rng)) * 0.3;
        Eigen::Vector4d q(normal(rng), normal(rng), normal(rng), normal(rng));
        q.normalize();
        g.rotation = Eigen::Quaterniond(q[0], q[1], q[2], q[3]);
        g.scale = Eigen::Vector3d(0.03 + 0.05 * uni(rng), 0.03 + 0.05 * uni(rng),
                                  0.03 + 0.05 * uni(rng));
        g.opacity = 0.6 + 0.35 * uni(rng);
        for (int ch = 0; ch < 3; ++ch) {
            g.color_sh[ch].values[0] = (0.1 + 0.8 * uni(rng) - 0.5) / kShC0;
            for (int j = 1; j < 4; ++j) g.color_sh[ch].values[j] = 0.05 * normal(rng);
        }
        scene.gaussians.push_back(g);
    }
    return scene;
}

}  // namespace

SceneKind scene_kind_from_string(const std::string& name) {
    if (name == "box") return SceneKind::kBox;
    if (name == "poster") return SceneKind::kPoster;
    if (name == "cluster") return SceneKind::kCluster;
    throw std::invalid_argument("unknown scene kind '" + name + "'");
}

Scene make_scene(SceneKind kind, int n_gaussians, std::uint64_t seed) {
    if (n_gaussians < 1)
        throw std::invalid_argument("make_scene: need at least one gaussian");
    std::mt19937_64 rng(seed);
    switch (kind) {
        case SceneKind::kBox: return make_box(n_gaussians, rng);
        case SceneKind::kPoster: return make_poster(n_gaussians, rng);
        case SceneKind::kCluster: return make_cluster(n_gaussians, rng);
    }
    throw std::invalid_argument("make_scene: unknown kind");
}

std::vector<Camera> make_orbit(int n_cams, double radius, double elevation_deg,
                               double arc_deg, int width, int height,
                               double focal) {
    if (n_cams < 1) throw std::invalid_argument("make_orbit: need at least one camera");
    if (!(radius > 0)) throw std::invalid_argument("make_orbit: radius must be positive");
    if (focal <= 0.0) focal = 1.1 * std::max(width, height);

    const double elev = deg2rad(elevation_deg);
    std::vector<Camera> cams;
    for (int i = 0; i < n_cams; ++i) {
        const double az = deg2rad(arc_deg) * i / n_cams;
        const Eigen::Vector3d pos = radius * Eigen::Vector3d(std::cos(elev) * std::cos(az),
                                                             std::cos(elev) * std::sin(az),
                                                             std::sin(elev));
        const Eigen::Vector3d forward = (-pos).normalized();
        Eigen::Vector3d right = forward.cross(Eigen::Vector3d::UnitZ());
        if (right.norm() < 1e-9) right = Eigen::Vector3d::UnitX();  // polar view
        right.normalize();
        const Eigen::Vector3d down = forward.cross(right);

        Camera c;
        c.width = width;
        c.height = height;
        c.fx = c.fy = focal;
        c.cx = width / 2.0;
        c.cy = height / 2.0;
        c.rotation.row(0) = right;
        c.rotation.row(1) = down;
        c.rotation.row(2) = forward;
        c.translation = -c.rotation * pos;
        cams.push_back(c);
    }
    return cams;
}

std::pair<std::vector<Camera>, std::vector<Camera>> split_consecutive_holdout(
    const std::vector<Camera>& cameras, int holdout_count, std::uint64_t seed) {
    const int n = static_cast<int>(cameras.size());
    if (holdout_count < 1 || holdout_count >= n)
        throw std::invalid_argument(
            "split_consecutive_holdout: holdout_count must be in [1, n)");
    std::mt19937_64 rng(seed);
    const int start = std::uniform_int_distribution<int>(0, n - 1)(rng);

    std::vector<bool> held(n, false);
    for (int i = 0; i < holdout_count; ++i) held[(start + i) % n] = true;

    std::vector<Camera> train, eval;
    for (int i = 0; i < holdout_count; ++i) eval.push_back(cameras[(start + i) % n]);
    for (int i = 0; i < n; ++i)
        if (!held[i]) train.push_back(cameras[i]);
    return {train, eval};
}

}  // namespace splat
