#include "splat/ensemble.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>
#include <unordered_map>

namespace splat {

namespace {

constexpr double kAdamBeta1 = 0.9;
constexpr double kAdamBeta2 = 0.999;
constexpr double kAdamEps = 1e-8;
constexpr double kPairFloor = 1e-6;  // harvest floor for blend weights
constexpr double kDcInitSigma = 0.3;
constexpr double kRestInitSigma = 0.05;

}  // namespace

void EnsembleConfig::validate() const {
    if (members < 2) throw std::invalid_argument("ensemble: members must be >= 2");
    if (fit_iterations < 0)
        throw std::invalid_argument("ensemble: fit_iterations must be >= 0");
    if (learning_rate <= 0)
        throw std::invalid_argument("ensemble: learning_rate must be positive");
}

PhotometricCache build_photometric_cache(const Scene& scene,
                                         const std::vector<Camera>& cameras) {
    PhotometricCache cache;
    cache.cameras.resize(cameras.size());
    for (size_t ci = 0; ci < cameras.size(); ++ci) {
        const Camera& cam = cameras[ci];
        PhotometricCache::PerCamera& pc = cache.cameras[ci];
        pc.width = cam.width;
        pc.height = cam.height;

        std::unordered_map<int, int> compact;
        for (const ContributionRecord& r :
             collect_contributions(scene, cam, kPairFloor)) {
            auto [it, inserted] =
                compact.try_emplace(r.gaussian_id, static_cast<int>(pc.gaussian_ids.size()));
            if (inserted) {
                pc.gaussian_ids.push_back(r.gaussian_id);
                std::array<double, kMaxShCoeffs> b{};
                eval_sh_basis(r.view_dir, kMaxShDegree, b);
                pc.basis.push_back(b);
            }
            pc.pairs.push_back({it->second,
                                r.pixel.y() * cam.width + r.pixel.x(),
                                static_cast<float>(r.weight)});
        }
        const RenderBuffer buf = render(scene, cam, RenderMode::kUncertainty);
        pc.bg_transmittance.resize(buf.alpha.size());
        for (size_t p = 0; p < buf.alpha.size(); ++p)
            pc.bg_transmittance[p] = static_cast<float>(1.0 - buf.alpha.data[p]);
    }
    return cache;
}

Scene fit_member(const Scene& scene, const std::vector<Camera>& cameras,
                 const std::vector<ColorImage>& targets, std::uint64_t seed,
                 const EnsembleConfig& config) {
    return fit_member(scene, build_photometric_cache(scene, cameras), targets, seed,
                      config);
}

Scene fit_member(const Scene& scene, const PhotometricCache& cache,
                 const std::vector<ColorImage>& targets, std::uint64_t seed,
                 const EnsembleConfig& config) {
    config.validate();
    if (targets.empty()) throw std::invalid_argument("fit_member: no target images");
    if (targets.size() != cache.cameras.size())
        throw std::invalid_argument("fit_member: targets/cameras mismatch");
    for (size_t i = 0; i < targets.size(); ++i)
        if (targets[i].width != cache.cameras[i].width ||
            targets[i].height != cache.cameras[i].height)
            throw std::invalid_argument("fit_member: target size mismatch at view " +
                                        std::to_string(i));

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);

    Scene member = scene;
    for (Gaussian& g : member.gaussians)
        for (int ch = 0; ch < 3; ++ch) {
            g.color_sh[ch].values[0] = kDcInitSigma * normal(rng);
            for (int i = 1; i < kMaxShCoeffs; ++i)
                g.color_sh[ch].values[i] = kRestInitSigma * normal(rng);
        }

    std::vector<int> views(cache.cameras.size());
    if (config.bootstrap) {
        std::uniform_int_distribution<int> pick(0,
                                                static_cast<int>(cache.cameras.size()) - 1);
        for (int& v : views) v = pick(rng);
    } else {
        for (size_t i = 0; i < views.size(); ++i) views[i] = static_cast<int>(i);
    }
    std::size_t total_px = 0;
    for (int v : views)
        total_px += static_cast<size_t>(cache.cameras[v].width) * cache.cameras[v].height;

    const int n = static_cast<int>(member.gaussians.size());
    std::vector<Eigen::Matrix<double, 16, 3>> coeffs(n), grad(n), m(n), v2(n);
    for (int g = 0; g < n; ++g) {
        m[g].setZero();
        v2[g].setZero();
        for (int ch = 0; ch < 3; ++ch)
            for (int i = 0; i < kMaxShCoeffs; ++i)
                coeffs[g](i, ch) = member.gaussians[g].color_sh[ch].values[i];
    }

    std::vector<Eigen::Vector3d> resid;
    std::vector<Eigen::Vector3d> splat_color, splat_acc;
    const double norm = 2.0 / (3.0 * static_cast<double>(total_px));

    for (int it = 1; it <= config.fit_iterations; ++it) {
        for (int g = 0; g < n; ++g) grad[g].setZero();
        for (int vi : views) {
            const PhotometricCache::PerCamera& pc = cache.cameras[vi];
            const ColorImage& gt = targets[vi];
            const size_t npx = gt.size();

            splat_color.assign(pc.gaussian_ids.size(), Eigen::Vector3d::Zero());
            for (size_t s = 0; s < pc.gaussian_ids.size(); ++s) {
                const auto& b = pc.basis[s];
                const auto& c = coeffs[pc.gaussian_ids[s]];
                for (int ch = 0; ch < 3; ++ch) {
                    double acc = 0.5;  // dc offset, linear path (no clamp)
                    for (int i = 0; i < kMaxShCoeffs; ++i) acc += b[i] * c(i, ch);
                    splat_color[s][ch] = acc;
                }
            }
            resid.resize(npx);
            for (size_t p = 0; p < npx; ++p)
                resid[p] = pc.bg_transmittance[p] * scene.background_color - gt.data[p];
            for (const auto& pair : pc.pairs)
                resid[pair.pixel] += pair.weight * splat_color[pair.splat];

            splat_acc.assign(pc.gaussian_ids.size(), Eigen::Vector3d::Zero());
            for (const auto& pair : pc.pairs)
                splat_acc[pair.splat] += static_cast<double>(pair.weight) * resid[pair.pixel];
            for (size_t s = 0; s < pc.gaussian_ids.size(); ++s) {
                const auto& b = pc.basis[s];
                auto& g = grad[pc.gaussian_ids[s]];
                for (int ch = 0; ch < 3; ++ch) {
                    const double a = norm * splat_acc[s][ch];
                    for (int i = 0; i < kMaxShCoeffs; ++i) g(i, ch) += a * b[i];
                }
            }
        }

        const double bc1 = 1.0 - std::pow(kAdamBeta1, it);
        const double bc2 = 1.0 - std::pow(kAdamBeta2, it);
        for (int g = 0; g < n; ++g) {
            m[g] = kAdamBeta1 * m[g] + (1.0 - kAdamBeta1) * grad[g];
            v2[g] = kAdamBeta2 * v2[g] + (1.0 - kAdamBeta2) * grad[g].cwiseProduct(grad[g]);
            coeffs[g].array() -= config.learning_rate * (m[g].array() / bc1) /
                                 ((v2[g].array() / bc2).sqrt() + kAdamEps);
        }
    }

    for (int g = 0; g < n; ++g)
        for (int ch = 0; ch < 3; ++ch)
            for (int i = 0; i < kMaxShCoeffs; ++i)
                member.gaussians[g].color_sh[ch].values[i] = coeffs[g](i, ch);
    return member;
}

std::vector<Scene> fit_ensemble(const Scene& scene,
                                const std::vector<Camera>& cameras,
                                const std::vector<ColorImage>& targets,
                                const EnsembleConfig& config,
                                std::vector<double>* member_seconds) {
    config.validate();
    const PhotometricCache cache = build_photometric_cache(scene, cameras);
    std::vector<Scene> members;
    members.reserve(config.members);
    for (int k = 0; k < config.members; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        members.push_back(fit_member(scene, cache, targets, config.seed + k, config));
        if (member_seconds)
            member_seconds->push_back(
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                    .count());
    }
    return members;
}

ScalarImage ensemble_uncertainty(const std::vector<Scene>& members,
                                 const Camera& cam) {
    if (members.size() < 2)
        throw std::invalid_argument("ensemble_uncertainty: need at least 2 members");
    for (size_t k = 1; k < members.size(); ++k) {
        if (members[k].gaussians.size() != members[0].gaussians.size())
            throw std::invalid_argument("ensemble_uncertainty: geometry mismatch");
        for (size_t g = 0; g < members[0].gaussians.size(); ++g)
            if (members[k].gaussians[g].position != members[0].gaussians[g].position)
                throw std::invalid_argument("ensemble_uncertainty: geometry mismatch");
    }

    // two-pass variance: identical members must give an exact zero map
    const size_t npx = static_cast<size_t>(cam.width) * cam.height;
    std::vector<std::vector<double>> lum;
    lum.reserve(members.size());
    for (const Scene& member : members) {
        const RenderBuffer buf = render(member, cam, RenderMode::kColor);
        std::vector<double> l(npx);
        for (size_t p = 0; p < npx; ++p) l[p] = buf.color.data[p].mean();
        lum.push_back(std::move(l));
    }

    ScalarImage out(cam.width, cam.height);
    const double inv_n = 1.0 / static_cast<double>(members.size());
    double max_std = 0.0;
    for (size_t p = 0; p < npx; ++p) {
        bool all_equal = true;
        for (const auto& l : lum) all_equal &= l[p] == lum[0][p];
        if (all_equal) continue;  // exact zero, immune to mean rounding
        double mean = 0.0;
        for (const auto& l : lum) mean += l[p];
        mean *= inv_n;
        double var = 0.0;
        for (const auto& l : lum) var += (l[p] - mean) * (l[p] - mean);
        out.data[p] = std::sqrt(var * inv_n);
        max_std = std::max(max_std, out.data[p]);
    }
    if (max_std > 0.0)
        for (double& v : out.data) v /= max_std;
    return out;
}

}  // namespace splat
