#pragma once

#include "splat/image.hpp"
#include "splat/scene.hpp"

#include <string>
#include <vector>

namespace splat {

struct SparsificationCurve {
    std::vector<double> fractions;  // ascending, in [0, 1)
    std::vector<double> mae;        // same length
    bool normalized = false;
};

/// MAE of the retained pixels after removing the floor(f*n) highest-ranked
/// pixels (ties broken by pixel index ascending). When normalize is set, the
/// curve is divided by the f=0 MAE (an all-zero error map stays zero).
SparsificationCurve sparsification_curve(const ScalarImage& errors,
                                         const ScalarImage& ranking,
                                         const std::vector<double>& fractions,
                                         bool normalize = false);

struct AuseResult {
    double ause = 0.0;
    bool zero_error_warning = false;  // all-zero error map, ause defined as 0
    SparsificationCurve uncertainty_curve;
    SparsificationCurve oracle_curve;
};

/// AUSE on the fraction grid {0, 0.01, ..., 0.99}, both curves normalized by
/// the f=0 MAE; the scalar is the grid mean of (uncertainty - oracle).
AuseResult ause_detail(const ScalarImage& errors, const ScalarImage& uncertainty);
double ause(const ScalarImage& errors, const ScalarImage& uncertainty);

/// Per-pixel mean absolute RGB difference.
ScalarImage error_map(const ColorImage& rendered, const ColorImage& gt);

struct EvalReport {
    std::vector<double> per_view_ause;
    double mean_ause = 0.0;
    bool any_zero_error_warning = false;
    std::vector<AuseResult> per_view;
};

/// Renders the scene at every eval camera, differences against ground truth,
/// and scores the given uncertainty maps.
EvalReport evaluate_method(const Scene& scene,
                           const std::vector<Camera>& eval_cameras,
                           const std::vector<ColorImage>& gt_images,
                           const std::vector<ScalarImage>& uncertainty_maps);

// "fraction,mae_uncertainty,mae_oracle"
void write_curve_csv(const AuseResult& result, const std::string& path);
void write_curve_svg(const AuseResult& result, const std::string& path);

}  // namespace splat
