#include "splat/sparsification.hpp"

#include "splat/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace splat {

namespace {

std::vector<double> ause_grid() {
    std::vector<double> f(100);
    for (int i = 0; i < 100; ++i) f[i] = i / 100.0;
    return f;
}

void check_shapes(const ScalarImage& a, const ScalarImage& b) {
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("sparsification: raster shape mismatch");
    if (a.size() == 0)
        throw std::invalid_argument("sparsification: empty raster");
}

}  // namespace

SparsificationCurve sparsification_curve(const ScalarImage& errors,
                                         const ScalarImage& ranking,
                                         const std::vector<double>& fractions,
                                         bool normalize) {
    check_shapes(errors, ranking);
    for (double f : fractions)
        if (!(f >= 0.0 && f < 1.0))
            throw std::invalid_argument("sparsification: fraction outside [0,1)");

    const size_t n = errors.size();
    std::vector<size_t> order(n);
    std::iota(order.begin(), order.end(), size_t{0});
    std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
        if (ranking.data[a] != ranking.data[b]) return ranking.data[a] > ranking.data[b];
        return a < b;
    });

    // removed[m] = sum of errors of the m highest-ranked pixels
    std::vector<double> removed(n + 1, 0.0);
    for (size_t i = 0; i < n; ++i)
        removed[i + 1] = removed[i] + errors.data[order[i]];
    const double total = removed[n];

    SparsificationCurve curve;
    curve.fractions = fractions;
    curve.normalized = normalize;
    const double mae0 = total / static_cast<double>(n);
    for (double f : fractions) {
        const size_t m = static_cast<size_t>(std::floor(f * static_cast<double>(n)));
        double mae = (total - removed[m]) / static_cast<double>(n - m);
        if (normalize) mae = mae0 > 0.0 ? mae / mae0 : 0.0;
        curve.mae.push_back(mae);
    }
    return curve;
}

AuseResult ause_detail(const ScalarImage& errors, const ScalarImage& uncertainty) {
    check_shapes(errors, uncertainty);
    AuseResult r;
    const auto grid = ause_grid();
    r.uncertainty_curve = sparsification_curve(errors, uncertainty, grid, true);
    r.oracle_curve = sparsification_curve(errors, errors, grid, true);

    const double total =
        std::accumulate(errors.data.begin(), errors.data.end(), 0.0);
    if (total <= 0.0) {
        r.zero_error_warning = true;
        r.ause = 0.0;
        return r;
    }
    double acc = 0.0;
    for (size_t i = 0; i < grid.size(); ++i)
        acc += r.uncertainty_curve.mae[i] - r.oracle_curve.mae[i];
    r.ause = acc / static_cast<double>(grid.size());
    return r;
}

double ause(const ScalarImage& errors, const ScalarImage& uncertainty) {
    return ause_detail(errors, uncertainty).ause;
}

ScalarImage error_map(const ColorImage& rendered, const ColorImage& gt) {
    if (rendered.width != gt.width || rendered.height != gt.height)
        throw std::invalid_argument("error_map: shape mismatch");
    ScalarImage out(rendered.width, rendered.height);
    for (size_t p = 0; p < out.size(); ++p)
        out.data[p] = (rendered.data[p] - gt.data[p]).cwiseAbs().mean();
    return out;
}

EvalReport evaluate_method(const Scene& scene,
                           const std::vector<Camera>& eval_cameras,
                           const std::vector<ColorImage>& gt_images,
                           const std::vector<ScalarImage>& uncertainty_maps) {
    if (eval_cameras.size() != gt_images.size() ||
        eval_cameras.size() != uncertainty_maps.size())
        throw std::invalid_argument("evaluate_method: misaligned inputs");
    if (eval_cameras.empty())
        throw std::invalid_argument("evaluate_method: no eval views");

    EvalReport report;
    for (size_t i = 0; i < eval_cameras.size(); ++i) {
        const RenderBuffer buf = render(scene, eval_cameras[i], RenderMode::kColor);
        const ScalarImage err = error_map(buf.color, gt_images[i]);
        AuseResult r = ause_detail(err, uncertainty_maps[i]);
        report.per_view_ause.push_back(r.ause);
        report.any_zero_error_warning |= r.zero_error_warning;
        report.per_view.push_back(std::move(r));
    }
    report.mean_ause = std::accumulate(report.per_view_ause.begin(),
                                       report.per_view_ause.end(), 0.0) /
                       static_cast<double>(report.per_view_ause.size());
    return report;
}

void write_curve_csv(const AuseResult& result, const std::string& path) {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("write_curve_csv: cannot open " + path);
    f << "fraction,mae_uncertainty,mae_oracle\n";
    for (size_t i = 0; i < result.uncertainty_curve.fractions.size(); ++i)
        f << result.uncertainty_curve.fractions[i] << ","
          << result.uncertainty_curve.mae[i] << "," << result.oracle_curve.mae[i]
          << "\n";
}

void write_curve_svg(const AuseResult& result, const std::string& path) {
    const int w = 480, h = 360;
    const int ml = 50, mr = 15, mt = 15, mb = 40;  // margins
    const double px = w - ml - mr, py = h - mt - mb;

    double ymax = 1.0;
    for (double v : result.uncertainty_curve.mae) ymax = std::max(ymax, v);
    for (double v : result.oracle_curve.mae) ymax = std::max(ymax, v);

    auto polyline = [&](const SparsificationCurve& c, const char* color) {
        std::string pts;
        for (size_t i = 0; i < c.fractions.size(); ++i) {
            const double x = ml + px * c.fractions[i];
            const double y = mt + py * (1.0 - c.mae[i] / ymax);
            pts += std::to_string(x) + "," + std::to_string(y) + " ";
        }
        return "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"1.5\" points=\"" + pts + "\"/>\n";
    };

    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("write_curve_svg: cannot open " + path);
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w
      << "\" height=\"" << h << "\">\n"
      << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      << "<line x1=\"" << ml << "\" y1=\"" << mt + py << "\" x2=\"" << ml + px
      << "\" y2=\"" << mt + py << "\" stroke=\"black\"/>\n"
      << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\""
      << mt + py << "\" stroke=\"black\"/>\n"
      << polyline(result.uncertainty_curve, "#d62728")
      << polyline(result.oracle_curve, "#1f77b4")
      << "<text x=\"" << ml + px / 2 << "\" y=\"" << h - 10
      << "\" text-anchor=\"middle\" font-size=\"13\">removed fraction</text>\n"
      << "<text x=\"14\" y=\"" << mt + py / 2
      << "\" font-size=\"13\" transform=\"rotate(-90 14 " << mt + py / 2
      << ")\" text-anchor=\"middle\">normalized MAE</text>\n"
      << "<text x=\"" << ml + 10 << "\" y=\"" << mt + 16
      << "\" font-size=\"12\" fill=\"#d62728\">uncertainty</text>\n"
      << "<text x=\"" << ml + 10 << "\" y=\"" << mt + 32
      << "\" font-size=\"12\" fill=\"#1f77b4\">oracle</text>\n"
      << "</svg>\n";
}

}  // namespace splat
