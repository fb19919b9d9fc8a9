#include "splat/scene.hpp"

#include <json.hpp>

#include <Eigen/Cholesky>

#include <cmath>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace splat {

namespace {

constexpr int kColorRest = 15;  // per-channel coefficients beyond dc

std::string ply_header(int count, int uncert_degree) {
    std::ostringstream h;
    h << "ply\n"
      << "format binary_little_endian 1.0\n"
      << "comment uncert_sh_degree " << uncert_degree << "\n"
      << "element vertex " << count << "\n";
    auto prop = [&h](const std::string& name) { h << "property float " << name << "\n"; };
    prop("x"); prop("y"); prop("z");
    prop("nx"); prop("ny"); prop("nz");
    for (int i = 0; i < 3; ++i) prop("f_dc_" + std::to_string(i));
    for (int i = 0; i < 3 * kColorRest; ++i) prop("f_rest_" + std::to_string(i));
    prop("opacity");
    for (int i = 0; i < 3; ++i) prop("scale_" + std::to_string(i));
    for (int i = 0; i < 4; ++i) prop("rot_" + std::to_string(i));
    for (int i = 0; i < sh_coeff_count(uncert_degree); ++i)
        prop("u_" + std::to_string(i));
    h << "end_header\n";
    return h.str();
}

std::vector<std::string> expected_properties(int uncert_degree, bool with_uncert) {
    std::vector<std::string> p = {"x", "y", "z", "nx", "ny", "nz"};
    for (int i = 0; i < 3; ++i) p.push_back("f_dc_" + std::to_string(i));
    for (int i = 0; i < 3 * kColorRest; ++i) p.push_back("f_rest_" + std::to_string(i));
    p.push_back("opacity");
    for (int i = 0; i < 3; ++i) p.push_back("scale_" + std::to_string(i));
    for (int i = 0; i < 4; ++i) p.push_back("rot_" + std::to_string(i));
    if (with_uncert)
        for (int i = 0; i < sh_coeff_count(uncert_degree); ++i)
            p.push_back("u_" + std::to_string(i));
    return p;
}

[[noreturn]] void parse_fail(const std::string& path, const std::string& what) {
    throw std::runtime_error("load_scene(" + path + "): " + what);
}

}  // namespace

Gaussian::Gaussian() {
    for (auto& c : color_sh) c = ShCoeffs::zeros(kMaxShDegree);
    uncert_sh = ShCoeffs::zeros(2);
}

Eigen::Matrix3d Gaussian::covariance() const {
    const Eigen::Matrix3d m =
        rotation.toRotationMatrix() * scale.asDiagonal();
    return m * m.transpose();
}

double Gaussian::uncertainty_value(const Eigen::Vector3d& direction) const {
    return sigmoid(eval_sh_field(uncert_sh, direction));
}

void Camera::validate() const {
    if (width <= 0 || height <= 0)
        throw std::runtime_error("camera: non-positive image size");
    if (!(fx > 0) || !(fy > 0))
        throw std::runtime_error("camera: focal lengths must be positive");
    if (!(cx > 0 && cx < width) || !(cy > 0 && cy < height))
        throw std::runtime_error("camera: principal point outside image");
    const Eigen::Matrix3d err =
        rotation * rotation.transpose() - Eigen::Matrix3d::Identity();
    if (err.cwiseAbs().maxCoeff() > 1e-6)
        throw std::runtime_error("camera: rotation is not orthonormal");
    if (!translation.allFinite() || !rotation.allFinite())
        throw std::runtime_error("camera: non-finite pose");
}

void Scene::validate() const {
    for (size_t i = 0; i < gaussians.size(); ++i) {
        const Gaussian& g = gaussians[i];
        const std::string at = "gaussian " + std::to_string(i) + ": ";
        if (!g.position.allFinite())
            throw std::runtime_error(at + "non-finite position");
        if (std::abs(g.rotation.norm() - 1.0) > 1e-6)
            throw std::runtime_error(at + "quaternion not unit");
        if (!(g.scale.minCoeff() > 0))
            throw std::runtime_error(at + "non-positive scale");
        if (!(g.opacity > 0 && g.opacity < 1))
            throw std::runtime_error(at + "opacity outside (0,1)");
        for (const auto& c : g.color_sh)
            if (!c.valid() || c.degree != kMaxShDegree)
                throw std::runtime_error(at + "invalid color sh");
        if (!g.uncert_sh.valid() || g.uncert_sh.degree != uncert_degree)
            throw std::runtime_error(at + "invalid uncertainty sh");
        Eigen::LLT<Eigen::Matrix3d> llt(g.covariance());
        if (llt.info() != Eigen::Success)
            throw std::runtime_error(at + "covariance not positive definite");
    }
    if (!(background_color.minCoeff() >= 0 && background_color.maxCoeff() <= 1))
        throw std::runtime_error("background color outside [0,1]");
}

void save_scene(const Scene& scene, const std::string& path) {
    if (scene.gaussians.empty())
        throw std::runtime_error("save_scene(" + path + "): empty scene");
    scene.validate();

    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("save_scene: cannot open " + path);
    f << ply_header(static_cast<int>(scene.gaussians.size()), scene.uncert_degree);

    std::vector<float> rec;
    for (const Gaussian& g : scene.gaussians) {
        rec.clear();
        for (int i = 0; i < 3; ++i) rec.push_back(static_cast<float>(g.position[i]));
        for (int i = 0; i < 3; ++i) rec.push_back(0.0f);  // normals, reserved
        for (int ch = 0; ch < 3; ++ch)
            rec.push_back(static_cast<float>(g.color_sh[ch].values[0]));
        for (int ch = 0; ch < 3; ++ch)
            for (int j = 0; j < kColorRest; ++j)
                rec.push_back(static_cast<float>(g.color_sh[ch].values[j + 1]));
        rec.push_back(static_cast<float>(logit(g.opacity)));
        for (int i = 0; i < 3; ++i)
            rec.push_back(static_cast<float>(std::log(g.scale[i])));
        rec.push_back(static_cast<float>(g.rotation.w()));
        rec.push_back(static_cast<float>(g.rotation.x()));
        rec.push_back(static_cast<float>(g.rotation.y()));
        rec.push_back(static_cast<float>(g.rotation.z()));
        for (double u : g.uncert_sh.values) rec.push_back(static_cast<float>(u));
        f.write(reinterpret_cast<const char*>(rec.data()),
                static_cast<std::streamsize>(rec.size() * sizeof(float)));
    }
    if (!f) throw std::runtime_error("save_scene: write failed for " + path);
}

Scene load_scene(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) parse_fail(path, "cannot open file");

    std::string line;
    if (!std::getline(f, line) || line != "ply") parse_fail(path, "not a PLY file");
    if (!std::getline(f, line) || line != "format binary_little_endian 1.0")
        parse_fail(path, "expected binary little-endian format");

    int count = -1;
    int uncert_degree = 2;
    std::vector<std::string> props;
    while (std::getline(f, line)) {
        if (line == "end_header") break;
        std::istringstream ls(line);
        std::string tok;
        ls >> tok;
        if (tok == "comment") {
            std::string key;
            ls >> key;
            if (key == "uncert_sh_degree") ls >> uncert_degree;
        } else if (tok == "element") {
            std::string name;
            ls >> name >> count;
            if (name != "vertex") parse_fail(path, "unexpected element '" + name + "'");
        } else if (tok == "property") {
            std::string type, name;
            ls >> type >> name;
            if (type != "float") parse_fail(path, "property '" + name + "' is not float");
            props.push_back(name);
        } else if (!tok.empty()) {
            parse_fail(path, "unexpected header line '" + line + "'");
        }
    }
    if (count < 0) parse_fail(path, "missing vertex element");
    if (uncert_degree < 0 || uncert_degree > kMaxShDegree)
        parse_fail(path, "uncert_sh_degree out of range");

    bool with_uncert = false;
    if (props == expected_properties(uncert_degree, true)) {
        with_uncert = true;
    } else if (props != expected_properties(uncert_degree, false)) {
        parse_fail(path, "unexpected property set");
    }
    const int stride = static_cast<int>(props.size());
    const int ucount = sh_coeff_count(uncert_degree);

    Scene scene;
    scene.uncert_degree = uncert_degree;
    scene.gaussians.resize(count);
    std::vector<float> rec(stride);
    for (int i = 0; i < count; ++i) {
        f.read(reinterpret_cast<char*>(rec.data()),
               static_cast<std::streamsize>(stride * sizeof(float)));
        if (!f) parse_fail(path, "truncated at element " + std::to_string(i));
        for (float v : rec)
            if (!std::isfinite(v))
                parse_fail(path, "non-finite value at element " + std::to_string(i));

        Gaussian& g = scene.gaussians[i];
        int k = 0;
        for (int j = 0; j < 3; ++j) g.position[j] = rec[k++];
        k += 3;  // normals
        for (int ch = 0; ch < 3; ++ch) g.color_sh[ch].values[0] = rec[k++];
        for (int ch = 0; ch < 3; ++ch)
            for (int j = 0; j < kColorRest; ++j)
                g.color_sh[ch].values[j + 1] = rec[k++];
        g.opacity = sigmoid(rec[k++]);
        for (int j = 0; j < 3; ++j) g.scale[j] = std::exp(static_cast<double>(rec[k++]));
        const double qw = rec[k++], qx = rec[k++], qy = rec[k++], qz = rec[k++];
        Eigen::Quaterniond q(qw, qx, qy, qz);
        if (q.norm() < 1e-6)
            parse_fail(path, "degenerate quaternion at element " + std::to_string(i));
        // keep float-rounded unit quaternions bit-exact for round trips
        g.rotation = std::abs(q.norm() - 1.0) > 1e-6 ? q.normalized() : q;
        g.uncert_sh = ShCoeffs::zeros(uncert_degree);
        if (with_uncert)
            for (int j = 0; j < ucount; ++j) g.uncert_sh.values[j] = rec[k++];
    }
    scene.validate();
    return scene;
}

void save_cameras(const std::vector<Camera>& cameras, const std::string& path) {
    nlohmann::json j;
    j["cameras"] = nlohmann::json::array();
    for (const Camera& c : cameras) {
        nlohmann::json jc;
        jc["width"] = c.width;
        jc["height"] = c.height;
        jc["fx"] = c.fx;
        jc["fy"] = c.fy;
        jc["cx"] = c.cx;
        jc["cy"] = c.cy;
        std::vector<double> m(16, 0.0);
        for (int r = 0; r < 3; ++r) {
            for (int k = 0; k < 3; ++k) m[4 * r + k] = c.rotation(r, k);
            m[4 * r + 3] = c.translation[r];
        }
        m[15] = 1.0;
        jc["world_to_camera"] = m;
        j["cameras"].push_back(jc);
    }
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw std::runtime_error("save_cameras: cannot open " + path);
    f << j.dump(2) << "\n";
}

std::vector<Camera> load_cameras(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("load_cameras(" + path + "): cannot open file");
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::runtime_error("load_cameras(" + path + "): " + e.what());
    }
    if (!j.contains("cameras") || !j["cameras"].is_array())
        throw std::runtime_error("load_cameras(" + path + "): /cameras missing or not an array");
    if (j["cameras"].empty())
        throw std::runtime_error("load_cameras(" + path + "): /cameras is empty");

    std::vector<Camera> cameras;
    for (size_t i = 0; i < j["cameras"].size(); ++i) {
        const std::string ptr = "/cameras/" + std::to_string(i);
        const auto& jc = j["cameras"][i];
        Camera c;
        try {
            c.width = jc.at("width").get<int>();
            c.height = jc.at("height").get<int>();
            c.fx = jc.at("fx").get<double>();
            c.fy = jc.at("fy").get<double>();
            c.cx = jc.at("cx").get<double>();
            c.cy = jc.at("cy").get<double>();
            const auto m = jc.at("world_to_camera").get<std::vector<double>>();
            if (m.size() != 16)
                throw std::runtime_error("world_to_camera must have 16 entries");
            for (int r = 0; r < 3; ++r) {
                for (int k = 0; k < 3; ++k) c.rotation(r, k) = m[4 * r + k];
                c.translation[r] = m[4 * r + 3];
            }
            if (std::abs(m[12]) > 1e-9 || std::abs(m[13]) > 1e-9 ||
                std::abs(m[14]) > 1e-9 || std::abs(m[15] - 1.0) > 1e-9)
                throw std::runtime_error("last row must be [0 0 0 1]");
            c.validate();
        } catch (const std::exception& e) {
            throw std::runtime_error("load_cameras(" + path + ") at " + ptr + ": " + e.what());
        }
        cameras.push_back(c);
    }
    return cameras;
}

}  // namespace splat
