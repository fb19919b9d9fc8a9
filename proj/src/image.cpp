#include "splat/image.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <stdexcept>

namespace splat {

namespace {

uint8_t to_byte(double v) {
    return static_cast<uint8_t>(std::lround(255.0 * std::clamp(v, 0.0, 1.0)));
}

void read_pnm_header(std::ifstream& f, const std::string& path,
                     const std::string& magic, int& w, int& h) {
    std::string m;
    f >> m;
    if (m != magic)
        throw std::runtime_error(path + ": expected " + magic + " header");
    int maxval = 0;
    f >> w >> h >> maxval;
    if (!f || w <= 0 || h <= 0 || maxval != 255)
        throw std::runtime_error(path + ": bad PNM header");
    f.get();  // single whitespace before raster
}

}  // namespace

void write_ppm(const ColorImage& img, const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("write_ppm: cannot open " + path);
    f << "P6\n" << img.width << " " << img.height << "\n255\n";
    std::vector<uint8_t> row(static_cast<size_t>(img.width) * 3);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            const Eigen::Vector3d& c = img.at(x, y);
            row[3 * x + 0] = to_byte(c[0]);
            row[3 * x + 1] = to_byte(c[1]);
            row[3 * x + 2] = to_byte(c[2]);
        }
        f.write(reinterpret_cast<const char*>(row.data()),
                static_cast<std::streamsize>(row.size()));
    }
    if (!f) throw std::runtime_error("write_ppm: write failed for " + path);
}

void write_pgm(const ScalarImage& img, const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw std::runtime_error("write_pgm: cannot open " + path);
    f << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<uint8_t> row(img.width);
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) row[x] = to_byte(img.at(x, y));
        f.write(reinterpret_cast<const char*>(row.data()),
                static_cast<std::streamsize>(row.size()));
    }
    if (!f) throw std::runtime_error("write_pgm: write failed for " + path);
}

ColorImage read_ppm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_ppm: cannot open " + path);
    int w, h;
    read_pnm_header(f, path, "P6", w, h);
    ColorImage img(w, h);
    std::vector<uint8_t> row(static_cast<size_t>(w) * 3);
    for (int y = 0; y < h; ++y) {
        f.read(reinterpret_cast<char*>(row.data()),
               static_cast<std::streamsize>(row.size()));
        if (!f) throw std::runtime_error(path + ": truncated raster");
        for (int x = 0; x < w; ++x)
            img.at(x, y) = Eigen::Vector3d(row[3 * x], row[3 * x + 1], row[3 * x + 2]) / 255.0;
    }
    return img;
}

ScalarImage read_pgm(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("read_pgm: cannot open " + path);
    int w, h;
    read_pnm_header(f, path, "P5", w, h);
    ScalarImage img(w, h);
    std::vector<uint8_t> row(w);
    for (int y = 0; y < h; ++y) {
        f.read(reinterpret_cast<char*>(row.data()),
               static_cast<std::streamsize>(row.size()));
        if (!f) throw std::runtime_error(path + ": truncated raster");
        for (int x = 0; x < w; ++x) img.at(x, y) = row[x] / 255.0;
    }
    return img;
}

}  // namespace splat
