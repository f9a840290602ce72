#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace fpp {

/// Dense grayscale image with unit-interval double samples, row-major.
struct ImageF {
    int width = 0;
    int height = 0;
    std::vector<double> pix;

    ImageF() = default;
    ImageF(int w, int h, double fill = 0.0) : width(w), height(h), pix(size_t(w) * h, fill) {}

    double& at(int x, int y) { return pix[size_t(y) * width + x]; }
    double at(int x, int y) const { return pix[size_t(y) * width + x]; }
    size_t size() const { return pix.size(); }
};

/// Binary PGM (P5), maxval 65535, big-endian samples. Values are clamped to
/// [0,1] and scaled by 65535 with round-to-nearest.
void write_pgm16(const ImageF& img, const std::filesystem::path& path);

/// Raw 16-bit variant used for visualization exports.
void write_pgm16_raw(const std::vector<uint16_t>& samples, int width, int height,
                     const std::filesystem::path& path);

/// Reads P5 with maxval up to 65535 (1- or 2-byte samples) into [0,1].
ImageF read_pgm16(const std::filesystem::path& path);

}  // namespace fpp
