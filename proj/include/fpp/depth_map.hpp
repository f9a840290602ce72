#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

namespace fpp {

/// Value space of a DepthMap. Background is exact 0 in every space.
/// PhaseRadians tags debug dumps of phase maps stored in the same container;
/// normalization operations reject it.
enum class DepthNorm : uint8_t {
    RawMillimeters = 0,
    GlobalMeters = 1,
    IndividualUnit = 2,
    PhaseRadians = 3,
};

struct DepthMap {
    int width = 0;
    int height = 0;
    std::vector<double> values;
    DepthNorm norm = DepthNorm::RawMillimeters;
    double dmin_mm = 0.0;  // IndividualUnit parameters; zero otherwise
    double dmax_mm = 0.0;

    DepthMap() = default;
    DepthMap(int w, int h, double fill = 0.0)
        : width(w), height(h), values(size_t(w) * h, fill) {}

    double& at(int x, int y) { return values[size_t(y) * width + x]; }
    double at(int x, int y) const { return values[size_t(y) * width + x]; }
};

/// Raw mm -> meters (divide by 1000); zeros stay zero.
DepthMap normalize_global(const DepthMap& d);

/// Raw mm -> per-map [0,1] over object pixels; stores (dmin, dmax).
/// Degenerate dmax-dmin < 1e-6 mm maps object pixels to 1.0.
DepthMap normalize_individual(const DepthMap& d);

/// Inverse of either normalization back to raw mm.
DepthMap denormalize(const DepthMap& d);

/// Min-max scaling of all values (zeros included) onto [0, 65535],
/// round half up; constant maps become all zeros.
std::vector<uint16_t> to_viz_u16(const DepthMap& d);

/// FPPD container: magic "FPPD", version 1, u32le width/height, u8 tag,
/// f64le dmin/dmax, f32le row-major values.
void write_depth(const DepthMap& d, const std::filesystem::path& path);
DepthMap read_depth(const std::filesystem::path& path);

}  // namespace fpp
