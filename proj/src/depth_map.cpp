#include "fpp/depth_map.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace fpp {

namespace {

void check_dims(const DepthMap& d, const char* op) {
    if (d.width <= 0 || d.height <= 0 || d.values.size() != size_t(d.width) * d.height)
        throw std::invalid_argument(std::string(op) + ": malformed depth map");
}

}  // namespace

DepthMap normalize_global(const DepthMap& d) {
    check_dims(d, "normalize_global");
    if (d.norm != DepthNorm::RawMillimeters)
        throw std::logic_error("normalize_global: input must be raw millimeters");
    DepthMap out = d;
    out.norm = DepthNorm::GlobalMeters;
    for (double& v : out.values) v /= 1000.0;
    return out;
}

DepthMap normalize_individual(const DepthMap& d) {
    check_dims(d, "normalize_individual");
    if (d.norm != DepthNorm::RawMillimeters)
        throw std::logic_error("normalize_individual: input must be raw millimeters");
    double dmin = 1e300, dmax = -1e300;
    for (double v : d.values)
        if (v > 0.0) {
            dmin = std::fmin(dmin, v);
            dmax = std::fmax(dmax, v);
        }
    if (dmax < dmin)
        throw std::invalid_argument("normalize_individual: all-background map");
    DepthMap out = d;
    out.norm = DepthNorm::IndividualUnit;
    out.dmin_mm = dmin;
    out.dmax_mm = dmax;
    double range = dmax - dmin;
    for (double& v : out.values) {
        if (v <= 0.0) continue;  // background stays exact 0
        v = range < 1e-6 ? 1.0 : (v - dmin) / range;
    }
    return out;
}

DepthMap denormalize(const DepthMap& d) {
    check_dims(d, "denormalize");
    DepthMap out = d;
    out.norm = DepthNorm::RawMillimeters;
    switch (d.norm) {
        case DepthNorm::RawMillimeters:
            return out;
        case DepthNorm::GlobalMeters:
            for (double& v : out.values) v *= 1000.0;
            return out;
        case DepthNorm::IndividualUnit: {
            if (!(d.dmax_mm >= d.dmin_mm) || d.dmax_mm <= 0.0)
                throw std::logic_error("denormalize: missing individual-normalization parameters");
            double range = d.dmax_mm - d.dmin_mm;
            for (double& v : out.values)
                if (v != 0.0) v = v * range + d.dmin_mm;
            out.dmin_mm = 0.0;
            out.dmax_mm = 0.0;
            return out;
        }
        case DepthNorm::PhaseRadians:
            throw std::logic_error("denormalize: phase dumps are not depth maps");
    }
    throw std::logic_error("denormalize: unknown normalization");
}

std::vector<uint16_t> to_viz_u16(const DepthMap& d) {
    check_dims(d, "to_viz_u16");
    auto [lo, hi] = std::minmax_element(d.values.begin(), d.values.end());
    std::vector<uint16_t> out(d.values.size(), 0);
    double range = *hi - *lo;
    if (range <= 0.0) return out;  // constant maps render all-zero
    for (size_t i = 0; i < out.size(); ++i) {
        double scaled = (d.values[i] - *lo) / range * 65535.0;
        out[i] = uint16_t(std::floor(scaled + 0.5));  // round half up
    }
    return out;
}

namespace {

constexpr unsigned char kMagic[4] = {0x46, 0x50, 0x50, 0x44};  // "FPPD"
constexpr uint8_t kVersion = 0x01;
constexpr uint64_t kMaxPixels = 1ull << 34;

template <typename T>
void put_le(std::string& buf, T v) {
    for (size_t i = 0; i < sizeof(T); ++i) buf.push_back(char((v >> (8 * i)) & 0xff));
}

void put_f64(std::string& buf, double v) {
    uint64_t bits;
    std::memcpy(&bits, &v, 8);
    put_le(buf, bits);
}

void put_f32(std::string& buf, float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, 4);
    put_le(buf, bits);
}

struct Reader {
    const unsigned char* p;
    size_t left;
    std::string path;

    void need(size_t n, const char* field) {
        if (left < n)
            throw std::runtime_error("read_depth: " + path + ": truncated at field '" + field +
                                     "'");
    }
    uint32_t u32(const char* field) {
        need(4, field);
        uint32_t v = uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 |
                     uint32_t(p[3]) << 24;
        p += 4;
        left -= 4;
        return v;
    }
    uint8_t u8(const char* field) {
        need(1, field);
        uint8_t v = *p++;
        --left;
        return v;
    }
    double f64(const char* field) {
        need(8, field);
        uint64_t bits = 0;
        for (int i = 7; i >= 0; --i) bits = bits << 8 | p[i];
        p += 8;
        left -= 8;
        double v;
        std::memcpy(&v, &bits, 8);
        return v;
    }
    float f32(const char* field) {
        need(4, field);
        uint32_t bits = uint32_t(p[0]) | uint32_t(p[1]) << 8 | uint32_t(p[2]) << 16 |
                        uint32_t(p[3]) << 24;
        p += 4;
        left -= 4;
        float v;
        std::memcpy(&v, &bits, 4);
        return v;
    }
};

}  // namespace

void write_depth(const DepthMap& d, const std::filesystem::path& path) {
    check_dims(d, "write_depth");
    std::string buf;
    buf.reserve(26 + d.values.size() * 4);
    buf.append(reinterpret_cast<const char*>(kMagic), 4);
    buf.push_back(char(kVersion));
    put_le(buf, uint32_t(d.width));
    put_le(buf, uint32_t(d.height));
    buf.push_back(char(uint8_t(d.norm)));
    bool individual = d.norm == DepthNorm::IndividualUnit;
    put_f64(buf, individual ? d.dmin_mm : 0.0);
    put_f64(buf, individual ? d.dmax_mm : 0.0);
    for (double v : d.values) put_f32(buf, float(v));
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_depth: cannot open " + path.string());
    out.write(buf.data(), std::streamsize(buf.size()));
    if (!out) throw std::runtime_error("write_depth: short write to " + path.string());
}

DepthMap read_depth(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_depth: cannot open " + path.string());
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Reader r{reinterpret_cast<const unsigned char*>(data.data()), data.size(), path.string()};

    r.need(4, "magic");
    if (std::memcmp(r.p, kMagic, 4) != 0)
        throw std::runtime_error("read_depth: " + path.string() + ": bad magic");
    r.p += 4;
    r.left -= 4;
    if (r.u8("version") != kVersion)
        throw std::runtime_error("read_depth: " + path.string() + ": unsupported version");

    DepthMap d;
    uint32_t w = r.u32("width");
    uint32_t hgt = r.u32("height");
    if (w == 0 || hgt == 0 || uint64_t(w) * hgt > kMaxPixels)
        throw std::runtime_error("read_depth: " + path.string() + ": dimension overflow");
    uint8_t tag = r.u8("normalization");
    if (tag > 3)
        throw std::runtime_error("read_depth: " + path.string() + ": unknown normalization tag");
    d.width = int(w);
    d.height = int(hgt);
    d.norm = DepthNorm(tag);
    d.dmin_mm = r.f64("dmin_mm");
    d.dmax_mm = r.f64("dmax_mm");
    d.values.resize(size_t(w) * hgt);
    for (double& v : d.values) v = double(r.f32("values"));
    return d;
}

}  // namespace fpp
