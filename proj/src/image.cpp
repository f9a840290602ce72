#include "fpp/image.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>

namespace fpp {

namespace {

void write_pgm_header(std::ofstream& out, int width, int height) {
    out << "P5\n" << width << " " << height << "\n65535\n";
}

// Reads the next header token, skipping whitespace and '#' comments.
int next_pnm_int(std::istream& in, const std::string& path) {
    int ch = in.get();
    while (ch != EOF) {
        if (ch == '#') {
            while (ch != EOF && ch != '\n') ch = in.get();
        } else if (!std::isspace(ch)) {
            break;
        }
        ch = in.get();
    }
    if (ch == EOF) throw std::runtime_error("read_pgm16: truncated header in " + path);
    std::string tok;
    while (ch != EOF && !std::isspace(ch)) {
        tok.push_back(char(ch));
        ch = in.get();
    }
    try {
        return std::stoi(tok);
    } catch (const std::exception&) {
        throw std::runtime_error("read_pgm16: bad header token '" + tok + "' in " + path);
    }
}

}  // namespace

void write_pgm16(const ImageF& img, const std::filesystem::path& path) {
    std::vector<uint16_t> samples(img.size());
    for (size_t i = 0; i < img.size(); ++i) {
        double v = std::clamp(img.pix[i], 0.0, 1.0);
        samples[i] = uint16_t(std::lround(v * 65535.0));
    }
    write_pgm16_raw(samples, img.width, img.height, path);
}

void write_pgm16_raw(const std::vector<uint16_t>& samples, int width, int height,
                     const std::filesystem::path& path) {
    if (width <= 0 || height <= 0 || samples.size() != size_t(width) * height)
        throw std::invalid_argument("write_pgm16: dimension mismatch");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("write_pgm16: cannot open " + path.string());
    write_pgm_header(out, width, height);
    std::vector<unsigned char> bytes(samples.size() * 2);
    for (size_t i = 0; i < samples.size(); ++i) {
        bytes[2 * i] = (unsigned char)(samples[i] >> 8);  // big-endian per Netpbm
        bytes[2 * i + 1] = (unsigned char)(samples[i] & 0xff);
    }
    out.write(reinterpret_cast<const char*>(bytes.data()), std::streamsize(bytes.size()));
    if (!out) throw std::runtime_error("write_pgm16: short write to " + path.string());
}

ImageF read_pgm16(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("read_pgm16: cannot open " + path.string());
    char magic[2] = {0, 0};
    in.read(magic, 2);
    if (magic[0] != 'P' || magic[1] != '5')
        throw std::runtime_error("read_pgm16: not a binary PGM: " + path.string());
    int width = next_pnm_int(in, path.string());
    int height = next_pnm_int(in, path.string());
    int maxval = next_pnm_int(in, path.string());
    if (width <= 0 || height <= 0 || width > 1 << 20 || height > 1 << 20)
        throw std::runtime_error("read_pgm16: bad dimensions in " + path.string());
    if (maxval <= 0 || maxval > 65535)
        throw std::runtime_error("read_pgm16: unsupported maxval in " + path.string());
    // Exactly one whitespace byte after maxval, then samples.
    ImageF img(width, height);
    size_t n = img.size();
    int bytes_per = maxval < 256 ? 1 : 2;
    std::vector<unsigned char> buf(n * bytes_per);
    in.read(reinterpret_cast<char*>(buf.data()), std::streamsize(buf.size()));
    if (size_t(in.gcount()) != buf.size())
        throw std::runtime_error("read_pgm16: truncated samples in " + path.string());
    for (size_t i = 0; i < n; ++i) {
        unsigned v = bytes_per == 1 ? buf[i] : (unsigned(buf[2 * i]) << 8) | buf[2 * i + 1];
        img.pix[i] = double(v) / maxval;
    }
    return img;
}

}  // namespace fpp
