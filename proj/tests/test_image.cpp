#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "fpp/image.hpp"

using namespace fpp;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
    auto d = fs::temp_directory_path() / "fpp_image_tests";
    fs::create_directories(d);
    return d;
}

}  // namespace

TEST_SUITE_BEGIN("image");

TEST_CASE("pgm16 round trip is exact on 16-bit lattice values") {
    ImageF img(7, 5);
    for (size_t i = 0; i < img.size(); ++i) img.pix[i] = double((i * 9973) % 65536) / 65535.0;
    auto path = temp_dir() / "roundtrip.pgm";
    write_pgm16(img, path);
    ImageF back = read_pgm16(path);
    REQUIRE(back.width == img.width);
    REQUIRE(back.height == img.height);
    for (size_t i = 0; i < img.size(); ++i) CHECK(back.pix[i] == img.pix[i]);
}

TEST_CASE("pgm16 bytes are big-endian with the standard header") {
    ImageF img(2, 1);
    img.pix[0] = 258.0 / 65535.0;
    img.pix[1] = 1.0;
    auto path = temp_dir() / "bytes.pgm";
    write_pgm16(img, path);
    std::ifstream in(path, std::ios::binary);
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    std::string expect = "P5\n2 1\n65535\n";
    expect += '\x01';
    expect += '\x02';
    expect += '\xff';
    expect += '\xff';
    CHECK(data == expect);
}

TEST_CASE("pgm reader accepts comments and 8-bit maxval") {
    auto path = temp_dir() / "comment.pgm";
    {
        std::ofstream out(path, std::ios::binary);
        out << "P5\n# a comment\n2 2\n255\n";
        char px[4] = {0, 127, (char)255, 64};
        out.write(px, 4);
    }
    ImageF img = read_pgm16(path);
    CHECK(img.width == 2);
    CHECK(img.pix[0] == 0.0);
    CHECK(img.pix[2] == 1.0);
}

TEST_CASE("pgm reader rejects damage") {
    auto dir = temp_dir();
    {
        std::ofstream out(dir / "magic.pgm", std::ios::binary);
        out << "P6\n2 2\n255\n1234";
    }
    CHECK_THROWS(read_pgm16(dir / "magic.pgm"));
    {
        std::ofstream out(dir / "short.pgm", std::ios::binary);
        out << "P5\n4 4\n65535\nxx";
    }
    CHECK_THROWS(read_pgm16(dir / "short.pgm"));
    CHECK_THROWS(read_pgm16(dir / "missing.pgm"));
}

TEST_SUITE_END();
