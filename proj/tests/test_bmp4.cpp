#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <fstream>
#include <random>
#include <string>
#include <vector>

#include "rstego/bmp4.hpp"

using namespace rstego;
using namespace rstego::bmp4;

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    return std::vector<std::uint8_t>(std::istreambuf_iterator<char>(in),
                                     std::istreambuf_iterator<char>());
}

std::string fixture(const std::string& name) {
    return std::string(TEST_DATA_DIR) + "/" + name;
}

void put16(std::vector<std::uint8_t>& v, std::uint16_t x) {
    v.push_back(x & 0xFF);
    v.push_back(x >> 8);
}

void put32(std::vector<std::uint8_t>& v, std::uint32_t x) {
    for (int s = 0; s < 32; s += 8)
        v.push_back((x >> s) & 0xFF);
}

// Assembles a minimal 4-bpp file from raw parts; rows are given in
// storage order so tests control the on-disk layout directly.
std::vector<std::uint8_t> assemble_bmp(
    std::int32_t width, std::int32_t height,
    const std::vector<std::vector<std::uint8_t>>& stored_rows,
    std::uint32_t colors_used = 0) {
    const std::uint32_t n_pal = colors_used == 0 ? 16 : colors_used;
    const std::uint32_t offset = 14 + 40 + n_pal * 4;

    std::vector<std::uint8_t> out;
    out.push_back('B');
    out.push_back('M');
    std::uint32_t body = 0;
    for (const auto& r : stored_rows)
        body += std::uint32_t(r.size());
    put32(out, offset + body);
    put32(out, 0);
    put32(out, offset);
    put32(out, 40);
    put32(out, std::uint32_t(width));
    put32(out, std::uint32_t(height));
    put16(out, 1);
    put16(out, 4);
    put32(out, 0);
    put32(out, body);
    put32(out, 0);
    put32(out, 0);
    put32(out, colors_used);
    put32(out, 0);
    for (std::uint32_t i = 0; i < n_pal; ++i) {
        out.push_back(std::uint8_t(i));  // b
        out.push_back(std::uint8_t(i * 2));  // g
        out.push_back(std::uint8_t(i * 3));  // r
        out.push_back(0);
    }
    for (const auto& r : stored_rows)
        out.insert(out.end(), r.begin(), r.end());
    return out;
}

Bmp4Image random_image(std::mt19937& rng) {
    std::uniform_int_distribution<std::uint32_t> dim(1, 32);
    std::uniform_int_distribution<int> nibble(0, 15);
    std::uniform_int_distribution<int> byte(0, 255);

    Bmp4Image img;
    img.width = dim(rng);
    img.height = dim(rng);
    for (auto& c : img.palette)
        c = Rgb{std::uint8_t(byte(rng)), std::uint8_t(byte(rng)),
                std::uint8_t(byte(rng))};
    img.pixels.resize(std::size_t(img.width) * img.height);
    for (auto& p : img.pixels)
        p = std::uint8_t(nibble(rng));
    return img;
}

}  // namespace

TEST_CASE("bottom-up rows are normalized to top-down order", "[bmp4]") {
    // Stored first row is the bottom of the image (logical y=1).
    const auto bytes = assemble_bmp(2, 2,
                                    {{0x34, 0, 0, 0},    // logical row 1
                                     {0x12, 0, 0, 0}});  // logical row 0
    const Bmp4Image img = parse_bmp(bytes);
    REQUIRE(img.width == 2);
    REQUIRE(img.height == 2);
    CHECK(img.pixels == std::vector<std::uint8_t>{1, 2, 3, 4});
    CHECK(img.at(0, 0) == 1);  // top-left
    CHECK(img.at(1, 1) == 4);
}

TEST_CASE("top-down files (negative height) parse to the same logical order",
          "[bmp4]") {
    const auto bytes = assemble_bmp(2, -2,
                                    {{0x12, 0, 0, 0},    // logical row 0
                                     {0x34, 0, 0, 0}});  // logical row 1
    const Bmp4Image img = parse_bmp(bytes);
    CHECK(img.pixels == std::vector<std::uint8_t>{1, 2, 3, 4});
}

TEST_CASE("externally assembled fixtures parse correctly", "[bmp4]") {
    SECTION("bottom-up, odd width") {
        const Bmp4Image img = parse_bmp(read_file(fixture("five_by_three_4bpp.bmp")));
        REQUIRE(img.width == 5);
        REQUIRE(img.height == 3);
        CHECK(img.pixels == std::vector<std::uint8_t>{0, 1, 2, 3, 4, 5, 6, 7,
                                                      8, 9, 10, 11, 12, 13, 14});
        CHECK(img.palette[1] == Rgb{0, 0, 170});
        CHECK(img.palette[15] == Rgb{255, 255, 255});
    }
    SECTION("top-down variant carries identical pixels") {
        const Bmp4Image a = parse_bmp(read_file(fixture("five_by_three_4bpp.bmp")));
        const Bmp4Image b = parse_bmp(read_file(fixture("five_by_three_topdown.bmp")));
        CHECK(a.pixels == b.pixels);
    }
    SECTION("short palettes are padded with black") {
        const Bmp4Image img = parse_bmp(read_file(fixture("two_color_palette.bmp")));
        CHECK(img.palette[0] == Rgb{0, 0, 0});
        CHECK(img.palette[1] == Rgb{0, 0, 170});
        for (int i = 2; i < 16; ++i)
            CHECK(img.palette[i] == Rgb{0, 0, 0});
    }
}

TEST_CASE("non-BMP and unsupported inputs are rejected with typed errors",
          "[bmp4]") {
    SECTION("bad magic") {
        const std::vector<std::uint8_t> bytes = {'P', 'N', 0, 0, 0, 0};
        CHECK_THROWS_AS(parse_bmp(bytes), NotBmp);
    }
    SECTION("empty input") {
        CHECK_THROWS_AS(parse_bmp(std::vector<std::uint8_t>{}), NotBmp);
    }
    SECTION("8-bpp file") {
        CHECK_THROWS_AS(parse_bmp(read_file(fixture("eight_bpp.bmp"))),
                        UnsupportedDepth);
    }
    SECTION("compressed file") {
        auto bytes = assemble_bmp(2, 2, {{0x34, 0, 0, 0}, {0x12, 0, 0, 0}});
        bytes[30] = 2;  // BI_RLE4
        CHECK_THROWS_AS(parse_bmp(bytes), UnsupportedCompression);
    }
    SECTION("zero width") {
        const auto bytes = assemble_bmp(0, 2, {{0, 0, 0, 0}, {0, 0, 0, 0}});
        CHECK_THROWS_AS(parse_bmp(bytes), BadDimensions);
    }
    SECTION("width beyond 16 bits") {
        const auto bytes = assemble_bmp(70000, 1, {{0, 0, 0, 0}});
        CHECK_THROWS_AS(parse_bmp(bytes), BadDimensions);
    }
    SECTION("truncated pixel data") {
        auto bytes = assemble_bmp(2, 2, {{0x34, 0, 0, 0}, {0x12, 0, 0, 0}});
        bytes.resize(bytes.size() - 5);
        CHECK_THROWS_AS(parse_bmp(bytes), Truncated);
    }
    SECTION("truncated palette") {
        auto bytes = assemble_bmp(2, 2, {{0x34, 0, 0, 0}, {0x12, 0, 0, 0}});
        bytes.resize(14 + 40 + 8);
        CHECK_THROWS_AS(parse_bmp(bytes), Truncated);
    }
    SECTION("palette claiming more than 16 colors") {
        auto bytes = assemble_bmp(2, 2, {{0x34, 0, 0, 0}, {0x12, 0, 0, 0}});
        bytes[46] = 17;
        CHECK_THROWS_AS(parse_bmp(bytes), UnsupportedDepth);
    }
}

TEST_CASE("writer emits the canonical layout", "[bmp4]") {
    Bmp4Image img;
    img.width = 1;
    img.height = 1;
    img.pixels = {0};

    const auto bytes = write_bmp(img);
    CHECK(bytes.size() == 122);  // 14 + 40 + 64 + one padded row
    CHECK(bytes[0] == 'B');
    CHECK(bytes[1] == 'M');

    SECTION("deterministic output") {
        CHECK(write_bmp(img) == bytes);
    }
    SECTION("writer validates invariants") {
        Bmp4Image bad = img;
        bad.width = 0;
        CHECK_THROWS_AS(write_bmp(bad), BadDimensions);

        bad = img;
        bad.pixels = {1, 2};
        CHECK_THROWS_AS(write_bmp(bad), BadDimensions);

        bad = img;
        bad.pixels = {16};
        CHECK_THROWS_AS(write_bmp(bad), BadDimensions);
    }
}

TEST_CASE("parse(write(img)) reproduces every field", "[bmp4]") {
    std::mt19937 rng(2024);
    for (int trial = 0; trial < 200; ++trial) {
        const Bmp4Image img = random_image(rng);
        const Bmp4Image back = parse_bmp(write_bmp(img));
        REQUIRE(back == img);
    }
}

TEST_CASE("mutated inputs fail with typed errors, never crash", "[bmp4]") {
    std::mt19937 rng(99);
    const auto base = assemble_bmp(3, 3, {{0x01, 0x20, 0, 0},
                                          {0x34, 0x50, 0, 0},
                                          {0x67, 0x80, 0, 0}});
    std::uniform_int_distribution<std::size_t> pos(0, base.size() - 1);
    std::uniform_int_distribution<int> byte(0, 255);

    for (int trial = 0; trial < 1000; ++trial) {
        auto mutated = base;
        const int kind = trial % 3;
        if (kind == 0) {
            mutated[pos(rng)] = std::uint8_t(byte(rng));
        } else if (kind == 1) {
            mutated.resize(pos(rng));
        } else {
            mutated[pos(rng)] = std::uint8_t(byte(rng));
            mutated[pos(rng)] = std::uint8_t(byte(rng));
            mutated.push_back(std::uint8_t(byte(rng)));
        }
        try {
            (void)parse_bmp(mutated);
        } catch (const Error&) {
            // typed rejection is the expected outcome
        }
    }
}
