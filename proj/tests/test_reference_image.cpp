#include <catch2/catch_amalgamated.hpp>

#include <cstdint>
#include <random>
#include <vector>

#include "rstego/reference_image.hpp"

using namespace rstego;

namespace {

bmp4::Bmp4Image one_pixel(std::uint8_t index) {
    bmp4::Bmp4Image img;
    img.width = 1;
    img.height = 1;
    img.palette = cga_palette_by_return_code();
    img.pixels = {index};
    return img;
}

// 2x2 cover whose codes come out as [[00,01],[10,11]] in RawIndex mode:
// pixel indices are the four grey shades themselves.
bmp4::Bmp4Image quad_cover() {
    bmp4::Bmp4Image img;
    img.width = 2;
    img.height = 2;
    img.palette = cga_palette_by_return_code();
    img.pixels = {0, 7, 8, 15};
    return img;
}

}  // namespace

TEST_CASE("single pixels run the full conversion chain", "[reference_image]") {
    SECTION("index 1 in RawIndex mode: red, shade 0, code 00") {
        const auto ref = to_reference_image(one_pixel(1), PaletteMode::RawIndex);
        CHECK(ref.code_at(0, 0) == 0b00);
        CHECK(ref.shade_at(0, 0) == 0);
    }
    SECTION("index 0 is a fixed point of the whole chain") {
        const auto ref = to_reference_image(one_pixel(0), PaletteMode::RawIndex);
        CHECK(ref.code_at(0, 0) == 0b00);
    }
    SECTION("index 12 in RawIndex mode: light blue, shade 15, code 11") {
        const auto ref = to_reference_image(one_pixel(12), PaletteMode::RawIndex);
        CHECK(ref.code_at(0, 0) == 0b11);
        CHECK(ref.shade_at(0, 0) == 15);
    }
}

TEST_CASE("palette matching mode goes through the palette entry",
          "[reference_image]") {
    // Palette slot 3 holds canonical red; a raw read of index 3 would see
    // brown instead.
    bmp4::Bmp4Image img = one_pixel(3);
    img.palette[3] = canonical_rgb(1);  // red

    const auto matched = to_reference_image(img, PaletteMode::MatchPalette);
    const auto raw = to_reference_image(img, PaletteMode::RawIndex);
    // red -> return code 4 -> shade 0; brown -> return code 6 -> shade 0
    CHECK(matched.code_at(0, 0) == 0b00);
    CHECK(raw.code_at(0, 0) == 0b00);

    // A slot holding canonical white must decode as white when matched.
    img.palette[3] = Rgb{255, 255, 255};
    CHECK(to_reference_image(img, PaletteMode::MatchPalette).code_at(0, 0) ==
          0b11);
    CHECK(to_reference_image(img, PaletteMode::RawIndex).code_at(0, 0) == 0b00);
}

TEST_CASE("conversion is per-pixel independent", "[reference_image]") {
    std::mt19937 rng(5);
    std::uniform_int_distribution<int> nibble(0, 15);

    bmp4::Bmp4Image img;
    img.width = 8;
    img.height = 6;
    img.palette = cga_palette_by_return_code();
    img.pixels.resize(48);
    for (auto& p : img.pixels)
        p = std::uint8_t(nibble(rng));

    const auto full = to_reference_image(img, PaletteMode::RawIndex);

    // Convert a 3x2 sub-rectangle at (2,1) on its own.
    bmp4::Bmp4Image sub;
    sub.width = 3;
    sub.height = 2;
    sub.palette = img.palette;
    for (std::uint32_t y = 1; y < 3; ++y)
        for (std::uint32_t x = 2; x < 5; ++x)
            sub.pixels.push_back(img.at(x, y));

    const auto part = to_reference_image(sub, PaletteMode::RawIndex);
    for (std::uint32_t y = 0; y < 2; ++y)
        for (std::uint32_t x = 0; x < 3; ++x)
            CHECK(part.code_at(x, y) == full.code_at(x + 2, y + 1));
}

TEST_CASE("occurrence index partitions the raster in scan order",
          "[reference_image]") {
    SECTION("one coordinate per bucket") {
        const auto ref = to_reference_image(quad_cover(), PaletteMode::RawIndex);
        const OccurrenceIndex index = build_index(ref);
        CHECK(index.bucket(0b00) == std::vector<Coord>{{0, 0}});
        CHECK(index.bucket(0b01) == std::vector<Coord>{{1, 0}});
        CHECK(index.bucket(0b10) == std::vector<Coord>{{0, 1}});
        CHECK(index.bucket(0b11) == std::vector<Coord>{{1, 1}});
    }
    SECTION("uniform image fills a single bucket") {
        bmp4::Bmp4Image img;
        img.width = 4;
        img.height = 3;
        img.palette = cga_palette_by_return_code();
        img.pixels.assign(12, 0);
        const OccurrenceIndex index =
            build_index(to_reference_image(img, PaletteMode::RawIndex));
        CHECK(index.bucket(0b00).size() == 12);
        CHECK(index.bucket(0b01).empty());
        CHECK(index.bucket(0b10).empty());
        CHECK(index.bucket(0b11).empty());
        // scan order: y major, x minor
        CHECK(index.bucket(0b00).front() == Coord{0, 0});
        CHECK(index.bucket(0b00)[1] == Coord{1, 0});
        CHECK(index.bucket(0b00).back() == Coord{3, 2});
    }
    SECTION("buckets are disjoint and exhaustive") {
        std::mt19937 rng(11);
        std::uniform_int_distribution<int> nibble(0, 15);
        bmp4::Bmp4Image img;
        img.width = 9;
        img.height = 7;
        img.palette = cga_palette_by_return_code();
        img.pixels.resize(63);
        for (auto& p : img.pixels)
            p = std::uint8_t(nibble(rng));

        const auto ref = to_reference_image(img, PaletteMode::RawIndex);
        const OccurrenceIndex index = build_index(ref);

        std::size_t total = 0;
        std::vector<bool> seen(63, false);
        for (std::uint8_t c = 0; c < 4; ++c) {
            const auto& bucket = index.bucket(c);
            total += bucket.size();
            for (std::size_t i = 0; i < bucket.size(); ++i) {
                const Coord r = bucket[i];
                CHECK(ref.code_at(r.x, r.y) == c);
                const std::size_t flat = std::size_t(r.y) * 9 + r.x;
                CHECK_FALSE(seen[flat]);
                seen[flat] = true;
                if (i > 0) {
                    const Coord prev = bucket[i - 1];
                    CHECK(std::size_t(prev.y) * 9 + prev.x < flat);
                }
            }
        }
        CHECK(total == 63);
    }
}

TEST_CASE("grey export round-trips through the conversion chain",
          "[reference_image]") {
    std::mt19937 rng(21);
    std::uniform_int_distribution<int> code(0, 3);

    for (int trial = 0; trial < 50; ++trial) {
        std::vector<std::uint8_t> codes(24);
        for (auto& c : codes)
            c = std::uint8_t(code(rng));
        const ReferenceImage ref(6, 4, codes);

        const bmp4::Bmp4Image exported = export_grey_bmp(ref);
        const auto back = to_reference_image(exported, PaletteMode::RawIndex);
        CHECK(std::vector<std::uint8_t>(back.codes().begin(),
                                        back.codes().end()) == codes);

        // matching mode agrees on grey exports
        const auto matched = to_reference_image(exported, PaletteMode::MatchPalette);
        CHECK(std::vector<std::uint8_t>(matched.codes().begin(),
                                        matched.codes().end()) == codes);
    }
}

TEST_CASE("grey export uses the canonical grey palette entries",
          "[reference_image]") {
    const ReferenceImage ref(2, 2, {0b00, 0b01, 0b10, 0b11});
    const bmp4::Bmp4Image img = export_grey_bmp(ref);

    CHECK(img.pixels == std::vector<std::uint8_t>{0, 7, 8, 15});
    CHECK(img.palette[0] == Rgb{0, 0, 0});
    CHECK(img.palette[7] == Rgb{170, 170, 170});
    CHECK(img.palette[8] == Rgb{85, 85, 85});
    CHECK(img.palette[15] == Rgb{255, 255, 255});
}

TEST_CASE("all-white reference exports every pixel as 15", "[reference_image]") {
    const ReferenceImage ref(3, 2, std::vector<std::uint8_t>(6, 0b11));
    const bmp4::Bmp4Image img = export_grey_bmp(ref);
    for (std::uint8_t p : img.pixels)
        CHECK(p == 15);
}

TEST_CASE("reference image validates its construction", "[reference_image]") {
    CHECK_THROWS_AS(ReferenceImage(2, 2, {0, 1, 2}), std::invalid_argument);
    CHECK_THROWS_AS(ReferenceImage(1, 1, {4}), std::invalid_argument);
    CHECK_THROWS_AS(ReferenceImage(0, 1, {}), std::invalid_argument);
}
