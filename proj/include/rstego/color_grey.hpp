#pragma once

#include <array>
#include <cassert>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace rstego {

// The four-bit pixel encodings used throughout:
//
//   ColorNumber - palette slot as stored in the bitmap (0..15)
//   ReturnCode  - IRGB ordering: bit 3 intensity, bit 2 red, bit 1 green,
//                 bit 0 blue; differs from ColorNumber by a swap of bits
//                 0 and 2
//   GreyShade   - one of {0, 7, 8, 15}, the four-shade grey raster value
//   GreyCode2   - top two bits of a GreyShade (0..3), the unit of hidden
//                 information per coordinate
using ColorNumber = std::uint8_t;
using ReturnCode = std::uint8_t;
using GreyShade = std::uint8_t;
using GreyCode2 = std::uint8_t;

struct Rgb {
    std::uint8_t r = 0;
    std::uint8_t g = 0;
    std::uint8_t b = 0;

    bool operator==(const Rgb&) const = default;
};

struct InvalidShade : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

// Color number <-> return code (swap of bits 0 and 2; self-inverse).
inline constexpr std::array<std::uint8_t, 16> kColorToReturn = {
    0, 4, 2, 6, 1, 5, 3, 7, 8, 12, 10, 14, 9, 13, 11, 15};

// Return code -> four-shade grey. 0, 7, 8 and 15 are fixed points; the
// other twelve codes collapse onto {0, 7, 8, 15} via the intensity-fill
// shift (three left shifts, ORing the input's intensity bit into the LSB).
inline constexpr std::array<std::uint8_t, 16> kReturnToShade = {
    0, 8, 0, 8, 0, 8, 0, 7, 8, 15, 7, 15, 7, 15, 7, 15};

// Standard CGA RGBI palette, indexed by return code. Note the brown
// special case at code 6 (half green instead of the regular 170).
inline constexpr std::array<Rgb, 16> kCgaRgbiPalette = {{
    {0, 0, 0},        // black
    {0, 0, 170},      // blue
    {0, 170, 0},      // green
    {0, 170, 170},    // cyan
    {170, 0, 0},      // red
    {170, 0, 170},    // magenta
    {170, 85, 0},     // brown
    {170, 170, 170},  // light grey
    {85, 85, 85},     // dark grey
    {85, 85, 255},    // light blue
    {85, 255, 85},    // light green
    {85, 255, 255},   // light cyan
    {255, 85, 85},    // light red
    {255, 85, 255},   // light magenta
    {255, 255, 85},   // yellow
    {255, 255, 255},  // white
}};

}  // namespace detail

constexpr ReturnCode color_number_to_return_code(ColorNumber n) {
    assert(n < 16);
    return detail::kColorToReturn[n & 0xF];
}

// The bit swap is an involution, so the reverse mapping is the same table.
constexpr ColorNumber return_code_to_color_number(ReturnCode rc) {
    assert(rc < 16);
    return detail::kColorToReturn[rc & 0xF];
}

constexpr GreyShade return_code_to_grey_shade(ReturnCode rc) {
    assert(rc < 16);
    return detail::kReturnToShade[rc & 0xF];
}

// Keep the top two bits, discard the bottom two.
inline GreyCode2 grey_shade_to_code2(GreyShade g) {
    if (g != 0 && g != 7 && g != 8 && g != 15)
        throw InvalidShade("not a 4-shade grey value: " + std::to_string(g));
    return static_cast<GreyCode2>(g >> 2);
}

constexpr GreyShade code2_to_grey_shade(GreyCode2 c) {
    constexpr std::array<std::uint8_t, 4> shades = {0, 7, 8, 15};
    assert(c < 4);
    return shades[c & 0x3];
}

// Canonical RGB for a color number under the CGA RGBI model.
constexpr Rgb canonical_rgb(ColorNumber n) {
    return detail::kCgaRgbiPalette[color_number_to_return_code(n)];
}

// Nearest canonical color by squared Euclidean distance, lowest color
// number winning ties. Bridges real BMP palettes to the 16-color model.
inline ColorNumber palette_entry_to_color_number(Rgb rgb) {
    ColorNumber best = 0;
    int best_dist = -1;
    for (int n = 0; n < 16; ++n) {
        const Rgb c = canonical_rgb(static_cast<ColorNumber>(n));
        const int dr = int(rgb.r) - int(c.r);
        const int dg = int(rgb.g) - int(c.g);
        const int db = int(rgb.b) - int(c.b);
        const int dist = dr * dr + dg * dg + db * db;
        if (best_dist < 0 || dist < best_dist) {
            best_dist = dist;
            best = static_cast<ColorNumber>(n);
        }
    }
    return best;
}

// CGA palette keyed by return code, exposed for grey-image export.
constexpr const std::array<Rgb, 16>& cga_palette_by_return_code() {
    return detail::kCgaRgbiPalette;
}

}  // namespace rstego
