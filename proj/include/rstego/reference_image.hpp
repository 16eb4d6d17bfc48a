#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "rstego/bmp4.hpp"
#include "rstego/color_grey.hpp"

namespace rstego {

// Pixel position, origin (0,0) at the top-left, x = column, y = row.
struct Coord {
    std::uint16_t x = 0;
    std::uint16_t y = 0;

    bool operator==(const Coord&) const = default;
};

// How bitmap pixels are interpreted as color numbers:
//   RawIndex     - the stored index is the color number (CGA-ordered palette)
//   MatchPalette - the palette entry is matched to the nearest canonical
//                  CGA color first
enum class PaletteMode { RawIndex, MatchPalette };

// The grey-code raster a message is hidden against. Immutable once built;
// shades are derived from codes on demand.
class ReferenceImage {
public:
    ReferenceImage(std::uint32_t width, std::uint32_t height,
                   std::vector<std::uint8_t> codes)
        : width_(width), height_(height), codes_(std::move(codes)) {
        if (width_ == 0 || height_ == 0 ||
            codes_.size() != std::size_t(width_) * height_)
            throw std::invalid_argument("code raster does not match dimensions");
        for (std::uint8_t c : codes_)
            if (c > 3)
                throw std::invalid_argument("grey codes are two bits");
    }

    std::uint32_t width() const { return width_; }
    std::uint32_t height() const { return height_; }

    std::span<const std::uint8_t> codes() const { return codes_; }

    GreyCode2 code_at(std::uint32_t x, std::uint32_t y) const {
        return codes_[std::size_t(y) * width_ + x];
    }

    GreyShade shade_at(std::uint32_t x, std::uint32_t y) const {
        return code2_to_grey_shade(code_at(x, y));
    }

    std::vector<std::uint8_t> shades() const {
        std::vector<std::uint8_t> out(codes_.size());
        for (std::size_t i = 0; i < codes_.size(); ++i)
            out[i] = code2_to_grey_shade(codes_[i]);
        return out;
    }

private:
    std::uint32_t width_;
    std::uint32_t height_;
    std::vector<std::uint8_t> codes_;
};

// For each 2-bit code, every coordinate carrying it, in row-major scan
// order (y major, x minor). The four buckets partition the image.
struct OccurrenceIndex {
    std::array<std::vector<Coord>, 4> buckets;

    const std::vector<Coord>& bucket(GreyCode2 code) const {
        return buckets[code & 0x3];
    }
};

// Runs each pixel through the conversion chain: color number (per mode),
// return code, grey shade, 2-bit code. Pixels map independently, so the
// whole image is a single table lookup per pixel.
inline ReferenceImage to_reference_image(
    const bmp4::Bmp4Image& image,
    PaletteMode mode = PaletteMode::MatchPalette) {
    std::array<std::uint8_t, 16> index_to_code{};
    for (int i = 0; i < 16; ++i) {
        const ColorNumber n =
            mode == PaletteMode::RawIndex
                ? ColorNumber(i)
                : palette_entry_to_color_number(image.palette[i]);
        const ReturnCode rc = color_number_to_return_code(n);
        index_to_code[i] = grey_shade_to_code2(return_code_to_grey_shade(rc));
    }

    std::vector<std::uint8_t> codes(image.pixels.size());
    for (std::size_t i = 0; i < image.pixels.size(); ++i)
        codes[i] = index_to_code[image.pixels[i] & 0xF];
    return ReferenceImage(image.width, image.height, std::move(codes));
}

inline OccurrenceIndex build_index(const ReferenceImage& ref) {
    OccurrenceIndex index;
    for (std::uint32_t y = 0; y < ref.height(); ++y)
        for (std::uint32_t x = 0; x < ref.width(); ++x)
            index.buckets[ref.code_at(x, y)].push_back(
                Coord{std::uint16_t(x), std::uint16_t(y)});
    return index;
}

// Renders the four-shade raster as a 4-bpp bitmap whose pixel indices are
// the shade values themselves and whose palette is the canonical CGA
// table, so indices 0, 7, 8 and 15 show black, light grey, dark grey and
// white. Re-importing in RawIndex mode reproduces the codes exactly.
inline bmp4::Bmp4Image export_grey_bmp(const ReferenceImage& ref) {
    bmp4::Bmp4Image img;
    img.width = ref.width();
    img.height = ref.height();
    img.palette = cga_palette_by_return_code();
    img.pixels = ref.shades();
    return img;
}

}  // namespace rstego
