#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rstego/color_grey.hpp"

namespace rstego::bmp4 {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NotBmp : Error {
    using Error::Error;
};
struct UnsupportedDepth : Error {
    using Error::Error;
};
struct UnsupportedCompression : Error {
    using Error::Error;
};
struct Truncated : Error {
    using Error::Error;
};
struct BadDimensions : Error {
    using Error::Error;
};

// An uncompressed 4-bpp indexed bitmap, normalized to logical top-down
// row-major order (index 0 is the top-left pixel) regardless of how the
// file stored its rows.
struct Bmp4Image {
    std::uint32_t width = 0;   // 1..65535
    std::uint32_t height = 0;  // 1..65535
    std::array<Rgb, 16> palette{};
    std::vector<std::uint8_t> pixels;  // width*height color indices, each 0..15

    std::uint8_t at(std::uint32_t x, std::uint32_t y) const {
        return pixels[std::size_t(y) * width + x];
    }

    bool operator==(const Bmp4Image&) const = default;
};

namespace detail {

inline std::uint16_t le16(const std::uint8_t* p) {
    return std::uint16_t(p[0] | (std::uint16_t(p[1]) << 8));
}

inline std::uint32_t le32(const std::uint8_t* p) {
    return std::uint32_t(p[0]) | (std::uint32_t(p[1]) << 8) |
           (std::uint32_t(p[2]) << 16) | (std::uint32_t(p[3]) << 24);
}

inline void put16(std::vector<std::uint8_t>& out, std::uint16_t v) {
    out.push_back(std::uint8_t(v & 0xFF));
    out.push_back(std::uint8_t(v >> 8));
}

inline void put32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    out.push_back(std::uint8_t(v & 0xFF));
    out.push_back(std::uint8_t((v >> 8) & 0xFF));
    out.push_back(std::uint8_t((v >> 16) & 0xFF));
    out.push_back(std::uint8_t((v >> 24) & 0xFF));
}

// Row size in bytes, padded to a 4-byte boundary.
inline std::uint32_t row_stride(std::uint32_t width) {
    return ((width + 1) / 2 + 3) & ~3u;
}

inline void validate(const Bmp4Image& img) {
    if (img.width == 0 || img.width > 65535 || img.height == 0 ||
        img.height > 65535)
        throw BadDimensions("width and height must be 1..65535");
    if (img.pixels.size() != std::size_t(img.width) * img.height)
        throw BadDimensions("pixel count does not match dimensions");
    for (std::uint8_t p : img.pixels)
        if (p > 15)
            throw BadDimensions("pixel index exceeds the 4-bit range");
}

}  // namespace detail

// Parses an uncompressed 4-bpp BMP (BITMAPINFOHEADER family). Bottom-up
// and top-down files are both accepted; pixel rows come out top-down.
// Palettes declaring fewer than 16 colors are padded with black.
inline Bmp4Image parse_bmp(std::span<const std::uint8_t> bytes) {
    const std::uint8_t* p = bytes.data();
    const std::size_t n = bytes.size();

    if (n < 2 || p[0] != 'B' || p[1] != 'M')
        throw NotBmp("missing BM signature");
    if (n < 14 + 4)
        throw Truncated("file header cut short");

    const std::uint32_t pixel_offset = detail::le32(p + 10);
    const std::uint32_t dib_size = detail::le32(p + 14);

    // BITMAPINFOHEADER and its V2..V5 extensions share the 40-byte prefix;
    // anything else (CORE, OS/2) is out of scope.
    if (dib_size != 40 && dib_size != 52 && dib_size != 56 &&
        dib_size != 108 && dib_size != 124)
        throw NotBmp("unrecognized DIB header size " + std::to_string(dib_size));
    if (n < 14 + std::size_t(dib_size))
        throw Truncated("DIB header cut short");

    const std::int32_t raw_width = std::int32_t(detail::le32(p + 18));
    const std::int32_t raw_height = std::int32_t(detail::le32(p + 22));
    const std::uint16_t bpp = detail::le16(p + 28);
    const std::uint32_t compression = detail::le32(p + 30);
    const std::uint32_t colors_used = detail::le32(p + 46);

    if (bpp != 4)
        throw UnsupportedDepth("bit depth " + std::to_string(bpp) +
                               ", only 4 bpp is supported");
    if (compression != 0)
        throw UnsupportedCompression("compression field " +
                                     std::to_string(compression));

    const bool top_down = raw_height < 0;
    const std::int64_t abs_height =
        top_down ? -std::int64_t(raw_height) : std::int64_t(raw_height);
    if (raw_width <= 0 || raw_width > 65535 || abs_height == 0 ||
        abs_height > 65535)
        throw BadDimensions("width " + std::to_string(raw_width) +
                            ", height " + std::to_string(raw_height));

    const std::uint32_t width = std::uint32_t(raw_width);
    const std::uint32_t height = std::uint32_t(abs_height);

    std::uint32_t palette_count = colors_used == 0 ? 16 : colors_used;
    if (palette_count > 16)
        throw UnsupportedDepth("palette declares " +
                               std::to_string(colors_used) +
                               " colors, more than a 4-bit image can hold");

    Bmp4Image img;
    img.width = width;
    img.height = height;

    // Palette entries are stored B, G, R, reserved.
    const std::size_t palette_offset = 14 + std::size_t(dib_size);
    if (n < palette_offset + std::size_t(palette_count) * 4)
        throw Truncated("palette cut short");
    for (std::uint32_t i = 0; i < palette_count; ++i) {
        const std::uint8_t* e = p + palette_offset + std::size_t(i) * 4;
        img.palette[i] = Rgb{e[2], e[1], e[0]};
    }

    const std::uint64_t stride = detail::row_stride(width);
    const std::uint64_t needed = stride * height;
    if (pixel_offset > n || needed > n - pixel_offset)
        throw Truncated("pixel data cut short");

    img.pixels.resize(std::size_t(width) * height);
    for (std::uint32_t row = 0; row < height; ++row) {
        const std::uint8_t* src = p + pixel_offset + std::size_t(row) * stride;
        const std::uint32_t y = top_down ? row : height - 1 - row;
        std::uint8_t* dst = img.pixels.data() + std::size_t(y) * width;
        for (std::uint32_t x = 0; x < width; x += 2) {
            const std::uint8_t packed = src[x / 2];
            dst[x] = packed >> 4;
            if (x + 1 < width)
                dst[x + 1] = packed & 0xF;
        }
    }
    return img;
}

// Emits the canonical form: 40-byte info header, full 16-entry palette,
// bottom-up rows padded to 4 bytes. Deterministic for equal inputs.
inline std::vector<std::uint8_t> write_bmp(const Bmp4Image& img) {
    detail::validate(img);

    const std::uint32_t stride = detail::row_stride(img.width);
    const std::uint32_t image_size = stride * img.height;
    const std::uint32_t data_offset = 14 + 40 + 16 * 4;
    const std::uint32_t file_size = data_offset + image_size;

    std::vector<std::uint8_t> out;
    out.reserve(file_size);

    out.push_back('B');
    out.push_back('M');
    detail::put32(out, file_size);
    detail::put32(out, 0);  // reserved
    detail::put32(out, data_offset);

    detail::put32(out, 40);  // BITMAPINFOHEADER
    detail::put32(out, img.width);
    detail::put32(out, img.height);  // positive: bottom-up storage
    detail::put16(out, 1);           // planes
    detail::put16(out, 4);           // bits per pixel
    detail::put32(out, 0);           // BI_RGB
    detail::put32(out, image_size);
    detail::put32(out, 0);   // x pixels per meter
    detail::put32(out, 0);   // y pixels per meter
    detail::put32(out, 16);  // colors used
    detail::put32(out, 0);   // colors important

    for (const Rgb& c : img.palette) {
        out.push_back(c.b);
        out.push_back(c.g);
        out.push_back(c.r);
        out.push_back(0);
    }

    for (std::uint32_t row = 0; row < img.height; ++row) {
        const std::uint32_t y = img.height - 1 - row;
        const std::uint8_t* src = img.pixels.data() + std::size_t(y) * img.width;
        std::uint32_t emitted = 0;
        for (std::uint32_t x = 0; x < img.width; x += 2) {
            std::uint8_t packed = std::uint8_t(src[x] << 4);
            if (x + 1 < img.width)
                packed |= src[x + 1] & 0xF;
            out.push_back(packed);
            ++emitted;
        }
        while (emitted++ < stride)
            out.push_back(0);
    }
    return out;
}

}  // namespace rstego::bmp4
