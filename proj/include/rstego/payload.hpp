#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rstego/stego.hpp"

namespace rstego::payload {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct BadMagic : Error {
    using Error::Error;
};
struct UnsupportedVersion : Error {
    using Error::Error;
};
struct Truncated : Error {
    using Error::Error;
};
struct TrailingGarbage : Error {
    using Error::Error;
};
struct TooLong : Error {
    using Error::Error;
};

inline constexpr std::array<std::uint8_t, 4> kMagic = {'R', 'S', 'T', 'G'};
inline constexpr std::uint8_t kVersion = 1;

// The coordinate data file exchanged over the second channel. Wire layout
// (little-endian, see docs/FORMAT.md):
//
//   "RSTG"  magic            4 bytes
//   version                  1 byte
//   flags (reserved, 0)      1 byte
//   message_length           4 bytes
//   records                  message_length * 4 entries of x:u16 y:u16
struct PayloadFile {
    std::uint8_t version = kVersion;
    std::uint64_t message_length = 0;
    std::vector<CoordRecord> records;

    bool operator==(const PayloadFile&) const = default;
};

// Convenience constructor pairing a hidden message's length with its
// records; rejects counts the wire format cannot carry.
inline PayloadFile make_payload(std::uint64_t message_length,
                                std::vector<CoordRecord> records) {
    if (message_length > 0xFFFFFFFFull)
        throw TooLong("message length " + std::to_string(message_length) +
                      " exceeds the 32-bit field");
    if (records.size() != message_length * 4)
        throw std::invalid_argument("record count must be 4x message length");
    PayloadFile p;
    p.message_length = message_length;
    p.records = std::move(records);
    return p;
}

inline std::vector<std::uint8_t> serialize(const PayloadFile& p) {
    if (p.message_length > 0xFFFFFFFFull)
        throw TooLong("message length " + std::to_string(p.message_length) +
                      " exceeds the 32-bit field");
    if (p.records.size() != p.message_length * 4)
        throw std::invalid_argument("record count must be 4x message length");

    std::vector<std::uint8_t> out;
    out.reserve(10 + p.records.size() * 4);
    for (std::uint8_t m : kMagic)
        out.push_back(m);
    out.push_back(p.version);
    out.push_back(0);  // flags
    const std::uint32_t len = std::uint32_t(p.message_length);
    out.push_back(std::uint8_t(len & 0xFF));
    out.push_back(std::uint8_t((len >> 8) & 0xFF));
    out.push_back(std::uint8_t((len >> 16) & 0xFF));
    out.push_back(std::uint8_t((len >> 24) & 0xFF));
    for (const CoordRecord& r : p.records) {
        out.push_back(std::uint8_t(r.x & 0xFF));
        out.push_back(std::uint8_t(r.x >> 8));
        out.push_back(std::uint8_t(r.y & 0xFF));
        out.push_back(std::uint8_t(r.y >> 8));
    }
    return out;
}

inline PayloadFile deserialize(std::span<const std::uint8_t> bytes) {
    if (bytes.size() < 4)
        throw Truncated("header cut short");
    if (!std::equal(kMagic.begin(), kMagic.end(), bytes.begin()))
        throw BadMagic("missing RSTG signature");
    if (bytes.size() < 10)
        throw Truncated("header cut short");

    PayloadFile p;
    p.version = bytes[4];
    if (p.version != kVersion)
        throw UnsupportedVersion("version " + std::to_string(p.version));
    // bytes[5] is the reserved flags byte; ignored on read.

    p.message_length = std::uint32_t(bytes[6]) | (std::uint32_t(bytes[7]) << 8) |
                       (std::uint32_t(bytes[8]) << 16) |
                       (std::uint32_t(bytes[9]) << 24);

    const std::uint64_t expected = 10 + p.message_length * 16;
    if (bytes.size() < expected)
        throw Truncated("payload promises " + std::to_string(expected) +
                        " bytes, got " + std::to_string(bytes.size()));
    if (bytes.size() > expected)
        throw TrailingGarbage(std::to_string(bytes.size() - expected) +
                              " bytes past the last record");

    p.records.resize(std::size_t(p.message_length) * 4);
    const std::uint8_t* q = bytes.data() + 10;
    for (CoordRecord& r : p.records) {
        r.x = std::uint16_t(q[0] | (std::uint16_t(q[1]) << 8));
        r.y = std::uint16_t(q[2] | (std::uint16_t(q[3]) << 8));
        q += 4;
    }
    return p;
}

}  // namespace rstego::payload
