#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rstego/reference_image.hpp"

namespace rstego {

using Message = std::vector<std::uint8_t>;
using CoordRecord = Coord;

struct StegoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// The cover has no pixel carrying the 2-bit code a chunk needs.
struct MissingShade : StegoError {
    explicit MissingShade(GreyCode2 code)
        : StegoError("reference image has no pixel with 2-bit code " +
                     std::to_string(int(code))),
          chunk(code) {}

    GreyCode2 chunk;
};

struct CoordOutOfBounds : StegoError {
    explicit CoordOutOfBounds(std::size_t record_index)
        : StegoError("record " + std::to_string(record_index) +
                     " lies outside the reference image"),
          record(record_index) {}

    std::size_t record;
};

struct LengthNotMultipleOfFour : StegoError {
    using StegoError::StegoError;
};

// Coordinate picking when a code occurs more than once. Random draws are
// reproducible: the generator is splitmix64, pinned in docs/FORMAT.md.
struct SelectionStrategy {
    enum class Kind { FirstOccurrence, Random };

    Kind kind = Kind::FirstOccurrence;
    std::uint64_t seed = 0;

    static SelectionStrategy first() { return {Kind::FirstOccurrence, 0}; }
    static SelectionStrategy random(std::uint64_t seed) {
        return {Kind::Random, seed};
    }
};

// splitmix64 (Steele, Lea & Flood). Any 64-bit seed is acceptable,
// including zero.
class SplitMix64 {
public:
    explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

    std::uint64_t next() {
        std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ull);
        z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
        z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
        return z ^ (z >> 31);
    }

    // One draw mapped onto [0, n) by the multiply-shift reduction.
    std::size_t bounded(std::size_t n) {
        return std::size_t((__uint128_t(next()) * n) >> 64);
    }

private:
    std::uint64_t state_;
};

// MSB-first 2-bit split: chunk 0 holds bits 7..6, chunk 3 holds bits 1..0.
constexpr std::array<GreyCode2, 4> byte_to_chunks(std::uint8_t b) {
    return {GreyCode2((b >> 6) & 3), GreyCode2((b >> 4) & 3),
            GreyCode2((b >> 2) & 3), GreyCode2(b & 3)};
}

constexpr std::uint8_t chunks_to_byte(const std::array<GreyCode2, 4>& c) {
    return std::uint8_t(((c[0] & 3) << 6) | ((c[1] & 3) << 4) |
                        ((c[2] & 3) << 2) | (c[3] & 3));
}

// Maps each message byte onto four coordinate records, one per 2-bit
// chunk, each pointing at a pixel that carries that chunk's code. The
// cover is consulted read-only; output length is exactly 4 * msg.size().
inline std::vector<CoordRecord> hide(const Message& msg,
                                     const OccurrenceIndex& index,
                                     SelectionStrategy strategy) {
    std::vector<CoordRecord> records;
    records.reserve(msg.size() * 4);

    SplitMix64 rng(strategy.seed);
    const bool random = strategy.kind == SelectionStrategy::Kind::Random;

    for (std::uint8_t byte : msg) {
        for (GreyCode2 chunk : byte_to_chunks(byte)) {
            const std::vector<Coord>& bucket = index.buckets[chunk];
            if (bucket.empty())
                throw MissingShade(chunk);
            const std::size_t pick = random ? rng.bounded(bucket.size()) : 0;
            records.push_back(bucket[pick]);
        }
    }
    return records;
}

// Reads the 2-bit code under each record and reassembles bytes four
// records at a time. Inverse of hide for any cover containing the codes.
inline Message unhide(std::span<const CoordRecord> records,
                      const ReferenceImage& ref) {
    if (records.size() % 4 != 0)
        throw LengthNotMultipleOfFour(
            "record count " + std::to_string(records.size()) +
            " is not a multiple of four");

    Message msg;
    msg.reserve(records.size() / 4);
    for (std::size_t i = 0; i < records.size(); i += 4) {
        std::array<GreyCode2, 4> chunks{};
        for (std::size_t k = 0; k < 4; ++k) {
            const CoordRecord r = records[i + k];
            if (r.x >= ref.width() || r.y >= ref.height())
                throw CoordOutOfBounds(i + k);
            chunks[k] = ref.code_at(r.x, r.y);
        }
        msg.push_back(chunks_to_byte(chunks));
    }
    return msg;
}

}  // namespace rstego
