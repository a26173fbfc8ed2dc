// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "permverify/bit_source.hpp"
#include "permverify/permutation.hpp"

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace permverify {

enum class Algorithm { fy_ideal, fy_mod, fy_float, fy_muldiv, naive, sattolo };

std::string_view to_string(Algorithm algo) noexcept;
/// Accepts exactly "fy-ideal", "fy-mod", "fy-float", "fy-muldiv", "naive", "sattolo".
Algorithm parse_algorithm(std::string_view name);

/// Algorithm, index count and per-draw width. Together with a BitSource this
/// is a select function mapping random tapes to permutations.
struct ShuffleSpec {
    Algorithm algo = Algorithm::fy_ideal;
    std::size_t n = 2;
    unsigned bits = 16; // ignored by fy-ideal

    /// Refiner for fy-muldiv: 2^bits.
    std::uint64_t refiner() const noexcept { return std::uint64_t{1} << bits; }

    /// Throws Error{InvalidSpec} unless 2 <= n <= 255 and 1 <= bits <= 32.
    void check() const;
};

/// Runs the swap loop for j = n down to 2 and writes the result to
/// `out` (size n). Every variant other than fy-ideal makes exactly n-1
/// draws of `bits` bits:
///
///   fy-mod     k = r mod j
///   fy-float   k = floor(j * r / 2^b), computed exactly
///   fy-muldiv  k = (r * j) >> b
///   naive      k = r mod n
///   sattolo    k = r mod (j - 1)
///
/// fy-ideal draws k uniformly from [0, j) by rejection and needs the ideal
/// source kind (Error{IncompatibleSource} otherwise).
void shuffle_into(const ShuffleSpec& spec, BitSource& src, std::span<std::uint8_t> out);

Permutation shuffle(const ShuffleSpec& spec, BitSource& src);

/// `count` permutations from repeated shuffles of one evolving source.
std::vector<Permutation> generate_stream(const ShuffleSpec& spec, BitSource& src,
                                         std::uint64_t count);

/// The canonical sample stream used by every pipeline: permutation i belongs
/// to chunk i / kChunkSize, and chunk c is drawn from `root.fork(c)`. The
/// stream therefore does not depend on how chunks are spread over threads.
inline constexpr std::uint64_t kChunkSize = std::uint64_t{1} << 16;

inline std::uint64_t chunk_count(std::uint64_t total) {
    return (total + kChunkSize - 1) / kChunkSize;
}

/// Fills `out` (row-major, n bytes per permutation) with chunk `chunk` of the
/// canonical stream of `total` permutations. Returns the number of
/// permutations written.
std::uint64_t generate_chunk(const ShuffleSpec& spec, const BitSource& root, std::uint64_t chunk,
                             std::uint64_t total, std::vector<std::uint8_t>& out);

} // namespace permverify
