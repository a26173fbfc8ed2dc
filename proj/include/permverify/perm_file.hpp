// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "permverify/permutation.hpp"

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace permverify {

/// Binary permutation file:
///
///   offset 0   "PRMV"
///   offset 4   version = 1
///   offset 5   n
///   offset 6   two reserved zero bytes
///   offset 8   count, 64-bit little-endian
///   offset 16  count records of n bytes, record i holding f_i(0..n-1)
///
/// File length is exactly 16 + count * n.
inline constexpr std::size_t kPermFileHeaderSize = 16;
inline constexpr std::uint8_t kPermFileVersion = 1;

struct PermFileHeader {
    std::size_t n = 0;
    std::uint64_t count = 0;
};

void write_header(std::ostream& out, const PermFileHeader& header);
/// Throws Error{MalformedFile} on a bad magic, version, n or reserved bytes.
PermFileHeader read_header(std::istream& in);

/// Streams validated records in batches.
class PermFileReader {
public:
    explicit PermFileReader(std::istream& in);

    const PermFileHeader& header() const noexcept { return header_; }

    /// Reads up to `max_records` records into `rows` (row-major). Returns the
    /// number read; 0 at the end. Every record is checked to be a
    /// bijection, and a short or over-long file raises Error{MalformedFile}.
    std::uint64_t read_batch(std::vector<std::uint8_t>& rows, std::uint64_t max_records);

private:
    std::istream& in_;
    PermFileHeader header_;
    std::uint64_t remaining_;
};

void write_perm_file(const std::string& path, std::span<const Permutation> perms);
std::vector<Permutation> read_perm_file(const std::string& path);
PermMultiset read_perm_multiset(const std::string& path);

/// Small reference sets shipped under fixtures/.
namespace fixtures {

/// 40 permutations of 5 indices that form a second-order set but not a
/// third-order one.
std::vector<Permutation> order_two_not_three();
/// The alternating group A_n (even permutations), n <= 8.
std::vector<Permutation> alternating_group(std::size_t n);
/// The cyclic group generated by the rotation i -> i + 1.
std::vector<Permutation> cyclic_group(std::size_t n);

PermMultiset uniform(std::span<const Permutation> perms);

} // namespace fixtures

} // namespace permverify
