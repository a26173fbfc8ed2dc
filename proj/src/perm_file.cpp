// SPDX-License-Identifier: Apache-2.0

#include "permverify/perm_file.hpp"

#include "permverify/error.hpp"

#include <array>
#include <fstream>
#include <istream>
#include <ostream>

namespace permverify {

void write_header(std::ostream& out, const PermFileHeader& header) {
    std::array<char, kPermFileHeaderSize> buf{'P', 'R', 'M', 'V'};
    buf[4] = static_cast<char>(kPermFileVersion);
    buf[5] = static_cast<char>(header.n);
    for (std::size_t i = 0; i < 8; ++i) buf[8 + i] = static_cast<char>((header.count >> (8 * i)) & 0xFF);
    out.write(buf.data(), buf.size());
    if (!out) throw Error(ErrorCode::Io, "failed to write permutation file header");
}

PermFileHeader read_header(std::istream& in) {
    std::array<unsigned char, kPermFileHeaderSize> buf{};
    in.read(reinterpret_cast<char*>(buf.data()), buf.size());
    if (in.gcount() != static_cast<std::streamsize>(buf.size())) {
        throw Error(ErrorCode::MalformedFile, "truncated header");
    }
    if (buf[0] != 'P' || buf[1] != 'R' || buf[2] != 'M' || buf[3] != 'V') {
        throw Error(ErrorCode::MalformedFile, "bad magic");
    }
    if (buf[4] != kPermFileVersion) throw Error(ErrorCode::MalformedFile, "unsupported version");
    if (buf[6] != 0 || buf[7] != 0) throw Error(ErrorCode::MalformedFile, "reserved bytes set");
    PermFileHeader h;
    h.n = buf[5];
    if (h.n < kMinIndices) throw Error(ErrorCode::MalformedFile, "n below 2");
    for (std::size_t i = 0; i < 8; ++i) h.count |= std::uint64_t{buf[8 + i]} << (8 * i);
    return h;
}

PermFileReader::PermFileReader(std::istream& in)
    : in_(in), header_(read_header(in)), remaining_(header_.count) {}

std::uint64_t PermFileReader::read_batch(std::vector<std::uint8_t>& rows,
                                         std::uint64_t max_records) {
    const std::size_t n = header_.n;
    const std::uint64_t want = std::min(max_records, remaining_);
    rows.resize(want * n);
    if (want == 0) {
        if (in_.peek() != std::char_traits<char>::eof()) {
            throw Error(ErrorCode::MalformedFile, "trailing bytes after last record");
        }
        return 0;
    }
    in_.read(reinterpret_cast<char*>(rows.data()), static_cast<std::streamsize>(rows.size()));
    if (in_.gcount() != static_cast<std::streamsize>(rows.size())) {
        throw Error(ErrorCode::MalformedFile, "file shorter than its record count");
    }
    std::vector<std::uint8_t> seen(n);
    for (std::uint64_t r = 0; r < want; ++r) {
        std::fill(seen.begin(), seen.end(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const std::uint8_t v = rows[r * n + i];
            if (v >= n || seen[v]) {
                throw Error(ErrorCode::MalformedFile,
                            "record " + std::to_string(header_.count - remaining_ + r) +
                                " is not a permutation");
            }
            seen[v] = 1;
        }
    }
    remaining_ -= want;
    return want;
}

void write_perm_file(const std::string& path, std::span<const Permutation> perms) {
    if (perms.empty()) throw Error(ErrorCode::InvalidArgument, "nothing to write");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + path);
    const std::size_t n = perms.front().size();
    write_header(out, {n, perms.size()});
    for (const auto& p : perms) {
        if (p.size() != n) throw Error(ErrorCode::DimensionMismatch, "mixed permutation sizes");
        out.write(reinterpret_cast<const char*>(p.mapping().data()), static_cast<std::streamsize>(n));
    }
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

std::vector<Permutation> read_perm_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + path);
    PermFileReader reader(in);
    const std::size_t n = reader.header().n;
    std::vector<Permutation> out;
    std::vector<std::uint8_t> rows;
    while (const std::uint64_t got = reader.read_batch(rows, 1 << 16)) {
        for (std::uint64_t r = 0; r < got; ++r) {
            out.push_back(Permutation::from_trusted(
                std::vector<std::uint8_t>(rows.begin() + r * n, rows.begin() + (r + 1) * n)));
        }
    }
    return out;
}

PermMultiset read_perm_multiset(const std::string& path) {
    const auto perms = read_perm_file(path);
    if (perms.empty()) throw Error(ErrorCode::MalformedFile, "file holds no permutations");
    return fixtures::uniform(perms);
}

namespace fixtures {

std::vector<Permutation> order_two_not_three() {
    // One-based rows as commonly printed; converted to Z_5 below.
    static constexpr unsigned rows[40][5] = {
        {1, 2, 3, 4, 5}, {1, 2, 3, 5, 4}, {1, 3, 2, 4, 5}, {1, 3, 2, 5, 4}, {1, 4, 5, 2, 3},
        {1, 4, 5, 3, 2}, {1, 5, 4, 2, 3}, {1, 5, 4, 3, 2}, {2, 1, 4, 3, 5}, {2, 1, 4, 5, 3},
        {2, 3, 5, 1, 4}, {2, 3, 5, 4, 1}, {2, 4, 1, 3, 5}, {2, 4, 1, 5, 3}, {2, 5, 3, 1, 4},
        {2, 5, 3, 4, 1}, {3, 1, 5, 2, 4}, {3, 1, 5, 4, 2}, {3, 2, 4, 1, 5}, {3, 2, 4, 5, 1},
        {3, 4, 2, 1, 5}, {3, 4, 2, 5, 1}, {3, 5, 1, 2, 4}, {3, 5, 1, 4, 2}, {4, 1, 3, 2, 5},
        {4, 1, 3, 5, 2}, {4, 2, 5, 1, 3}, {4, 2, 5, 3, 1}, {4, 3, 1, 2, 5}, {4, 3, 1, 5, 2},
        {4, 5, 2, 1, 3}, {4, 5, 2, 3, 1}, {5, 1, 2, 3, 4}, {5, 1, 2, 4, 3}, {5, 2, 1, 3, 4},
        {5, 2, 1, 4, 3}, {5, 3, 4, 1, 2}, {5, 3, 4, 2, 1}, {5, 4, 3, 1, 2}, {5, 4, 3, 2, 1},
    };
    std::vector<Permutation> out;
    for (const auto& row : rows) {
        std::array<unsigned, 5> zero_based{};
        for (std::size_t i = 0; i < 5; ++i) zero_based[i] = row[i] - 1;
        out.push_back(validate(std::span<const unsigned>(zero_based)));
    }
    return out;
}

std::vector<Permutation> alternating_group(std::size_t n) {
    std::vector<Permutation> out;
    for (std::uint64_t r = 0; r < factorial(n); ++r) {
        auto p = lehmer_unrank(r, n);
        if (parity(p) == Parity::even) out.push_back(std::move(p));
    }
    return out;
}

std::vector<Permutation> cyclic_group(std::size_t n) {
    std::vector<Permutation> out;
    for (std::size_t s = 0; s < n; ++s) {
        std::vector<std::uint8_t> m(n);
        for (std::size_t i = 0; i < n; ++i) m[i] = static_cast<std::uint8_t>((i + s) % n);
        out.push_back(Permutation::from_trusted(std::move(m)));
    }
    return out;
}

PermMultiset uniform(std::span<const Permutation> perms) {
    if (perms.empty()) throw Error(ErrorCode::InvalidArgument, "empty permutation set");
    PermMultiset ms(perms.front().size());
    for (const auto& p : perms) ms.add(p);
    return ms;
}

} // namespace fixtures

} // namespace permverify
