// SPDX-License-Identifier: Apache-2.0

#include "permverify/shuffle.hpp"

#include "permverify/error.hpp"

#include <numeric>
#include <utility>

namespace permverify {

std::string_view to_string(Algorithm algo) noexcept {
    switch (algo) {
    case Algorithm::fy_ideal: return "fy-ideal";
    case Algorithm::fy_mod: return "fy-mod";
    case Algorithm::fy_float: return "fy-float";
    case Algorithm::fy_muldiv: return "fy-muldiv";
    case Algorithm::naive: return "naive";
    case Algorithm::sattolo: return "sattolo";
    }
    return "?";
}

Algorithm parse_algorithm(std::string_view name) {
    if (name == "fy-ideal") return Algorithm::fy_ideal;
    if (name == "fy-mod") return Algorithm::fy_mod;
    if (name == "fy-float") return Algorithm::fy_float;
    if (name == "fy-muldiv") return Algorithm::fy_muldiv;
    if (name == "naive") return Algorithm::naive;
    if (name == "sattolo") return Algorithm::sattolo;
    throw Error(ErrorCode::InvalidArgument, "unknown algorithm '" + std::string(name) + "'");
}

void ShuffleSpec::check() const {
    if (n < kMinIndices || n > kMaxIndices) {
        throw Error(ErrorCode::InvalidSpec, "n must be in [2,255]");
    }
    if (algo != Algorithm::fy_ideal && (bits < 1 || bits > 32)) {
        throw Error(ErrorCode::InvalidSpec, "bits must be in [1,32]");
    }
}

namespace {

template <typename Pick>
void swap_loop(std::span<std::uint8_t> x, Pick&& pick) {
    for (std::size_t j = x.size(); j >= 2; --j) {
        const std::size_t k = pick(static_cast<std::uint32_t>(j));
        std::swap(x[k], x[j - 1]);
    }
}

} // namespace

void shuffle_into(const ShuffleSpec& spec, BitSource& src, std::span<std::uint8_t> out) {
    if (out.size() != spec.n) throw Error(ErrorCode::DimensionMismatch, "output size != n");
    std::iota(out.begin(), out.end(), std::uint8_t{0});
    const unsigned b = spec.bits;
    const auto n = static_cast<std::uint32_t>(spec.n);
    switch (spec.algo) {
    case Algorithm::fy_ideal:
        if (src.kind() != SourceKind::ideal) {
            throw Error(ErrorCode::IncompatibleSource, "fy-ideal needs the ideal source");
        }
        swap_loop(out, [&](std::uint32_t j) { return src.draw_in_range_ideal(j); });
        break;
    case Algorithm::fy_mod:
        swap_loop(out, [&](std::uint32_t j) { return src.draw_bits(b) % j; });
        break;
    case Algorithm::fy_float:
        swap_loop(out, [&](std::uint32_t j) {
            const std::uint64_t r = src.draw_bits(b);
            return static_cast<std::uint32_t>((r * j) / spec.refiner());
        });
        break;
    case Algorithm::fy_muldiv:
        swap_loop(out, [&](std::uint32_t j) {
            const std::uint64_t r = src.draw_bits(b);
            return static_cast<std::uint32_t>((r * j) >> b);
        });
        break;
    case Algorithm::naive:
        swap_loop(out, [&](std::uint32_t) { return src.draw_bits(b) % n; });
        break;
    case Algorithm::sattolo:
        swap_loop(out, [&](std::uint32_t j) { return src.draw_bits(b) % (j - 1); });
        break;
    }
}

Permutation shuffle(const ShuffleSpec& spec, BitSource& src) {
    spec.check();
    std::vector<std::uint8_t> m(spec.n);
    shuffle_into(spec, src, m);
    return Permutation::from_trusted(std::move(m));
}

std::vector<Permutation> generate_stream(const ShuffleSpec& spec, BitSource& src,
                                         std::uint64_t count) {
    if (count == 0) throw Error(ErrorCode::InvalidArgument, "stream length must be >= 1");
    spec.check();
    std::vector<Permutation> out;
    out.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) out.push_back(shuffle(spec, src));
    return out;
}

std::uint64_t generate_chunk(const ShuffleSpec& spec, const BitSource& root, std::uint64_t chunk,
                             std::uint64_t total, std::vector<std::uint8_t>& out) {
    const std::uint64_t first = chunk * kChunkSize;
    if (first >= total) return 0;
    const std::uint64_t count = std::min(kChunkSize, total - first);
    out.resize(count * spec.n);
    BitSource src = root.fork(chunk);
    for (std::uint64_t i = 0; i < count; ++i) {
        shuffle_into(spec, src, std::span(out).subspan(i * spec.n, spec.n));
    }
    return count;
}

} // namespace permverify
