// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace permverify {

/// 128-bit seed or key, stored big-endian (byte 0 is the most significant).
struct Seed128 {
    std::array<std::uint8_t, 16> bytes{};

    /// Parses exactly 32 hex characters. Throws Error{InvalidArgument}.
    static Seed128 from_hex(std::string_view hex);
    static Seed128 from_u64(std::uint64_t low);
    std::string to_hex() const;

    friend bool operator==(const Seed128&, const Seed128&) = default;
};

enum class SourceKind { lcg_msvc, aes128, ideal, tape };

std::string_view to_string(SourceKind kind) noexcept;
/// Accepts exactly "lcg-msvc", "aes128", "ideal", "tape".
SourceKind parse_source_kind(std::string_view name);

/// AES-128 in the chained mode state <- E(key, state); every call to
/// `next_block` returns the new state. Equivalent to the OFB keystream with
/// IV = initial state.
class AesChain {
public:
    AesChain(const Seed128& key, const Seed128& initial_state);
    AesChain(const AesChain& other);
    AesChain& operator=(const AesChain& other);
    AesChain(AesChain&&) noexcept;
    AesChain& operator=(AesChain&&) noexcept;
    ~AesChain();

    /// Next four keystream bytes as a big-endian word.
    std::uint32_t next_word() {
        if (pos_ == buffer_.size()) refill();
        const std::uint32_t w = (std::uint32_t{buffer_[pos_]} << 24) |
                                (std::uint32_t{buffer_[pos_ + 1]} << 16) |
                                (std::uint32_t{buffer_[pos_ + 2]} << 8) |
                                std::uint32_t{buffer_[pos_ + 3]};
        pos_ += 4;
        return w;
    }

private:
    struct Ctx;
    void refill();

    std::unique_ptr<Ctx> ctx_;
    std::array<std::uint8_t, 1024> buffer_{};
    std::size_t pos_ = buffer_.size();
};

/// Single-block AES-128 encryption.
Seed128 aes128_encrypt(const Seed128& key, const Seed128& block);

/// Default fixed key 00 01 02 .. 0f for the aes128 and ideal kinds.
Seed128 default_aes_key();

/// Every assignment of L draws of b bits, visited in lexicographic order
/// (draw 0 most significant).
class Tape {
public:
    Tape(unsigned bits, std::size_t length);

    unsigned bits() const noexcept { return bits_; }
    std::size_t length() const noexcept { return values_.size(); }
    bool exhausted() const noexcept { return exhausted_; }
    std::span<const std::uint32_t> values() const noexcept { return values_; }

    /// Moves to the next assignment; after the last one the tape becomes
    /// exhausted and `advance` returns false.
    bool advance();

private:
    unsigned bits_;
    std::vector<std::uint32_t> values_;
    bool exhausted_ = false;
};

/// A deterministic stream of b-bit unsigned integers.
///
/// Raw generator output (15-bit words for lcg-msvc, 128-bit blocks for the
/// AES kinds) is appended most-significant-bit first to a bit queue, and
/// each draw takes the next b bits from the front of that queue. The tape
/// kind bypasses the queue: each draw returns the next tape entry.
///
/// Single-owner mutable state; use `fork` to give each worker its own stream.
class BitSource {
public:
    static BitSource lcg_msvc(const Seed128& seed);
    static BitSource aes128(const Seed128& seed, const Seed128& key = default_aes_key());
    static BitSource ideal(const Seed128& seed, const Seed128& key = default_aes_key());
    /// The tape must outlive the source.
    static BitSource from_tape(const Tape& tape);
    /// Builds any non-tape kind.
    static BitSource make(SourceKind kind, const Seed128& seed);

    SourceKind kind() const noexcept { return kind_; }
    const Seed128& seed() const noexcept { return seed_; }
    std::uint64_t bits_consumed() const noexcept { return consumed_; }

    /// A value in [0, 2^b), 1 <= b <= 32. Throws Error{TapeExhausted} when a
    /// tape has no draws left.
    std::uint32_t draw_bits(unsigned b) {
        consumed_ += b;
        if (kind_ != SourceKind::tape && queued_ >= b) {
            queued_ -= b;
            return static_cast<std::uint32_t>((queue_ >> queued_) & mask(b));
        }
        return draw_slow(b);
    }

    /// Unbiased value in [0, j) by redrawing ceil(log2 j)-bit values until
    /// one falls below j. Requires the ideal kind.
    std::uint32_t draw_in_range_ideal(std::uint32_t j);

    /// Independent child stream: seed' = AES-128(parent seed as key, id block).
    /// Throws Error{ForkUnsupported} for tapes.
    BitSource fork(std::uint64_t stream_id) const;

private:
    BitSource(SourceKind kind, const Seed128& seed, const Seed128& key);

    static constexpr std::uint64_t mask(unsigned b) { return (std::uint64_t{1} << b) - 1u; }
    std::uint32_t draw_slow(unsigned b);

    SourceKind kind_;
    Seed128 seed_;
    Seed128 key_;
    std::uint32_t lcg_state_ = 0;
    std::optional<AesChain> aes_;
    const Tape* tape_ = nullptr;
    std::size_t tape_pos_ = 0;
    std::uint64_t queue_ = 0;
    unsigned queued_ = 0;
    std::uint64_t consumed_ = 0;
};

/// One step of the MSVC-compatible rand() recurrence; returns the 15-bit word.
inline std::uint32_t msvc_lcg_step(std::uint32_t& state) {
    state = state * 214013u + 2531011u;
    return (state >> 16) & 0x7FFFu;
}

} // namespace permverify
