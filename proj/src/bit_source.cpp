// SPDX-License-Identifier: Apache-2.0

#include "permverify/bit_source.hpp"

#include "permverify/error.hpp"

#include <openssl/evp.h>

#include <bit>
#include <cstring>

namespace permverify {

namespace {

int hex_value(char c) {
    if (c >= '0' && c <= '9') return c - '0';
    if (c >= 'a' && c <= 'f') return c - 'a' + 10;
    if (c >= 'A' && c <= 'F') return c - 'A' + 10;
    return -1;
}

struct CtxDeleter {
    void operator()(EVP_CIPHER_CTX* c) const noexcept { EVP_CIPHER_CTX_free(c); }
};
using CtxPtr = std::unique_ptr<EVP_CIPHER_CTX, CtxDeleter>;

CtxPtr new_ctx() {
    CtxPtr ctx(EVP_CIPHER_CTX_new());
    if (!ctx) throw Error(ErrorCode::Io, "EVP_CIPHER_CTX_new failed");
    return ctx;
}

} // namespace

Seed128 Seed128::from_hex(std::string_view hex) {
    if (hex.size() != 32) {
        throw Error(ErrorCode::InvalidArgument, "seed must be 32 hex characters");
    }
    Seed128 s;
    for (std::size_t i = 0; i < 16; ++i) {
        const int hi = hex_value(hex[2 * i]);
        const int lo = hex_value(hex[2 * i + 1]);
        if (hi < 0 || lo < 0) throw Error(ErrorCode::InvalidArgument, "seed is not hex");
        s.bytes[i] = static_cast<std::uint8_t>(hi * 16 + lo);
    }
    return s;
}

Seed128 Seed128::from_u64(std::uint64_t low) {
    Seed128 s;
    for (std::size_t i = 0; i < 8; ++i) s.bytes[15 - i] = static_cast<std::uint8_t>(low >> (8 * i));
    return s;
}

std::string Seed128::to_hex() const {
    static constexpr char digits[] = "0123456789abcdef";
    std::string out;
    out.reserve(32);
    for (const auto b : bytes) {
        out += digits[b >> 4];
        out += digits[b & 15];
    }
    return out;
}

std::string_view to_string(SourceKind kind) noexcept {
    switch (kind) {
    case SourceKind::lcg_msvc: return "lcg-msvc";
    case SourceKind::aes128: return "aes128";
    case SourceKind::ideal: return "ideal";
    case SourceKind::tape: return "tape";
    }
    return "?";
}

SourceKind parse_source_kind(std::string_view name) {
    if (name == "lcg-msvc") return SourceKind::lcg_msvc;
    if (name == "aes128") return SourceKind::aes128;
    if (name == "ideal") return SourceKind::ideal;
    if (name == "tape") return SourceKind::tape;
    throw Error(ErrorCode::InvalidArgument, "unknown rng kind '" + std::string(name) + "'");
}

Seed128 default_aes_key() {
    Seed128 k;
    for (std::size_t i = 0; i < 16; ++i) k.bytes[i] = static_cast<std::uint8_t>(i);
    return k;
}

Seed128 aes128_encrypt(const Seed128& key, const Seed128& block) {
    auto ctx = new_ctx();
    Seed128 out;
    int len = 0;
    if (EVP_EncryptInit_ex(ctx.get(), EVP_aes_128_ecb(), nullptr, key.bytes.data(), nullptr) != 1 ||
        EVP_CIPHER_CTX_set_padding(ctx.get(), 0) != 1 ||
        EVP_EncryptUpdate(ctx.get(), out.bytes.data(), &len, block.bytes.data(), 16) != 1 ||
        len != 16) {
        throw Error(ErrorCode::Io, "AES-128 block encryption failed");
    }
    return out;
}

// ---------------------------------------------------------------------------

struct AesChain::Ctx {
    CtxPtr evp;
};

AesChain::AesChain(const Seed128& key, const Seed128& initial_state)
    : ctx_(std::make_unique<Ctx>(Ctx{new_ctx()})) {
    if (EVP_EncryptInit_ex(ctx_->evp.get(), EVP_aes_128_ofb(), nullptr, key.bytes.data(),
                           initial_state.bytes.data()) != 1) {
        throw Error(ErrorCode::Io, "AES-128-OFB init failed");
    }
}

AesChain::AesChain(const AesChain& other)
    : ctx_(std::make_unique<Ctx>(Ctx{new_ctx()})), buffer_(other.buffer_), pos_(other.pos_) {
    if (EVP_CIPHER_CTX_copy(ctx_->evp.get(), other.ctx_->evp.get()) != 1) {
        throw Error(ErrorCode::Io, "EVP_CIPHER_CTX_copy failed");
    }
}

AesChain& AesChain::operator=(const AesChain& other) {
    if (this != &other) {
        AesChain tmp(other);
        *this = std::move(tmp);
    }
    return *this;
}

AesChain::AesChain(AesChain&&) noexcept = default;
AesChain& AesChain::operator=(AesChain&&) noexcept = default;
AesChain::~AesChain() = default;

void AesChain::refill() {
    static const std::array<std::uint8_t, 1024> zeros{};
    int len = 0;
    if (EVP_EncryptUpdate(ctx_->evp.get(), buffer_.data(), &len, zeros.data(),
                          static_cast<int>(zeros.size())) != 1 ||
        len != static_cast<int>(buffer_.size())) {
        throw Error(ErrorCode::Io, "AES-128-OFB keystream failed");
    }
    pos_ = 0;
}

// ---------------------------------------------------------------------------

Tape::Tape(unsigned bits, std::size_t length) : bits_(bits), values_(length, 0) {
    if (bits < 1 || bits > 32) throw Error(ErrorCode::InvalidArgument, "tape width must be 1..32");
    if (length == 0) throw Error(ErrorCode::InvalidArgument, "tape length must be positive");
}

bool Tape::advance() {
    if (exhausted_) return false;
    const std::uint64_t limit = std::uint64_t{1} << bits_;
    for (std::size_t i = values_.size(); i-- > 0;) {
        if (values_[i] + std::uint64_t{1} < limit) {
            ++values_[i];
            return true;
        }
        values_[i] = 0;
    }
    exhausted_ = true;
    return false;
}

// ---------------------------------------------------------------------------

BitSource::BitSource(SourceKind kind, const Seed128& seed, const Seed128& key)
    : kind_(kind), seed_(seed), key_(key) {
    switch (kind) {
    case SourceKind::lcg_msvc:
        lcg_state_ = (std::uint32_t{seed.bytes[12]} << 24) | (std::uint32_t{seed.bytes[13]} << 16) |
                     (std::uint32_t{seed.bytes[14]} << 8) | std::uint32_t{seed.bytes[15]};
        break;
    case SourceKind::aes128:
    case SourceKind::ideal:
        aes_.emplace(key, seed);
        break;
    case SourceKind::tape:
        break;
    }
}

BitSource BitSource::lcg_msvc(const Seed128& seed) {
    return BitSource(SourceKind::lcg_msvc, seed, default_aes_key());
}

BitSource BitSource::aes128(const Seed128& seed, const Seed128& key) {
    return BitSource(SourceKind::aes128, seed, key);
}

BitSource BitSource::ideal(const Seed128& seed, const Seed128& key) {
    return BitSource(SourceKind::ideal, seed, key);
}

BitSource BitSource::from_tape(const Tape& tape) {
    BitSource s(SourceKind::tape, Seed128{}, default_aes_key());
    s.tape_ = &tape;
    return s;
}

BitSource BitSource::make(SourceKind kind, const Seed128& seed) {
    if (kind == SourceKind::tape) {
        throw Error(ErrorCode::InvalidArgument, "tape sources are built from a Tape");
    }
    return BitSource(kind, seed, default_aes_key());
}

std::uint32_t BitSource::draw_slow(unsigned b) {
    if (b < 1 || b > 32) throw Error(ErrorCode::InvalidArgument, "draw width must be 1..32");
    switch (kind_) {
    case SourceKind::tape:
        if (tape_->exhausted() || tape_pos_ >= tape_->length()) {
            throw Error(ErrorCode::TapeExhausted, "tape has no draws left");
        }
        if (b != tape_->bits()) {
            throw Error(ErrorCode::IncompatibleSource, "draw width differs from tape width");
        }
        return tape_->values()[tape_pos_++];
    case SourceKind::lcg_msvc:
        while (queued_ < b) {
            queue_ = (queue_ << 15) | msvc_lcg_step(lcg_state_);
            queued_ += 15;
        }
        break;
    case SourceKind::aes128:
    case SourceKind::ideal:
        while (queued_ < b) {
            queue_ = (queue_ << 32) | aes_->next_word();
            queued_ += 32;
        }
        break;
    }
    queued_ -= b;
    return static_cast<std::uint32_t>((queue_ >> queued_) & mask(b));
}

std::uint32_t BitSource::draw_in_range_ideal(std::uint32_t j) {
    if (kind_ != SourceKind::ideal) {
        throw Error(ErrorCode::IncompatibleSource, "rejection sampling needs the ideal kind");
    }
    if (j == 0) throw Error(ErrorCode::InvalidArgument, "range bound must be positive");
    if (j == 1) return 0;
    const auto width = static_cast<unsigned>(std::bit_width(j - 1));
    for (;;) {
        const std::uint32_t r = draw_bits(width);
        if (r < j) return r;
    }
}

BitSource BitSource::fork(std::uint64_t stream_id) const {
    if (kind_ == SourceKind::tape) {
        throw Error(ErrorCode::ForkUnsupported, "tape sources cannot be forked");
    }
    const Seed128 child = aes128_encrypt(seed_, Seed128::from_u64(stream_id));
    return BitSource(kind_, child, key_);
}

} // namespace permverify
