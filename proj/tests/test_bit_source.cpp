// SPDX-License-Identifier: Apache-2.0

#include "oracles.hpp"

#include "permverify/bit_source.hpp"
#include "permverify/error.hpp"

#include <doctest.h>

#include <map>
#include <set>

using namespace permverify;

namespace {

Seed128 hex(const char* h) { return Seed128::from_hex(h); }

std::string draw_hex128(BitSource& src) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (int i = 0; i < 32; ++i) out += digits[src.draw_bits(4)];
    return out;
}

} // namespace

TEST_CASE("seed parsing") {
    const auto s = hex("000102030405060708090a0b0c0d0e0f");
    CHECK(s.bytes[0] == 0x00);
    CHECK(s.bytes[15] == 0x0f);
    CHECK(s.to_hex() == "000102030405060708090a0b0c0d0e0f");
    CHECK(Seed128::from_u64(1).bytes[15] == 1);
    CHECK_THROWS_AS(hex("abc"), Error);
    CHECK_THROWS_AS(hex("zz0102030405060708090a0b0c0d0e0f"), Error);
    CHECK(parse_source_kind("lcg-msvc") == SourceKind::lcg_msvc);
    CHECK(to_string(SourceKind::aes128) == "aes128");
    CHECK_THROWS_AS(parse_source_kind("mt19937"), Error);
}

TEST_CASE("lcg-msvc matches the reference recurrence") {
    auto src = BitSource::lcg_msvc(Seed128::from_u64(1));
    CHECK(src.draw_bits(15) == 41);

    const auto ref = oracle::msvc_rand(12345, 64);
    auto lcg = BitSource::lcg_msvc(Seed128::from_u64(12345));
    for (const auto w : ref) CHECK(lcg.draw_bits(15) == w);

    // Big-endian bit queue: three 10-bit draws take the first 30 bits of the
    // concatenated 15-bit words.
    auto q = BitSource::lcg_msvc(Seed128::from_u64(12345));
    const std::uint32_t joined = (ref[0] << 15) | ref[1];
    CHECK(q.draw_bits(10) == (joined >> 20));
    CHECK(q.draw_bits(10) == ((joined >> 10) & 0x3FF));
    CHECK(q.draw_bits(10) == (joined & 0x3FF));
    CHECK(q.bits_consumed() == 30);
}

TEST_CASE("aes128 follows the FIPS-197 vector and chains") {
    const auto key = hex("000102030405060708090a0b0c0d0e0f");
    const auto pt = hex("00112233445566778899aabbccddeeff");
    CHECK(aes128_encrypt(key, pt).to_hex() == "69c4e0d86a7b0430d8cdb78070b4c55a");
    CHECK(default_aes_key() == key);

    auto src = BitSource::aes128(pt);
    CHECK(draw_hex128(src) == "69c4e0d86a7b0430d8cdb78070b4c55a");
    const auto second = aes128_encrypt(key, hex("69c4e0d86a7b0430d8cdb78070b4c55a"));
    CHECK(draw_hex128(src) == second.to_hex());

    // A refill boundary must not disturb the chain.
    auto a = BitSource::aes128(pt);
    Seed128 state = pt;
    for (int block = 0; block < 100; ++block) {
        state = aes128_encrypt(key, state);
        CHECK(draw_hex128(a) == state.to_hex());
    }
}

TEST_CASE("draw_bits stays in range and is deterministic") {
    for (const auto kind : {SourceKind::lcg_msvc, SourceKind::aes128, SourceKind::ideal}) {
        auto a = BitSource::make(kind, Seed128::from_u64(99));
        auto b = BitSource::make(kind, Seed128::from_u64(99));
        for (int i = 0; i < 1'000'000; ++i) {
            const unsigned bits = 1 + i % 32;
            const auto va = a.draw_bits(bits);
            REQUIRE(va == b.draw_bits(bits));
            if (bits < 32) REQUIRE(va < (1ull << bits));
        }
    }
}

TEST_CASE("copies are independent") {
    auto a = BitSource::aes128(Seed128::from_u64(5));
    a.draw_bits(7);
    auto b = a;
    const auto va = a.draw_bits(32);
    CHECK(b.draw_bits(32) == va);
}

TEST_CASE("draw_in_range_ideal") {
    auto src = BitSource::ideal(Seed128::from_u64(1));
    for (int i = 0; i < 100; ++i) CHECK(src.draw_in_range_ideal(1) == 0);
    CHECK(src.bits_consumed() == 0);

    for (int i = 0; i < 1000; ++i) {
        const auto before = src.bits_consumed();
        CHECK(src.draw_in_range_ideal(8) < 8);
        CHECK(src.bits_consumed() - before == 3);
    }

    const int draws = 300'000;
    std::array<int, 3> counts{};
    for (int i = 0; i < draws; ++i) ++counts[src.draw_in_range_ideal(3)];
    const double mean = draws / 3.0;
    const double sigma = std::sqrt(draws * (1.0 / 3.0) * (2.0 / 3.0));
    for (const int c : counts) CHECK(std::abs(c - mean) < 3 * sigma);

    auto aes = BitSource::aes128(Seed128::from_u64(1));
    CHECK_THROWS_AS(aes.draw_in_range_ideal(3), Error);
}

TEST_CASE("tape enumeration") {
    Tape tape(2, 1);
    std::vector<std::uint32_t> seen;
    do {
        auto src = BitSource::from_tape(tape);
        seen.push_back(src.draw_bits(2));
        try {
            src.draw_bits(2);
            FAIL("a length-1 tape must be exhausted after one draw");
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::TapeExhausted);
        }
    } while (tape.advance());
    CHECK(seen == std::vector<std::uint32_t>{0, 1, 2, 3});
    CHECK(tape.exhausted());

    Tape wide(5, 4);
    std::set<std::vector<std::uint32_t>> all;
    std::size_t visits = 0;
    do {
        all.emplace(wide.values().begin(), wide.values().end());
        ++visits;
    } while (wide.advance());
    CHECK(visits == (1u << 20));
    CHECK(all.size() == (1u << 20));

    Tape t(3, 2);
    auto src = BitSource::from_tape(t);
    try {
        src.draw_bits(4);
        FAIL("width mismatch must be rejected");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::IncompatibleSource);
    }
}

TEST_CASE("fork") {
    const auto parent_seed = hex("00112233445566778899aabbccddeeff");
    const auto parent = BitSource::aes128(parent_seed);
    const auto child = parent.fork(5);
    Seed128 id{};
    id.bytes[15] = 5;
    CHECK(child.seed() == aes128_encrypt(parent_seed, id));
    CHECK(child.kind() == SourceKind::aes128);

    auto c1 = parent.fork(1);
    auto c2 = parent.fork(2);
    int equal = 0;
    for (int i = 0; i < 64; ++i) equal += c1.draw_bits(32) == c2.draw_bits(32);
    CHECK(equal < 2);

    Tape tape(2, 1);
    try {
        (void)BitSource::from_tape(tape).fork(0);
        FAIL("tape fork must be rejected");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ForkUnsupported);
    }
}
