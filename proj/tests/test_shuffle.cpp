// SPDX-License-Identifier: Apache-2.0

#include "oracles.hpp"

#include "permverify/error.hpp"
#include "permverify/shuffle.hpp"

#include <doctest.h>

#include <set>

using namespace permverify;

namespace {

oracle::Mapping as_mapping(const Permutation& p) {
    return oracle::Mapping(p.mapping().begin(), p.mapping().end());
}

} // namespace

TEST_CASE("algorithm names") {
    for (const auto a : {Algorithm::fy_ideal, Algorithm::fy_mod, Algorithm::fy_float,
                         Algorithm::fy_muldiv, Algorithm::naive, Algorithm::sattolo}) {
        CHECK(parse_algorithm(to_string(a)) == a);
    }
    CHECK(to_string(Algorithm::fy_muldiv) == "fy-muldiv");
    CHECK_THROWS_AS(parse_algorithm("durstenfeld"), Error);
}

TEST_CASE("shuffle parameter validation") {
    CHECK_NOTHROW(ShuffleSpec{Algorithm::fy_mod, 2, 1}.check());
    CHECK_NOTHROW(ShuffleSpec{Algorithm::fy_mod, 255, 32}.check());
    CHECK_THROWS_AS((ShuffleSpec{Algorithm::fy_mod, 1, 8}.check()), Error);
    CHECK_THROWS_AS((ShuffleSpec{Algorithm::fy_mod, 256, 8}.check()), Error);
    CHECK_THROWS_AS((ShuffleSpec{Algorithm::fy_mod, 8, 0}.check()), Error);
    CHECK_THROWS_AS((ShuffleSpec{Algorithm::fy_mod, 8, 33}.check()), Error);
}

TEST_CASE("fy-ideal on two indices") {
    // With one ideal bit: k = 0 swaps X0 and X1, k = 1 leaves the identity.
    int swapped = 0, identity = 0;
    auto src = BitSource::ideal(Seed128::from_u64(2));
    for (int i = 0; i < 1000; ++i) {
        auto probe = src;
        const auto k = probe.draw_in_range_ideal(2);
        const auto p = shuffle({Algorithm::fy_ideal, 2, 16}, src);
        if (k == 0) {
            CHECK(p[0] == 1);
            ++swapped;
        } else {
            CHECK(p == Permutation::identity(2));
            ++identity;
        }
    }
    CHECK(swapped > 400);
    CHECK(identity > 400);

    auto aes = BitSource::aes128(Seed128::from_u64(2));
    CHECK_THROWS_AS(shuffle({Algorithm::fy_ideal, 4, 16}, aes), Error);
}

TEST_CASE("shuffles match the textbook reference on every tape") {
    for (const char* name : {"fy-mod", "fy-float", "fy-muldiv", "naive", "sattolo"}) {
        for (const auto [n, bits] : {std::pair{3, 3}, std::pair{4, 3}, std::pair{5, 2}}) {
            const ShuffleSpec spec{parse_algorithm(name), static_cast<std::size_t>(n),
                                   static_cast<unsigned>(bits)};
            Tape tape(bits, n - 1);
            do {
                auto src = BitSource::from_tape(tape);
                const auto p = shuffle(spec, src);
                const std::vector<std::uint64_t> draws(tape.values().begin(), tape.values().end());
                REQUIRE(as_mapping(p) == oracle::textbook_shuffle(name, n, bits, draws));
            } while (tape.advance());
        }
    }
}

TEST_CASE("fy-float and fy-muldiv agree") {
    auto a = BitSource::aes128(Seed128::from_u64(17));
    auto b = BitSource::aes128(Seed128::from_u64(17));
    for (const unsigned bits : {4u, 11u, 16u, 24u, 32u}) {
        for (int i = 0; i < 2000; ++i) {
            REQUIRE(shuffle({Algorithm::fy_float, 40, bits}, a) ==
                    shuffle({Algorithm::fy_muldiv, 40, bits}, b));
        }
    }
}

TEST_CASE("sattolo outputs are cycles") {
    auto src = BitSource::aes128(Seed128::from_u64(4));
    for (std::size_t n = 2; n <= 64; ++n) {
        for (int i = 0; i < 50; ++i) REQUIRE(is_cyclic(shuffle({Algorithm::sattolo, n, 16}, src)));
    }
}

TEST_CASE("every output is a bijection") {
    auto src = BitSource::lcg_msvc(Seed128::from_u64(8));
    for (const auto algo : {Algorithm::fy_mod, Algorithm::fy_muldiv, Algorithm::naive}) {
        for (int i = 0; i < 500; ++i) {
            const auto p = shuffle({algo, 255, 8}, src);
            REQUIRE(oracle::is_bijection(as_mapping(p)));
        }
    }
}

TEST_CASE("fy-mod modulo bias on one step") {
    // N=3 with 8-bit draws: the first step computes k = r mod 3 and 86 of 256
    // values of r give k = 0.
    int zero = 0;
    Tape tape(8, 2);
    do {
        zero += tape.values()[0] % 3 == 0;
    } while (tape.advance());
    CHECK(zero == 86 * 256);
}

TEST_CASE("streams and chunks") {
    const ShuffleSpec spec{Algorithm::fy_mod, 10, 16};
    auto s1 = BitSource::aes128(Seed128::from_u64(1));
    auto s2 = BitSource::aes128(Seed128::from_u64(1));
    CHECK(generate_stream(spec, s1, 100) == generate_stream(spec, s2, 100));
    CHECK_THROWS_AS(generate_stream(spec, s1, 0), Error);

    CHECK(chunk_count(1) == 1);
    CHECK(chunk_count(kChunkSize) == 1);
    CHECK(chunk_count(kChunkSize + 1) == 2);

    // Chunk c is the plain stream of root.fork(c), truncated to the total.
    const auto root = BitSource::aes128(Seed128::from_u64(3));
    const std::uint64_t total = kChunkSize + 10;
    std::vector<std::uint8_t> rows;
    CHECK(generate_chunk(spec, root, 1, total, rows) == 10);
    CHECK(rows.size() == 100);
    auto forked = root.fork(1);
    const auto expect = generate_stream(spec, forked, 10);
    for (std::size_t r = 0; r < 10; ++r) {
        CHECK(std::equal(expect[r].mapping().begin(), expect[r].mapping().end(),
                         rows.begin() + r * 10));
    }
    CHECK(generate_chunk(spec, root, 0, total, rows) == kChunkSize);
}
