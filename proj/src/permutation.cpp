// SPDX-License-Identifier: Apache-2.0

#include "permverify/permutation.hpp"

#include "permverify/error.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

namespace permverify {

namespace {

template <typename T>
Permutation validate_impl(std::span<const T> mapping) {
    const std::size_t n = mapping.size();
    if (n < kMinIndices || n > kMaxIndices) {
        throw Error(ErrorCode::OutOfRange,
                    "permutation length " + std::to_string(n) + " outside [2,255]");
    }
    std::vector<bool> seen(n, false);
    std::vector<std::uint8_t> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto v = static_cast<std::size_t>(mapping[i]);
        if (v >= n) {
            throw Error(ErrorCode::OutOfRange, "entry " + std::to_string(i) + " = " +
                                                   std::to_string(v) + " not below " +
                                                   std::to_string(n));
        }
        if (seen[v]) {
            throw Error(ErrorCode::DuplicateIndex, "value " + std::to_string(v) + " repeats");
        }
        seen[v] = true;
        out[i] = static_cast<std::uint8_t>(v);
    }
    return Permutation::from_trusted(std::move(out));
}

} // namespace

Permutation Permutation::identity(std::size_t n) {
    if (n < kMinIndices || n > kMaxIndices) {
        throw Error(ErrorCode::OutOfRange, "identity size outside [2,255]");
    }
    std::vector<std::uint8_t> m(n);
    std::iota(m.begin(), m.end(), std::uint8_t{0});
    return Permutation(std::move(m));
}

Permutation validate(std::span<const unsigned> mapping) { return validate_impl(mapping); }
Permutation validate(std::span<const std::uint8_t> mapping) { return validate_impl(mapping); }

Permutation compose(const Permutation& p, const Permutation& q) {
    if (p.size() != q.size()) {
        throw Error(ErrorCode::DimensionMismatch, "compose of different sizes");
    }
    std::vector<std::uint8_t> m(p.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = p[q[i]];
    return Permutation::from_trusted(std::move(m));
}

Permutation inverse(const Permutation& p) {
    std::vector<std::uint8_t> m(p.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[p[i]] = static_cast<std::uint8_t>(i);
    return Permutation::from_trusted(std::move(m));
}

std::vector<std::size_t> cycle_lengths(const Permutation& p) {
    std::vector<std::size_t> lengths;
    std::vector<bool> visited(p.size(), false);
    for (std::size_t start = 0; start < p.size(); ++start) {
        if (visited[start]) continue;
        std::size_t len = 0;
        for (std::size_t i = start; !visited[i]; i = p[i]) {
            visited[i] = true;
            ++len;
        }
        lengths.push_back(len);
    }
    return lengths;
}

bool is_cyclic(const Permutation& p) {
    std::size_t len = 1;
    for (std::size_t i = p[0]; i != 0; i = p[i]) ++len;
    return len == p.size();
}

Parity parity(const Permutation& p) {
    const std::size_t cycles = cycle_lengths(p).size();
    return (p.size() - cycles) % 2 == 0 ? Parity::even : Parity::odd;
}

std::uint64_t factorial(std::size_t n) {
    if (n > 20) throw Error(ErrorCode::FactorialTooLarge, std::to_string(n) + "! overflows");
    std::uint64_t f = 1;
    for (std::size_t i = 2; i <= n; ++i) f *= i;
    return f;
}

std::uint64_t lehmer_rank(std::span<const std::uint8_t> mapping) {
    const std::size_t n = mapping.size();
    if (n > 20) throw Error(ErrorCode::FactorialTooLarge, "rank needs N <= 20");
    std::uint64_t rank = 0;
    std::uint32_t used = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const std::uint32_t below = mapping[i] == 0 ? 0 : (~used & ((1u << mapping[i]) - 1u));
        rank = rank * (n - i) + static_cast<std::uint64_t>(__builtin_popcount(below));
        used |= 1u << mapping[i];
    }
    return rank;
}

Permutation lehmer_unrank(std::uint64_t rank, std::size_t n) {
    if (rank >= factorial(n)) throw Error(ErrorCode::OutOfRange, "rank exceeds N!");
    std::vector<std::uint8_t> digits(n);
    for (std::size_t i = n; i-- > 0;) {
        const std::uint64_t base = n - i;
        digits[i] = static_cast<std::uint8_t>(rank % base);
        rank /= base;
    }
    std::vector<std::uint8_t> avail(n);
    std::iota(avail.begin(), avail.end(), std::uint8_t{0});
    std::vector<std::uint8_t> m(n);
    for (std::size_t i = 0; i < n; ++i) {
        m[i] = avail[digits[i]];
        avail.erase(avail.begin() + digits[i]);
    }
    return Permutation::from_trusted(std::move(m));
}

std::string to_string(const Permutation& p) {
    std::string s = "[";
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(p[i]);
    }
    return s + "]";
}

std::uint64_t falling_factorial(std::size_t n, std::size_t k) {
    std::uint64_t r = 1;
    for (std::size_t i = 0; i < k; ++i) {
        if (n < i) return 0;
        const std::uint64_t f = n - i;
        if (r > std::numeric_limits<std::uint64_t>::max() / f) {
            return std::numeric_limits<std::uint64_t>::max();
        }
        r *= f;
    }
    return r;
}

std::uint64_t tuple_rank(std::span<const std::uint8_t> tuple, std::size_t n) {
    const std::size_t k = tuple.size();
    std::vector<bool> used(n, false);
    std::uint64_t rank = 0;
    for (std::size_t i = 0; i < k; ++i) {
        std::uint64_t smaller = 0;
        for (std::size_t v = 0; v < tuple[i]; ++v) smaller += used[v] ? 0 : 1;
        rank += smaller * falling_factorial(n - i - 1, k - i - 1);
        used[tuple[i]] = true;
    }
    return rank;
}

std::vector<std::uint8_t> tuple_unrank(std::uint64_t rank, std::size_t n, std::size_t k) {
    std::vector<bool> used(n, false);
    std::vector<std::uint8_t> tuple(k);
    for (std::size_t i = 0; i < k; ++i) {
        const std::uint64_t block = falling_factorial(n - i - 1, k - i - 1);
        std::uint64_t digit = rank / block;
        rank %= block;
        for (std::size_t v = 0; v < n; ++v) {
            if (used[v]) continue;
            if (digit-- == 0) {
                tuple[i] = static_cast<std::uint8_t>(v);
                used[v] = true;
                break;
            }
        }
    }
    return tuple;
}

LiftedPermutation lift(const Permutation& p, std::size_t k) {
    const std::size_t n = p.size();
    if (k < 1 || k > n) throw Error(ErrorCode::OutOfRange, "lift order must be in [1,N]");
    const std::uint64_t tuples = falling_factorial(n, k);
    if (tuples > kMaxLiftTuples) {
        throw Error(ErrorCode::TupleSpaceTooLarge,
                    std::to_string(tuples) + " tuples exceeds the lift limit");
    }
    std::vector<std::uint32_t> mapping(tuples);
    std::vector<std::uint8_t> image(k);
    for (std::uint64_t r = 0; r < tuples; ++r) {
        const auto tuple = tuple_unrank(r, n, k);
        for (std::size_t i = 0; i < k; ++i) image[i] = p[tuple[i]];
        mapping[r] = static_cast<std::uint32_t>(tuple_rank(image, n));
    }
    return LiftedPermutation(n, k, std::move(mapping));
}

LiftedPermutation compose(const LiftedPermutation& p, const LiftedPermutation& q) {
    if (p.n_ != q.n_ || p.k_ != q.k_) {
        throw Error(ErrorCode::DimensionMismatch, "compose of different lifts");
    }
    std::vector<std::uint32_t> m(p.size());
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = p[q[i]];
    return LiftedPermutation(p.n_, p.k_, std::move(m));
}

void PermMultiset::add(const Permutation& p, std::uint64_t multiplicity) {
    if (p.size() != n_) throw Error(ErrorCode::DimensionMismatch, "multiset size mismatch");
    if (multiplicity == 0) return;
    counts_[p] += multiplicity;
    total_ += multiplicity;
}

std::uint64_t PermMultiset::count(const Permutation& p) const {
    const auto it = counts_.find(p);
    return it == counts_.end() ? 0 : it->second;
}

} // namespace permverify
