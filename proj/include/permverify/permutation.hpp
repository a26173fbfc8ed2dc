// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace permverify {

inline constexpr std::size_t kMinIndices = 2;
inline constexpr std::size_t kMaxIndices = 255;

/// A bijection on Z_N with 2 <= N <= 255. Entry i holds f(i).
///
/// Instances are immutable once built; the only ways to obtain one are
/// `validate`, `Permutation::identity`, and the composition helpers, so a
/// Permutation is always a valid bijection.
class Permutation {
public:
    static Permutation identity(std::size_t n);

    std::size_t size() const noexcept { return mapping_.size(); }
    std::uint8_t operator[](std::size_t i) const noexcept { return mapping_[i]; }
    std::span<const std::uint8_t> mapping() const noexcept { return mapping_; }

    friend auto operator<=>(const Permutation&, const Permutation&) = default;
    friend bool operator==(const Permutation&, const Permutation&) = default;

    // Skips the bijection check. Callers must guarantee validity; used by the
    // shufflers, whose swap loop cannot produce anything else.
    static Permutation from_trusted(std::vector<std::uint8_t> mapping) {
        return Permutation(std::move(mapping));
    }

private:
    explicit Permutation(std::vector<std::uint8_t> mapping) : mapping_(std::move(mapping)) {}

    std::vector<std::uint8_t> mapping_;
};

/// Checks that `mapping` is a bijection on {0..N-1}.
/// Throws Error{OutOfRange} for a bad length or entry, Error{DuplicateIndex}
/// when a value repeats.
Permutation validate(std::span<const unsigned> mapping);
Permutation validate(std::span<const std::uint8_t> mapping);

enum class Parity { even, odd };

/// (p ∘ q)(i) = p(q(i)).
Permutation compose(const Permutation& p, const Permutation& q);
Permutation inverse(const Permutation& p);

/// Lengths of the disjoint cycles, fixed points included, in order of
/// their smallest element.
std::vector<std::size_t> cycle_lengths(const Permutation& p);
bool is_cyclic(const Permutation& p);
Parity parity(const Permutation& p);

/// Lehmer rank in [0, N!) with lexicographic order; N <= 20.
std::uint64_t lehmer_rank(std::span<const std::uint8_t> mapping);
Permutation lehmer_unrank(std::uint64_t rank, std::size_t n);
std::uint64_t factorial(std::size_t n);

std::string to_string(const Permutation& p);

/// Number of ordered k-tuples of distinct indices drawn from n:
/// n (n-1) ... (n-k+1). Saturates at UINT64_MAX.
std::uint64_t falling_factorial(std::size_t n, std::size_t k);

/// Rank of a k-tuple of distinct indices in the lexicographic order of all
/// such tuples over Z_n.
std::uint64_t tuple_rank(std::span<const std::uint8_t> tuple, std::size_t n);
/// Inverse of `tuple_rank`.
std::vector<std::uint8_t> tuple_unrank(std::uint64_t rank, std::size_t n, std::size_t k);

/// The induced permutation f^(k) on the ordered k-tuples of distinct indices,
/// (a1..ak) -> (f(a1)..f(ak)), with tuples numbered lexicographically.
class LiftedPermutation {
public:
    std::size_t base_size() const noexcept { return n_; }
    std::size_t order() const noexcept { return k_; }
    std::size_t size() const noexcept { return mapping_.size(); }
    std::uint32_t operator[](std::size_t i) const noexcept { return mapping_[i]; }
    std::span<const std::uint32_t> mapping() const noexcept { return mapping_; }

    friend bool operator==(const LiftedPermutation&, const LiftedPermutation&) = default;

private:
    friend LiftedPermutation lift(const Permutation&, std::size_t);
    friend LiftedPermutation compose(const LiftedPermutation&, const LiftedPermutation&);
    LiftedPermutation(std::size_t n, std::size_t k, std::vector<std::uint32_t> m)
        : n_(n), k_(k), mapping_(std::move(m)) {}

    std::size_t n_;
    std::size_t k_;
    std::vector<std::uint32_t> mapping_;
};

inline constexpr std::uint64_t kMaxLiftTuples = 10'000'000;

/// rho_k(p). Throws Error{TupleSpaceTooLarge} above kMaxLiftTuples tuples and
/// Error{OutOfRange} unless 1 <= k <= n.
LiftedPermutation lift(const Permutation& p, std::size_t k);
LiftedPermutation compose(const LiftedPermutation& p, const LiftedPermutation& q);

/// A multiset of permutations of equal size, e.g. the image of a select
/// function weighted by fiber size.
class PermMultiset {
public:
    explicit PermMultiset(std::size_t n) : n_(n) {}

    void add(const Permutation& p, std::uint64_t multiplicity = 1);

    std::size_t n() const noexcept { return n_; }
    std::uint64_t total() const noexcept { return total_; }
    std::size_t support_size() const noexcept { return counts_.size(); }
    bool empty() const noexcept { return counts_.empty(); }
    std::uint64_t count(const Permutation& p) const;

    const std::map<Permutation, std::uint64_t>& entries() const noexcept { return counts_; }

private:
    std::size_t n_;
    std::uint64_t total_ = 0;
    std::map<Permutation, std::uint64_t> counts_;
};

} // namespace permverify
