// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "permverify/permutation.hpp"
#include "permverify/shuffle.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace permverify {

/// An exact output distribution: integer weights over a common denominator.
/// For tape-driven algorithms the weight of f is the number of tapes that
/// produce f and the denominator is 2^(b (N-1)); for fy-ideal it is the
/// number of leaves of the choice tree leading to f, over N!.
///
/// The distribution and order checks below use integer arithmetic only.
struct ExactDistribution {
    PermMultiset weights;

    std::size_t n() const noexcept { return weights.n(); }
    std::uint64_t denominator() const noexcept { return weights.total(); }
};

inline constexpr unsigned kMaxTapeBits = 26;
inline constexpr std::size_t kMaxIdealTreeN = 6;

/// Exhaustive enumeration of every tape (or every fy-ideal choice path).
/// Throws Error{SpaceTooLarge} above 2^26 tapes or N > 6 for fy-ideal.
ExactDistribution exact_distribution(const ShuffleSpec& spec);

struct Rational {
    std::uint64_t num = 0;
    std::uint64_t den = 1;
    friend bool operator==(const Rational&, const Rational&) = default;
};

struct OrderWitness {
    std::vector<std::uint8_t> inputs;  // (a_1..a_k)
    std::vector<std::uint8_t> outputs; // (b_1..b_k)
    Rational conditional;              // P(f(a_k)=b_k | f(a_i)=b_i, i<k), reduced
};

struct OrderCheckResult {
    std::size_t k = 1;
    bool holds = false;
    bool degenerate = false;
    std::optional<OrderWitness> witness;
};

inline constexpr std::uint64_t kMaxOrderCheckSteps = 100'000'000;

/// k-th order check with fiber-multiplicity weighting.
///
/// For every ordered (k-1)-tuple of inputs A and outputs B with
/// P(f(A) = B) > 0 and every x not in A, y not in B, requires
/// (N-k+1) * P(f(A) = B, f(x) = y) == P(f(A) = B). If some conditioning event
/// has probability zero the result is degenerate: holds is false and no
/// witness is reported. Otherwise a failure carries the first offending
/// (A x, B y) in lexicographic order.
///
/// Throws Error{EnumerationTooLarge} past kMaxOrderCheckSteps, and
/// Error{OutOfRange} unless 1 <= k <= N-1.
OrderCheckResult check_order_k(const PermMultiset& dist, std::size_t k);
inline OrderCheckResult check_order_k(const ExactDistribution& dist, std::size_t k) {
    return check_order_k(dist.weights, k);
}

inline constexpr std::size_t kMaxFactorialN = 8;

/// Support is all of S_N with identical weights. N <= 8.
bool check_perfect(const PermMultiset& dist);
inline bool check_perfect(const ExactDistribution& dist) { return check_perfect(dist.weights); }

/// The approximate (N-1)-th order property, in its pairwise form.
///
/// Conditioning on every arrangement of the other N-2 inputs onto the other
/// N-2 outputs is the same event as {f(a), f(b)} = {c, d}. The property
/// therefore reduces to, for every a < b and c < d,
///     P(f(a)=c, f(b)=d) == P(f(a)=d, f(b)=c) > 0,
/// together with P(f(x)=y) > 0 for all x, y. A pair event of probability
/// zero leaves the conditional undefined and counts as a failure. N <= 8.
bool check_approx_order(const PermMultiset& dist);
inline bool check_approx_order(const ExactDistribution& dist) {
    return check_approx_order(dist.weights);
}

/// rho_k applied to every member, keeping multiplicities. Needs
/// N (N-1) ... (N-k+1) <= 255.
PermMultiset lift_multiset(const PermMultiset& dist, std::size_t k);

struct BruteForceReport {
    double q = 0.0;
    std::uint64_t dof = 0;
    double tail = 1.0; // P(chi2_dof >= q)
};

/// Goodness of fit over all N! cells, E = total / N!. N <= 8 and at least
/// five expected samples per cell.
BruteForceReport brute_force_chi2(const PermMultiset& samples);
/// Same, from counts indexed by Lehmer rank (size N!).
BruteForceReport brute_force_chi2(std::span<const std::uint64_t> cell_counts, std::size_t n);

} // namespace permverify
