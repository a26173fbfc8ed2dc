// SPDX-License-Identifier: Apache-2.0

#pragma once

#include "permverify/bit_source.hpp"
#include "permverify/permutation.hpp"
#include "permverify/shuffle.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace permverify {

/// Input positions a < b and output values c < d.
struct CaseKey {
    std::uint8_t a = 0, b = 1, c = 0, d = 1;
    friend bool operator==(const CaseKey&, const CaseKey&) = default;
};

/// Trials n (permutations with {f(a), f(b)} = {c, d}) and successes x
/// (those with f(a) = c, i.e. the smaller position takes the smaller value).
struct CaseCounters {
    std::uint64_t n = 0;
    std::uint64_t x = 0;
};

inline std::uint64_t pair_count(std::size_t n) { return n * (n - 1) / 2; }
inline std::uint64_t case_count(std::size_t n) { return pair_count(n) * pair_count(n); }

/// Index of (lo, hi), lo < hi, among all such pairs in lexicographic order.
std::uint64_t pair_index(std::size_t lo, std::size_t hi, std::size_t n);
/// case index = pair_index(a, b) * pair_count(n) + pair_index(c, d).
std::uint64_t case_index(const CaseKey& key, std::size_t n);
CaseKey case_key(std::uint64_t index, std::size_t n);

inline constexpr std::uint64_t kMaxPermutationsPerRun = std::uint64_t{1} << 31;

/// Dense counter table for every (input pair, ordered output pair).
///
/// Row r = pair_index(a, b) holds N*N 32-bit cells; cell u*N+v counts
/// permutations with f(a) = u and f(b) = v. A case's success count is
/// cell (c, d) and its trial count is cell (c, d) + cell (d, c), so each
/// permutation costs exactly N(N-1)/2 increments.
class CaseTable {
public:
    explicit CaseTable(std::size_t n);

    std::size_t n() const noexcept { return n_; }
    std::uint64_t permutations() const noexcept { return permutations_; }

    /// Restricts accumulation to the input pairs flagged in `rows`
    /// (size pair_count(n)). Cases of other pairs stay at zero.
    void restrict_rows(std::vector<std::uint8_t> rows);

    /// Throws Error{DimensionMismatch} on a size mismatch and
    /// Error{CounterOverflow} past 2^31 permutations.
    void accumulate(std::span<const std::uint8_t> perm);
    void accumulate(const Permutation& p) { accumulate(p.mapping()); }
    /// `rows` holds consecutive permutations of n bytes each.
    void accumulate_rows(std::span<const std::uint8_t> rows);

    void merge(const CaseTable& other);

    CaseCounters counters(const CaseKey& key) const;
    CaseCounters counters(std::uint64_t case_idx) const;

    /// Number of increments one permutation causes.
    std::uint64_t updates_per_permutation() const noexcept { return pair_count(n_); }

    friend bool operator==(const CaseTable&, const CaseTable&) = default;

private:
    void add_one(const std::uint8_t* p);

    std::size_t n_;
    std::uint64_t permutations_ = 0;
    std::vector<std::uint32_t> cells_;
    std::vector<std::uint8_t> rows_; // empty: all rows
};

inline constexpr std::uint64_t kDefaultMinTrials = 30;

/// Standardised deviation (x - n/2) / sqrt(n/4).
double case_z(const CaseCounters& c);

/// Phi((x - n/2) / sqrt(n/4)), the normal approximation to P(X <= x) under
/// Binomial(n, 1/2), without continuity correction. Throws
/// Error{BelowMinimumTrials} when n < n_min.
double case_tail_probability(const CaseCounters& c, std::uint64_t n_min = kDefaultMinTrials);

/// A confidence level. `tail` = 1 - alpha is kept separately so that levels
/// such as 1 - 10^-11 keep full precision.
struct AlphaLevel {
    double alpha = 0.95;
    double tail = 0.05;
};

/// The sixteen levels 0.55, 0.60, 0.70, 0.80, 0.90, 0.95, 0.99, 1 - 10^-3 ... 1 - 10^-11.
std::vector<AlphaLevel> default_alpha_levels();
/// One alpha per line; blank lines ignored. Levels must be strictly
/// increasing inside (0.5, 1). Throws Error{InvalidArgument}.
std::vector<AlphaLevel> parse_alpha_levels(const std::string& text);

struct RatioRow {
    std::size_t index = 0; // 1-based
    AlphaLevel level;
    double expected = 0;   // EN = 2 (1 - alpha) * usable cases
    std::uint64_t observed = 0; // ON
    /// log2(ON / EN); -infinity when ON = 0.
    double log2_ratio = 0;
};

struct ChiSquareSummary {
    double q = 0;
    std::uint64_t dof = 0;
    double tail = 1; // P(chi2_dof >= q)
};

/// Restricts reports to a subset of case indices (sorted). Empty: all cases.
using CaseSubset = std::vector<std::uint64_t>;

struct CaseUsage {
    std::uint64_t considered = 0;
    std::uint64_t used = 0;
    std::uint64_t skipped = 0;
};

CaseUsage case_usage(const CaseTable& table, const CaseSubset& subset = {},
                     std::uint64_t n_min = kDefaultMinTrials);

/// ON counts usable cases whose deviation is significant in either tail:
/// min(Phi(z), 1 - Phi(z)) < 1 - alpha. Levels must be increasing.
std::vector<RatioRow> ratio_report(const CaseTable& table, const std::vector<AlphaLevel>& levels,
                                   const CaseSubset& subset = {},
                                   std::uint64_t n_min = kDefaultMinTrials);

/// Q = sum of z^2 over usable cases, dof = number of usable cases. Throws
/// Error{NoUsableCases}.
ChiSquareSummary chi2_report(const CaseTable& table, const CaseSubset& subset = {},
                             std::uint64_t n_min = kDefaultMinTrials);

/// ceil(C / factor) distinct case indices out of [0, C), chosen by a partial
/// Fisher-Yates driven by an ideal source seeded with `seed`, returned
/// sorted. factor must be a power of two; factor 1 returns every index.
/// Throws Error{SubsetTooSmall} below 100 cases.
CaseSubset reduce_cases(std::uint64_t total_cases, std::uint64_t factor, const Seed128& seed);

struct RunMetadata {
    ShuffleSpec spec;
    SourceKind rng = SourceKind::aes128;
    Seed128 seed;
    std::uint64_t count = 0;
    std::uint64_t reduce = 1;
};

struct EstimatorReport {
    RunMetadata meta;
    std::uint64_t total_cases = 0; // full or reduced case-set size
    std::uint64_t used_cases = 0;
    std::uint64_t skipped_cases = 0;
    std::uint64_t updates_per_permutation = 0;
    std::vector<RatioRow> rows;
    ChiSquareSummary chi2;

    /// Bias verdict: chi-square tail probability below 0.05.
    bool biased() const noexcept { return chi2.tail < 0.05; }
};

/// Builds both reports from a filled table.
EstimatorReport make_report(const CaseTable& table, const RunMetadata& meta,
                            const std::vector<AlphaLevel>& levels, const CaseSubset& subset = {});

/// Flags the input pairs touched by a subset (size pair_count(n)).
std::vector<std::uint8_t> rows_of(const CaseSubset& subset, std::size_t n);

struct PipelineOptions {
    std::vector<AlphaLevel> levels = default_alpha_levels();
    std::uint64_t reduce = 1;
    std::size_t threads = 1;
};

/// Generation fused with accumulation over the canonical chunked stream
/// (see `generate_chunk`); raw permutations are never stored. The result is
/// independent of the thread count.
CaseTable accumulate_stream(const ShuffleSpec& spec, const BitSource& root, std::uint64_t count,
                            std::size_t threads, const std::vector<std::uint8_t>& rows = {});

EstimatorReport run_pipeline(const ShuffleSpec& spec, const BitSource& root, std::uint64_t count,
                             const PipelineOptions& options = {});

/// CSV with columns alpha_index, alpha, EN, ON, log2_ratio.
std::string to_csv(const EstimatorReport& report);
/// Full metadata plus chi-square summary and rows.
std::string to_json(const EstimatorReport& report);

} // namespace permverify
