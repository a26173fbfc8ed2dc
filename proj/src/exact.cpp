// SPDX-License-Identifier: Apache-2.0

#include "permverify/exact.hpp"

#include "permverify/error.hpp"
#include "permverify/stats.hpp"

#include <map>
#include <numeric>
#include <string>
#include <unordered_map>

namespace permverify {

namespace {

// Accumulates weights per permutation; dense by Lehmer rank for small N.
class WeightTable {
public:
    explicit WeightTable(std::size_t n) : n_(n) {
        if (n <= kMaxFactorialN) dense_.assign(factorial(n), 0);
    }

    void add(std::span<const std::uint8_t> p, std::uint64_t w) {
        if (!dense_.empty()) {
            dense_[lehmer_rank(p)] += w;
        } else {
            sparse_[std::string(p.begin(), p.end())] += w;
        }
    }

    PermMultiset finish() const {
        PermMultiset ms(n_);
        for (std::size_t r = 0; r < dense_.size(); ++r) {
            if (dense_[r]) ms.add(lehmer_unrank(r, n_), dense_[r]);
        }
        for (const auto& [key, w] : sparse_) {
            ms.add(Permutation::from_trusted(std::vector<std::uint8_t>(key.begin(), key.end())), w);
        }
        return ms;
    }

private:
    std::size_t n_;
    std::vector<std::uint64_t> dense_;
    std::unordered_map<std::string, std::uint64_t> sparse_;
};

void ideal_tree(std::vector<std::uint8_t>& x, std::size_t j, WeightTable& table) {
    if (j < 2) {
        table.add(x, 1);
        return;
    }
    for (std::size_t k = 0; k < j; ++k) {
        std::swap(x[k], x[j - 1]);
        ideal_tree(x, j - 1, table);
        std::swap(x[k], x[j - 1]);
    }
}

std::uint64_t gcd_u64(std::uint64_t a, std::uint64_t b) { return std::gcd(a, b); }

void require_factorial_n(std::size_t n) {
    if (n > kMaxFactorialN) {
        throw Error(ErrorCode::FactorialTooLarge, "N = " + std::to_string(n) + " exceeds 8");
    }
}

} // namespace

ExactDistribution exact_distribution(const ShuffleSpec& spec) {
    spec.check();
    const std::size_t n = spec.n;
    WeightTable table(n);
    std::vector<std::uint8_t> x(n);
    std::iota(x.begin(), x.end(), std::uint8_t{0});

    if (spec.algo == Algorithm::fy_ideal) {
        if (n > kMaxIdealTreeN) {
            throw Error(ErrorCode::SpaceTooLarge, "fy-ideal choice tree limited to N <= 6");
        }
        ideal_tree(x, n, table);
        return ExactDistribution{table.finish()};
    }

    const std::uint64_t total_bits = std::uint64_t{spec.bits} * (n - 1);
    if (total_bits > kMaxTapeBits) {
        throw Error(ErrorCode::SpaceTooLarge,
                    "2^" + std::to_string(total_bits) + " tapes exceeds 2^26");
    }
    Tape tape(spec.bits, n - 1);
    do {
        BitSource src = BitSource::from_tape(tape);
        shuffle_into(spec, src, x);
        table.add(x, 1);
    } while (tape.advance());
    return ExactDistribution{table.finish()};
}

OrderCheckResult check_order_k(const PermMultiset& dist, std::size_t k) {
    const std::size_t n = dist.n();
    if (k < 1 || k + 1 > n) throw Error(ErrorCode::OutOfRange, "order k must be in [1, N-1]");
    if (dist.empty()) throw Error(ErrorCode::InvalidArgument, "empty distribution");

    const std::size_t cond_len = k - 1;
    const std::uint64_t tuples = falling_factorial(n, cond_len);
    const std::uint64_t free_slots = n - cond_len; // N-k+1
    const long double steps = static_cast<long double>(tuples) *
                              (static_cast<long double>(dist.support_size()) * n +
                               static_cast<long double>(tuples) * free_slots * free_slots);
    if (steps > static_cast<long double>(kMaxOrderCheckSteps)) {
        throw Error(ErrorCode::EnumerationTooLarge, "order check exceeds 10^8 steps");
    }

    struct Cell {
        std::uint64_t cond = 0;
        std::vector<std::uint64_t> joint; // joint[x * n + y]
    };

    OrderCheckResult result;
    result.k = k;
    std::vector<std::uint8_t> image(cond_len);
    for (std::uint64_t a_rank = 0; a_rank < tuples; ++a_rank) {
        const auto a = tuple_unrank(a_rank, n, cond_len);
        std::vector<bool> in_a(n, false);
        for (const auto v : a) in_a[v] = true;

        std::map<std::uint64_t, Cell> cells;
        for (const auto& [perm, w] : dist.entries()) {
            for (std::size_t i = 0; i < cond_len; ++i) image[i] = perm[a[i]];
            Cell& cell = cells[tuple_rank(image, n)];
            if (cell.joint.empty()) cell.joint.assign(n * n, 0);
            cell.cond += w;
            for (std::size_t x = 0; x < n; ++x) {
                if (!in_a[x]) cell.joint[x * n + perm[x]] += w;
            }
        }
        if (cells.size() < tuples) result.degenerate = true;
        if (result.witness) continue;

        for (const auto& [b_rank, cell] : cells) {
            for (std::size_t x = 0; x < n && !result.witness; ++x) {
                if (in_a[x]) continue;
                const auto b = tuple_unrank(b_rank, n, cond_len);
                std::vector<bool> in_b(n, false);
                for (const auto v : b) in_b[v] = true;
                for (std::size_t y = 0; y < n; ++y) {
                    if (in_b[y]) continue;
                    const std::uint64_t joint = cell.joint[x * n + y];
                    if (joint * free_slots == cell.cond) continue;
                    OrderWitness w;
                    w.inputs = a;
                    w.inputs.push_back(static_cast<std::uint8_t>(x));
                    w.outputs = b;
                    w.outputs.push_back(static_cast<std::uint8_t>(y));
                    const std::uint64_t g = gcd_u64(joint, cell.cond);
                    w.conditional = Rational{joint / g, cell.cond / g};
                    result.witness = std::move(w);
                    break;
                }
            }
            if (result.witness) break;
        }
    }
    if (result.degenerate) result.witness.reset();
    result.holds = !result.degenerate && !result.witness;
    return result;
}

bool check_perfect(const PermMultiset& dist) {
    require_factorial_n(dist.n());
    if (dist.support_size() != factorial(dist.n())) return false;
    const std::uint64_t first = dist.entries().begin()->second;
    for (const auto& [perm, w] : dist.entries()) {
        if (w != first) return false;
    }
    return true;
}

bool check_approx_order(const PermMultiset& dist) {
    const std::size_t n = dist.n();
    require_factorial_n(n);
    // pair[((a * n + b) * n + u) * n + v] = weight of f(a)=u, f(b)=v.
    std::vector<std::uint64_t> pair(n * n * n * n, 0);
    std::vector<std::uint64_t> single(n * n, 0);
    for (const auto& [perm, w] : dist.entries()) {
        for (std::size_t a = 0; a < n; ++a) {
            single[a * n + perm[a]] += w;
            for (std::size_t b = a + 1; b < n; ++b) {
                pair[((a * n + b) * n + perm[a]) * n + perm[b]] += w;
            }
        }
    }
    for (const auto s : single) {
        if (s == 0) return false;
    }
    for (std::size_t a = 0; a < n; ++a) {
        for (std::size_t b = a + 1; b < n; ++b) {
            for (std::size_t c = 0; c < n; ++c) {
                for (std::size_t d = c + 1; d < n; ++d) {
                    const std::uint64_t low = pair[((a * n + b) * n + c) * n + d];
                    const std::uint64_t high = pair[((a * n + b) * n + d) * n + c];
                    if (low != high || low == 0) return false;
                }
            }
        }
    }
    return true;
}

PermMultiset lift_multiset(const PermMultiset& dist, std::size_t k) {
    const std::uint64_t size = falling_factorial(dist.n(), k);
    if (size > kMaxIndices) {
        throw Error(ErrorCode::TupleSpaceTooLarge, "lifted permutation exceeds 255 indices");
    }
    PermMultiset out(size);
    for (const auto& [perm, w] : dist.entries()) {
        const auto lifted = lift(perm, k);
        std::vector<std::uint8_t> m(lifted.mapping().begin(), lifted.mapping().end());
        out.add(Permutation::from_trusted(std::move(m)), w);
    }
    return out;
}

BruteForceReport brute_force_chi2(std::span<const std::uint64_t> cell_counts, std::size_t n) {
    require_factorial_n(n);
    const std::uint64_t cells = factorial(n);
    if (cell_counts.size() != cells) {
        throw Error(ErrorCode::DimensionMismatch, "cell count array must have N! entries");
    }
    unsigned __int128 total = 0;
    unsigned __int128 sum_sq = 0;
    for (const auto c : cell_counts) {
        total += c;
        sum_sq += static_cast<unsigned __int128>(c) * c;
    }
    if (total < static_cast<unsigned __int128>(5) * cells) {
        throw Error(ErrorCode::TooFewSamples, "need at least 5 N! samples");
    }
    // Q = sum (O - E)^2 / E with E = total / cells, i.e. (cells * sum O^2 - total^2) / total.
    const unsigned __int128 numer = cells * sum_sq - total * total;
    BruteForceReport r;
    r.q = static_cast<double>(static_cast<long double>(numer) / static_cast<long double>(total));
    r.dof = cells - 1;
    r.tail = stats::chi2_upper_tail(r.q, r.dof);
    return r;
}

BruteForceReport brute_force_chi2(const PermMultiset& samples) {
    const std::size_t n = samples.n();
    require_factorial_n(n);
    std::vector<std::uint64_t> counts(factorial(n), 0);
    for (const auto& [perm, w] : samples.entries()) counts[lehmer_rank(perm.mapping())] += w;
    return brute_force_chi2(counts, n);
}

} // namespace permverify
