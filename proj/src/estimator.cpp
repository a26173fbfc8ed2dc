// SPDX-License-Identifier: Apache-2.0

#include "permverify/estimator.hpp"

#include "permverify/error.hpp"
#include "permverify/stats.hpp"
#include "permverify/stream.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <unordered_map>

namespace permverify {

std::uint64_t pair_index(std::size_t lo, std::size_t hi, std::size_t n) {
    return lo * (2 * n - lo - 1) / 2 + (hi - lo - 1);
}

std::uint64_t case_index(const CaseKey& key, std::size_t n) {
    if (!(key.a < key.b && key.b < n && key.c < key.d && key.d < n)) {
        throw Error(ErrorCode::OutOfRange, "case key needs a < b and c < d below N");
    }
    return pair_index(key.a, key.b, n) * pair_count(n) + pair_index(key.c, key.d, n);
}

namespace {

std::pair<std::uint8_t, std::uint8_t> unpack_pair(std::uint64_t idx, std::size_t n) {
    std::size_t lo = 0;
    while (idx >= n - lo - 1) {
        idx -= n - lo - 1;
        ++lo;
    }
    return {static_cast<std::uint8_t>(lo), static_cast<std::uint8_t>(lo + 1 + idx)};
}

template <typename Fn>
void for_each_case(const CaseTable& table, const CaseSubset& subset, Fn&& fn) {
    if (subset.empty()) {
        const std::uint64_t total = case_count(table.n());
        for (std::uint64_t i = 0; i < total; ++i) fn(table.counters(i));
    } else {
        for (const auto i : subset) fn(table.counters(i));
    }
}

} // namespace

CaseKey case_key(std::uint64_t index, std::size_t n) {
    const std::uint64_t p = pair_count(n);
    if (index >= p * p) throw Error(ErrorCode::OutOfRange, "case index out of range");
    const auto [a, b] = unpack_pair(index / p, n);
    const auto [c, d] = unpack_pair(index % p, n);
    return CaseKey{a, b, c, d};
}

// ---------------------------------------------------------------------------

CaseTable::CaseTable(std::size_t n) : n_(n) {
    if (n < kMinIndices || n > kMaxIndices) {
        throw Error(ErrorCode::OutOfRange, "case table needs 2 <= N <= 255");
    }
    cells_.assign(pair_count(n) * n * n, 0);
}

void CaseTable::restrict_rows(std::vector<std::uint8_t> rows) {
    if (!rows.empty() && rows.size() != pair_count(n_)) {
        throw Error(ErrorCode::DimensionMismatch, "row mask must have N(N-1)/2 entries");
    }
    rows_ = std::move(rows);
}

void CaseTable::add_one(const std::uint8_t* p) {
    const std::size_t n = n_;
    const std::size_t stride = n * n;
    std::uint32_t* row = cells_.data();
    if (rows_.empty()) {
        for (std::size_t a = 0; a + 1 < n; ++a) {
            std::uint32_t* base = row + std::size_t{p[a]} * n;
            for (std::size_t b = a + 1; b < n; ++b) {
                ++base[p[b]];
                base += stride;
            }
            row += stride * (n - a - 1);
        }
    } else {
        const std::uint8_t* active = rows_.data();
        for (std::size_t a = 0; a + 1 < n; ++a) {
            const std::size_t base = std::size_t{p[a]} * n;
            for (std::size_t b = a + 1; b < n; ++b, ++active, row += stride) {
                if (*active) ++row[base + p[b]];
            }
        }
    }
}

void CaseTable::accumulate(std::span<const std::uint8_t> perm) {
    if (perm.size() != n_) throw Error(ErrorCode::DimensionMismatch, "permutation size != N");
    if (permutations_ >= kMaxPermutationsPerRun) {
        throw Error(ErrorCode::CounterOverflow, "more than 2^31 permutations in one table");
    }
    add_one(perm.data());
    ++permutations_;
}

void CaseTable::accumulate_rows(std::span<const std::uint8_t> rows) {
    if (rows.size() % n_ != 0) throw Error(ErrorCode::DimensionMismatch, "partial permutation row");
    const std::uint64_t count = rows.size() / n_;
    if (permutations_ + count > kMaxPermutationsPerRun) {
        throw Error(ErrorCode::CounterOverflow, "more than 2^31 permutations in one table");
    }
    for (std::uint64_t i = 0; i < count; ++i) add_one(rows.data() + i * n_);
    permutations_ += count;
}

void CaseTable::merge(const CaseTable& other) {
    if (other.n_ != n_) throw Error(ErrorCode::DimensionMismatch, "merging tables of different N");
    if (permutations_ + other.permutations_ > kMaxPermutationsPerRun) {
        throw Error(ErrorCode::CounterOverflow, "more than 2^31 permutations in one table");
    }
    for (std::size_t i = 0; i < cells_.size(); ++i) cells_[i] += other.cells_[i];
    permutations_ += other.permutations_;
}

CaseCounters CaseTable::counters(std::uint64_t case_idx) const {
    const std::uint64_t p = pair_count(n_);
    const std::uint64_t row = case_idx / p;
    const auto [c, d] = unpack_pair(case_idx % p, n_);
    const std::uint32_t* cells = cells_.data() + row * n_ * n_;
    const std::uint64_t low = cells[std::size_t{c} * n_ + d];
    const std::uint64_t high = cells[std::size_t{d} * n_ + c];
    return CaseCounters{low + high, low};
}

CaseCounters CaseTable::counters(const CaseKey& key) const {
    return counters(case_index(key, n_));
}

// ---------------------------------------------------------------------------

double case_z(const CaseCounters& c) {
    const double n = static_cast<double>(c.n);
    return (static_cast<double>(c.x) - 0.5 * n) / std::sqrt(0.25 * n);
}

double case_tail_probability(const CaseCounters& c, std::uint64_t n_min) {
    if (c.n < n_min || c.n == 0) {
        throw Error(ErrorCode::BelowMinimumTrials,
                    std::to_string(c.n) + " trials below minimum " + std::to_string(n_min));
    }
    return stats::normal_cdf(case_z(c));
}

std::vector<AlphaLevel> default_alpha_levels() {
    return {
        {0.55, 0.45},          {0.60, 0.40},          {0.70, 0.30},          {0.80, 0.20},
        {0.90, 0.10},          {0.95, 0.05},          {0.99, 1e-2},          {1 - 1e-3, 1e-3},
        {1 - 1e-4, 1e-4},      {1 - 1e-5, 1e-5},      {1 - 1e-6, 1e-6},      {1 - 1e-7, 1e-7},
        {1 - 1e-8, 1e-8},      {1 - 1e-9, 1e-9},      {1 - 1e-10, 1e-10},    {1 - 1e-11, 1e-11},
    };
}

std::vector<AlphaLevel> parse_alpha_levels(const std::string& text) {
    std::vector<AlphaLevel> levels;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        std::size_t used = 0;
        double alpha = 0;
        try {
            alpha = std::stod(line.substr(first), &used);
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidArgument, "not a number: '" + line + "'");
        }
        if (!(alpha > 0.5 && alpha < 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "alpha must lie in (0.5, 1)");
        }
        if (!levels.empty() && !(alpha > levels.back().alpha)) {
            throw Error(ErrorCode::InvalidArgument, "alpha levels must be strictly increasing");
        }
        levels.push_back({alpha, 1.0 - alpha});
    }
    if (levels.empty()) throw Error(ErrorCode::InvalidArgument, "no alpha levels given");
    return levels;
}

CaseUsage case_usage(const CaseTable& table, const CaseSubset& subset, std::uint64_t n_min) {
    CaseUsage u;
    for_each_case(table, subset, [&](const CaseCounters& c) {
        ++u.considered;
        if (c.n >= n_min && c.n > 0) {
            ++u.used;
        } else {
            ++u.skipped;
        }
    });
    return u;
}

std::vector<RatioRow> ratio_report(const CaseTable& table, const std::vector<AlphaLevel>& levels,
                                   const CaseSubset& subset, std::uint64_t n_min) {
    for (std::size_t i = 0; i < levels.size(); ++i) {
        if (!(levels[i].alpha > 0.5 && levels[i].alpha < 1.0) ||
            (i > 0 && !(levels[i].alpha > levels[i - 1].alpha))) {
            throw Error(ErrorCode::InvalidArgument, "alpha levels must increase inside (0.5, 1)");
        }
    }
    std::vector<std::uint64_t> observed(levels.size(), 0);
    std::uint64_t used = 0;
    for_each_case(table, subset, [&](const CaseCounters& c) {
        if (c.n < n_min || c.n == 0) return;
        ++used;
        const double smaller_tail = stats::normal_upper(std::fabs(case_z(c)));
        for (std::size_t i = 0; i < levels.size(); ++i) {
            if (!(smaller_tail < levels[i].tail)) break;
            ++observed[i];
        }
    });
    std::vector<RatioRow> rows(levels.size());
    for (std::size_t i = 0; i < levels.size(); ++i) {
        RatioRow& r = rows[i];
        r.index = i + 1;
        r.level = levels[i];
        r.expected = 2.0 * levels[i].tail * static_cast<double>(used);
        r.observed = observed[i];
        r.log2_ratio = observed[i] == 0 || r.expected == 0
                           ? -std::numeric_limits<double>::infinity()
                           : std::log2(static_cast<double>(observed[i]) / r.expected);
    }
    return rows;
}

ChiSquareSummary chi2_report(const CaseTable& table, const CaseSubset& subset,
                             std::uint64_t n_min) {
    long double q = 0;
    std::uint64_t dof = 0;
    for_each_case(table, subset, [&](const CaseCounters& c) {
        if (c.n < n_min || c.n == 0) return;
        const long double z = case_z(c);
        q += z * z;
        ++dof;
    });
    if (dof == 0) throw Error(ErrorCode::NoUsableCases, "no case reached the minimum trial count");
    ChiSquareSummary s;
    s.q = static_cast<double>(q);
    s.dof = dof;
    s.tail = stats::chi2_upper_tail(s.q, dof);
    return s;
}

CaseSubset reduce_cases(std::uint64_t total_cases, std::uint64_t factor, const Seed128& seed) {
    if (factor == 0 || (factor & (factor - 1)) != 0) {
        throw Error(ErrorCode::InvalidArgument, "reduce factor must be a power of two");
    }
    const std::uint64_t keep = (total_cases + factor - 1) / factor;
    if (keep < 100) {
        throw Error(ErrorCode::SubsetTooSmall,
                    std::to_string(keep) + " cases left after reduction, need 100");
    }
    CaseSubset out;
    out.reserve(keep);
    if (factor == 1) {
        for (std::uint64_t i = 0; i < total_cases; ++i) out.push_back(i);
        return out;
    }
    if (total_cases > std::numeric_limits<std::uint32_t>::max()) {
        throw Error(ErrorCode::OutOfRange, "case space too large to sample");
    }
    // Partial Fisher-Yates over a virtual identity array.
    BitSource src = BitSource::ideal(seed);
    std::unordered_map<std::uint64_t, std::uint64_t> moved;
    auto at = [&](std::uint64_t i) {
        const auto it = moved.find(i);
        return it == moved.end() ? i : it->second;
    };
    for (std::uint64_t i = 0; i < keep; ++i) {
        const std::uint64_t j =
            i + src.draw_in_range_ideal(static_cast<std::uint32_t>(total_cases - i));
        const std::uint64_t vi = at(i);
        const std::uint64_t vj = at(j);
        moved[j] = vi;
        out.push_back(vj);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<std::uint8_t> rows_of(const CaseSubset& subset, std::size_t n) {
    if (subset.empty()) return {};
    std::vector<std::uint8_t> rows(pair_count(n), 0);
    const std::uint64_t p = pair_count(n);
    for (const auto i : subset) rows[i / p] = 1;
    return rows;
}

EstimatorReport make_report(const CaseTable& table, const RunMetadata& meta,
                            const std::vector<AlphaLevel>& levels, const CaseSubset& subset) {
    EstimatorReport r;
    r.meta = meta;
    const CaseUsage usage = case_usage(table, subset);
    r.total_cases = usage.considered;
    r.used_cases = usage.used;
    r.skipped_cases = usage.skipped;
    r.updates_per_permutation = table.updates_per_permutation();
    r.rows = ratio_report(table, levels, subset);
    r.chi2 = chi2_report(table, subset);
    return r;
}

CaseTable accumulate_stream(const ShuffleSpec& spec, const BitSource& root, std::uint64_t count,
                            std::size_t threads, const std::vector<std::uint8_t>& rows) {
    spec.check();
    if (count == 0) throw Error(ErrorCode::InvalidArgument, "count must be >= 1");
    if (count > kMaxPermutationsPerRun) {
        throw Error(ErrorCode::CounterOverflow, "count capped at 2^31 per run");
    }
    const std::uint64_t chunks = chunk_count(count);
    const std::size_t workers =
        static_cast<std::size_t>(std::clamp<std::uint64_t>(threads, 1, chunks));
    std::vector<CaseTable> tables(workers, CaseTable(spec.n));
    for (auto& t : tables) t.restrict_rows(rows);
    std::vector<std::vector<std::uint8_t>> buffers(workers);
    parallel_for_items(chunks, workers, [&](std::size_t w, std::uint64_t chunk) {
        generate_chunk(spec, root, chunk, count, buffers[w]);
        tables[w].accumulate_rows(buffers[w]);
    });
    for (std::size_t w = 1; w < workers; ++w) tables[0].merge(tables[w]);
    return std::move(tables[0]);
}

EstimatorReport run_pipeline(const ShuffleSpec& spec, const BitSource& root, std::uint64_t count,
                             const PipelineOptions& options) {
    CaseSubset subset;
    if (options.reduce > 1) subset = reduce_cases(case_count(spec.n), options.reduce, root.seed());
    const CaseTable table = accumulate_stream(spec, root, count, options.threads,
                                              rows_of(subset, spec.n));
    RunMetadata meta{spec, root.kind(), root.seed(), count, options.reduce};
    return make_report(table, meta, options.levels, subset);
}

// ---------------------------------------------------------------------------

namespace {

std::string fmt(const char* format, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, format, v);
    return buf;
}

std::string format_log2(double v) { return std::isinf(v) ? "-inf" : fmt("%.4g", v); }

} // namespace

std::string to_csv(const EstimatorReport& report) {
    std::string out = "alpha_index,alpha,EN,ON,log2_ratio\n";
    for (const auto& r : report.rows) {
        out += std::to_string(r.index) + ',' + fmt("%.12g", r.level.alpha) + ',' +
               fmt("%.6g", r.expected) + ',' + std::to_string(r.observed) + ',' +
               format_log2(r.log2_ratio) + '\n';
    }
    return out;
}

std::string to_json(const EstimatorReport& report) {
    using nlohmann::ordered_json;
    ordered_json j;
    j["algo"] = std::string(to_string(report.meta.spec.algo));
    j["n"] = report.meta.spec.n;
    j["bits"] = report.meta.spec.bits;
    j["rng"] = std::string(to_string(report.meta.rng));
    j["seed"] = report.meta.seed.to_hex();
    j["count"] = report.meta.count;
    j["reduce"] = report.meta.reduce;
    j["total_cases"] = report.total_cases;
    j["used_cases"] = report.used_cases;
    j["skipped_cases"] = report.skipped_cases;
    j["updates_per_permutation"] = report.updates_per_permutation;
    ordered_json chi;
    chi["Q"] = report.chi2.q;
    chi["dof"] = report.chi2.dof;
    if (report.chi2.tail < 1e-300) {
        chi["tail_probability"] = "<1e-300";
    } else {
        chi["tail_probability"] = report.chi2.tail;
    }
    j["chi2"] = chi;
    j["verdict"] = report.biased() ? "biased" : "uniform";
    ordered_json rows = ordered_json::array();
    for (const auto& r : report.rows) {
        ordered_json row;
        row["alpha_index"] = r.index;
        row["alpha"] = r.level.alpha;
        row["EN"] = r.expected;
        row["ON"] = r.observed;
        if (std::isinf(r.log2_ratio)) {
            row["log2_ratio"] = "-inf";
        } else {
            row["log2_ratio"] = r.log2_ratio;
        }
        rows.push_back(row);
    }
    j["rows"] = rows;
    return j.dump(2) + "\n";
}

} // namespace permverify
