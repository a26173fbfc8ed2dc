// SPDX-License-Identifier: Apache-2.0
//
// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// non-zero when any criterion fails.

#include "permverify/cli.hpp"
#include "permverify/error.hpp"
#include "permverify/estimator.hpp"
#include "permverify/exact.hpp"
#include "permverify/perm_file.hpp"

#include <json.hpp>

#include <fcntl.h>
#include <spawn.h>
#include <sys/resource.h>
#include <sys/wait.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

using namespace permverify;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

extern char** environ;

namespace {

const std::string kCli = PERMVERIFY_CLI;
const fs::path kFixtures = PERMVERIFY_FIXTURES;

const std::array<Seed128, 3> kSeeds = {
    Seed128::from_hex("000102030405060708090a0b0c0d0e0f"),
    Seed128::from_hex("2b7e151628aed2a6abf7158809cf4f3c"),
    Seed128::from_hex("f0e1d2c3b4a5968778695a4b3c2d1e0f"),
};

struct Verdict {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

struct CliResult {
    int code;
    std::string out;
    std::string err;
};

CliResult run_cli(const cli::RunConfig& cfg) {
    std::ostringstream out, err;
    const int code = cli::run(cfg, out, err);
    return {code, out.str(), err.str()};
}

// Exact tail of an estimator run at the given width and seed.
double approx_tail(const ShuffleSpec& spec, const Seed128& seed, std::uint64_t count,
                   std::uint64_t reduce = 1) {
    return run_pipeline(spec, BitSource::aes128(seed), count, {default_alpha_levels(), reduce, 1})
        .chi2.tail;
}

double brute_tail(const ShuffleSpec& spec, const Seed128& seed, std::uint64_t count) {
    cli::RunConfig cfg;
    cfg.command = "brute";
    cfg.algo = std::string(to_string(spec.algo));
    cfg.n = spec.n;
    cfg.bits = spec.bits;
    cfg.seed = seed.to_hex();
    cfg.count = count;
    cfg.report = "json";
    const auto r = run_cli(cfg);
    if (r.code == cli::kExitError) throw std::runtime_error(r.err);
    const auto j = nlohmann::json::parse(r.out);
    return j["tail_probability"].is_string() ? 0.0 : j["tail_probability"].get<double>();
}

// ---------------------------------------------------------------------------

Verdict normal_anchor() {
    const double p = case_tail_probability({3000, 1600});
    const std::string printed = fmt("%.6f", p);
    return {std::abs(std::stod(printed) - 0.999869) <= 1e-6 + 1e-12, "printed " + printed};
}

Verdict table_en() {
    // Printed expected counts for the 16 default levels with C = 246016.
    static const char* printed[16] = {"221415", "196813", "147610", "98406",   "49203",
                                      "24601",  "4920.34", "492.034", "49.20", "4.92034",
                                      "0.49203", "0.04920", "0.004920", "0.000492", "0.000049",
                                      "0.000005"};
    const auto report = run_pipeline({Algorithm::fy_ideal, 32, 16},
                                     BitSource::ideal(kSeeds[0]), 100'000);
    if (report.used_cases != 246016) return {false, fmt("used cases %llu", (unsigned long long)report.used_cases)};
    int bad = 0;
    std::string worst;
    for (std::size_t i = 0; i < 16; ++i) {
        const std::string s = printed[i];
        const auto dot = s.find('.');
        const int decimals = dot == std::string::npos ? 0 : static_cast<int>(s.size() - dot - 1);
        const double tol = 0.5 * std::pow(10.0, -decimals);
        const double en = report.rows[i].expected;
        if (std::abs(en - std::stod(s)) > tol + 1e-12) {
            ++bad;
            worst += fmt(" row %zu: %.*f vs %s;", i + 1, decimals + 2, en, printed[i]);
        }
    }
    return {bad == 0, fmt("%d of 16 rows outside +-0.5 of printed precision.", bad) + worst};
}

Verdict order_two_fixture() {
    cli::RunConfig cfg;
    cfg.command = "order-check";
    cfg.in = (kFixtures / "order2_not_order3_n5.prmv").string();
    const auto r = run_cli(cfg);
    const bool ok = r.out.find("order 1: holds") != std::string::npos &&
                    r.out.find("order 2: holds") != std::string::npos &&
                    r.out.find("order 3: fails") != std::string::npos &&
                    r.out.find("  witness: inputs (") != std::string::npos;
    const auto w = r.out.find("  witness");
    return {ok && r.code == cli::kExitBiased,
            w == std::string::npos ? "no witness" : r.out.substr(w + 2, r.out.find('\n', w) - w - 2)};
}

Verdict alternating_gap() {
    const auto a4 = read_perm_multiset((kFixtures / "a4.prmv").string());
    const bool perfect = check_perfect(a4);
    const bool approx = check_approx_order(a4);
    return {!perfect && approx && a4.support_size() == 12,
            fmt("perfect=%s approximate=%s", perfect ? "true" : "false", approx ? "true" : "false")};
}

Verdict order_properties() {
    std::vector<std::pair<std::string, PermMultiset>> sets;
    for (const auto& entry : fs::directory_iterator(kFixtures)) {
        if (entry.path().extension() != ".prmv") continue;
        auto m = read_perm_multiset(entry.path().string());
        if (m.n() <= 5) sets.emplace_back(entry.path().filename().string(), std::move(m));
    }
    for (std::size_t n = 3; n <= 5; ++n) {
        sets.emplace_back("cyclic", fixtures::uniform(fixtures::cyclic_group(n)));
        sets.emplace_back("alternating", fixtures::uniform(fixtures::alternating_group(n)));
    }
    int counterexamples = 0;
    for (const auto& [name, dist] : sets) {
        const std::size_t n = dist.n();
        std::vector<bool> holds(n, false);
        for (std::size_t k = 1; k < n; ++k) holds[k] = check_order_k(dist, k).holds;
        if (holds[n - 1] != check_perfect(dist)) ++counterexamples;
        for (std::size_t k = 2; k < n; ++k) counterexamples += holds[k] && !holds[k - 1];
    }
    return {counterexamples == 0, fmt("%zu sets, %d counterexamples", sets.size(), counterexamples)};
}

Verdict sattolo_structure() {
    const auto d = exact_distribution({Algorithm::sattolo, 4, 8}).weights;
    std::set<Permutation> cyclic;
    for (std::uint64_t r = 0; r < factorial(4); ++r) {
        auto p = lehmer_unrank(r, 4);
        if (is_cyclic(p)) cyclic.insert(p);
    }
    std::set<Permutation> support;
    for (const auto& [p, w] : d.entries()) support.insert(p);
    auto src = BitSource::aes128(kSeeds[0]);
    std::uint64_t non_cyclic = 0;
    for (int i = 0; i < 100'000; ++i) non_cyclic += !is_cyclic(shuffle({Algorithm::sattolo, 32, 16}, src));
    return {support == cyclic && cyclic.size() == 6 && non_cyclic == 0,
            fmt("support %zu (cyclic %zu), non-cyclic samples %llu", support.size(), cyclic.size(),
                (unsigned long long)non_cyclic)};
}

Verdict naive_bias() {
    const auto d = exact_distribution({Algorithm::naive, 4, 2});
    std::set<std::uint64_t> masses;
    for (const auto& [p, w] : d.weights.entries()) masses.insert(w);
    const bool non_uniform = d.denominator() == 64 && d.weights.support_size() == 24 && masses.size() > 1;
    const double tail = brute_tail({Algorithm::naive, 4, 16}, kSeeds[0], 1'000'000);
    return {non_uniform && tail < 1e-5,
            fmt("exact: %zu cells over %llu tapes, %zu distinct masses; brute tail %.3g", d.weights.support_size(),
                (unsigned long long)d.denominator(), masses.size(), tail)};
}

Verdict bit_width_trend() {
    std::string detail;
    bool pass = true;
    for (const unsigned bits : {8u, 9u, 10u, 11u, 12u, 15u, 16u}) {
        const bool want_biased = bits <= 12;
        int in_band = 0;
        detail += fmt(" b=%u:", bits);
        for (const auto& seed : kSeeds) {
            const double t = approx_tail({Algorithm::fy_muldiv, 32, bits}, seed, 10'000'000);
            in_band += want_biased ? t < 1e-3 : t > 0.05;
            detail += fmt(" %.3g", t);
        }
        pass = pass && in_band >= 2;
    }
    return {pass, "tails" + detail};
}

Verdict brute_concordance() {
    std::string detail;
    bool pass = true;
    for (unsigned bits = 4; bits <= 24; ++bits) {
        if (bits > 11 && bits < 20) continue;
        if (bits > 20 && bits % 2) continue;
        const bool want_flag = bits <= 11;
        detail += fmt(" b=%u:", bits);
        for (const auto& seed : kSeeds) {
            const ShuffleSpec spec{Algorithm::fy_muldiv, 6, bits};
            const double b = brute_tail(spec, seed, 10'000'000);
            const double a = approx_tail(spec, seed, 10'000'000);
            const bool ok = want_flag ? (b < 1e-5 && a < 1e-5) : (b >= 1e-5 && a >= 1e-5);
            pass = pass && ok;
            detail += fmt(" %.2g/%.2g%s", b, a, ok ? "" : "!");
        }
    }
    return {pass, "brute/approx" + detail};
}

Verdict reduced_consistency() {
    const std::array<unsigned, 4> widths{8, 10, 12, 15};
    std::array<bool, 4> full{};
    std::string detail = " full:";
    for (std::size_t i = 0; i < widths.size(); ++i) {
        const double t = approx_tail({Algorithm::fy_muldiv, 32, widths[i]}, kSeeds[0], 1'000'000);
        full[i] = t < 0.05;
        detail += fmt(" %.3g", t);
    }
    bool pass = true;
    for (std::uint64_t factor = 2; factor <= 256; factor *= 2) {
        int agree = 0;
        detail += fmt(" /%llu:", (unsigned long long)factor);
        for (std::size_t i = 0; i < widths.size(); ++i) {
            const double t = approx_tail({Algorithm::fy_muldiv, 32, widths[i]}, kSeeds[0], 1'000'000, factor);
            agree += (t < 0.05) == full[i];
            detail += fmt(" %.3g", t);
        }
        pass = pass && agree >= 3;
    }
    return {pass, "tails" + detail};
}

Verdict determinism() {
    cli::RunConfig cfg;
    cfg.command = "estimate";
    cfg.algo = "fy-muldiv";
    cfg.n = 32;
    cfg.bits = 12;
    cfg.count = 1'000'000;
    cfg.seed = kSeeds[1].to_hex();
    std::vector<std::string> reports;
    for (const std::size_t threads : {1u, 8u, 1u, 8u}) {
        cfg.threads = threads;
        for (const char* format : {"csv", "json"}) {
            cfg.report = format;
            reports.push_back(run_cli(cfg).out);
        }
    }
    bool same = true;
    for (std::size_t i = 2; i < reports.size(); ++i) same = same && reports[i] == reports[i % 2];

    const auto dir = fs::temp_directory_path();
    cli::RunConfig gen = cfg;
    gen.command = "gen";
    gen.count = 200'000;
    std::vector<std::string> files;
    for (const std::size_t threads : {1u, 8u}) {
        gen.threads = threads;
        gen.out = (dir / fmt("permverify-accept-%zu.prmv", threads)).string();
        run_cli(gen);
        std::ifstream in(gen.out, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        files.push_back(ss.str());
        fs::remove(gen.out);
    }
    same = same && files[0] == files[1] && files[0].size() == 16 + 200'000 * 32;
    return {same, same ? "reports and files byte-identical" : "mismatch"};
}

Verdict performance() {
    const auto out = fs::temp_directory_path() / "permverify-accept-perf";
    const std::vector<std::string> args{kCli,  "estimate", "--algo", "fy-muldiv", "--n",     "32",
                                        "--bits", "16",   "--count", "10000000", "--threads", "4",
                                        "--report", "json", "--out", out.string()};
    std::vector<char*> argv;
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_addopen(&actions, 1, "/dev/null", O_WRONLY, 0);
    posix_spawn_file_actions_addopen(&actions, 2, "/dev/null", O_WRONLY, 0);
    const auto start = Clock::now();
    pid_t pid = 0;
    if (posix_spawn(&pid, kCli.c_str(), &actions, nullptr, argv.data(), environ) != 0) {
        return {false, "spawn failed"};
    }
    posix_spawn_file_actions_destroy(&actions);
    int status = 0;
    rusage usage{};
    wait4(pid, &status, 0, &usage);
    const double secs = std::chrono::duration<double>(Clock::now() - start).count();
    const double rss_mb = usage.ru_maxrss / 1024.0;

    std::ifstream in(out.string() + ".json");
    const nlohmann::json j = nlohmann::json::parse(in);
    const bool counts = j["updates_per_permutation"] == 496 && j["total_cases"] == 246016 && j["count"] == 10'000'000;
    fs::remove(out.string() + ".json");
    fs::remove(out.string() + ".csv");
    return {WIFEXITED(status) && WEXITSTATUS(status) != 1 && secs < 5400 && rss_mb < 100 && counts,
            fmt("%.1f s, peak RSS %.1f MB, %d updates per permutation, %d cases", secs, rss_mb,
                j["updates_per_permutation"].template get<int>(), j["total_cases"].template get<int>())};
}

struct Criterion {
    int id;
    const char* name;
    double limit_seconds;
    std::function<Verdict()> check;
};

} // namespace

int main() {
    const std::vector<Criterion> criteria{
        {1, "normal-CDF anchor", 1, normal_anchor},
        {2, "expected-count table", 60, table_en},
        {3, "second-but-not-third order fixture", 1, order_two_fixture},
        {4, "alternating group gap", 1, alternating_gap},
        {5, "order hierarchy and perfect equivalence", 30, order_properties},
        {6, "Sattolo cycle structure", 60, sattolo_structure},
        {7, "naive shuffle bias", 60, naive_bias},
        {8, "bit-width trend at N=32", 900, bit_width_trend},
        {9, "brute force and estimator concordance at N=6", 600, brute_concordance},
        {10, "reduced-case consistency", 1200, reduced_consistency},
        {11, "determinism across thread counts", 300, determinism},
        {12, "performance envelope", 5400, performance},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto start = Clock::now();
        Verdict v;
        try {
            v = c.check();
        } catch (const std::exception& e) {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(Clock::now() - start).count();
        const bool in_time = secs <= c.limit_seconds;
        const bool pass = v.pass && in_time;
        failed += !pass;
        std::printf("criterion %2d %s: %s [%.2f s%s] %s\n", c.id, pass ? "PASS" : "FAIL", c.name, secs,
                    in_time ? "" : ", over time limit", v.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
