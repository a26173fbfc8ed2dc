// SPDX-License-Identifier: Apache-2.0

#include "permverify/cli.hpp"

#include "permverify/error.hpp"
#include "permverify/estimator.hpp"
#include "permverify/exact.hpp"
#include "permverify/perm_file.hpp"
#include "permverify/stats.hpp"
#include "permverify/stream.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

namespace permverify::cli {

namespace {

ShuffleSpec spec_from(const RunConfig& cfg) {
    if (!cfg.algo) throw Error(ErrorCode::InvalidArgument, "--algo is required");
    if (cfg.n == 0) throw Error(ErrorCode::InvalidArgument, "--n is required");
    ShuffleSpec spec{parse_algorithm(*cfg.algo), cfg.n, cfg.bits};
    spec.check();
    return spec;
}

BitSource root_from(const RunConfig& cfg, const ShuffleSpec& spec) {
    const SourceKind kind = parse_source_kind(cfg.rng);
    if (kind == SourceKind::tape) {
        throw Error(ErrorCode::InvalidArgument, "tape sources are only used by exact-dist");
    }
    if (spec.algo == Algorithm::fy_ideal && kind != SourceKind::ideal) {
        throw Error(ErrorCode::IncompatibleSource, "fy-ideal needs --rng ideal");
    }
    return BitSource::make(kind, Seed128::from_hex(cfg.seed));
}

void require_count(const RunConfig& cfg) {
    if (cfg.count == 0) throw Error(ErrorCode::InvalidArgument, "--count must be >= 1");
}

bool is_stdio(const std::string& path) { return path.empty() || path == "-"; }

// Opens --in, which may be "-" for stdin.
class InputFile {
public:
    explicit InputFile(const std::string& path) {
        if (path == "-") {
            stream_ = &std::cin;
        } else {
            file_.open(path, std::ios::binary);
            if (!file_) throw Error(ErrorCode::Io, "cannot open " + path);
            stream_ = &file_;
        }
    }
    std::istream& stream() { return *stream_; }

private:
    std::ifstream file_;
    std::istream* stream_ = nullptr;
};

template <typename Fn>
void for_each_file_batch(const std::string& path, Fn&& fn) {
    InputFile input(path);
    PermFileReader reader(input.stream());
    std::vector<std::uint8_t> rows;
    while (const std::uint64_t got = reader.read_batch(rows, kChunkSize)) {
        fn(reader.header().n, std::span<const std::uint8_t>(rows), got);
    }
}

std::size_t file_n(const std::string& path) {
    if (path == "-") throw Error(ErrorCode::InvalidArgument, "stdin cannot be read twice");
    InputFile input(path);
    return read_header(input.stream()).n;
}

std::vector<AlphaLevel> levels_from(const RunConfig& cfg) {
    if (cfg.alpha_file.empty()) return default_alpha_levels();
    std::ifstream in(cfg.alpha_file);
    if (!in) throw Error(ErrorCode::Io, "cannot open " + cfg.alpha_file);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_alpha_levels(ss.str());
}

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::Io, "cannot open " + path);
    out << text;
    if (!out) throw Error(ErrorCode::Io, "write failed for " + path);
}

std::string fmt_g(double v, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*g", digits, v);
    return buf;
}

template <typename Body>
int guarded(std::ostream& err, Body&& body) {
    try {
        return body();
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
    }
    return kExitError;
}

std::string render_tuple(const std::vector<std::uint8_t>& t) {
    std::string s = "(";
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (i) s += ',';
        s += std::to_string(t[i]);
    }
    return s + ")";
}

} // namespace

int cmd_gen(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const ShuffleSpec spec = spec_from(cfg);
        const BitSource root = root_from(cfg, spec);
        require_count(cfg);
        if (cfg.count > kMaxPermutationsPerRun) {
            throw Error(ErrorCode::CounterOverflow, "count capped at 2^31 per run");
        }

        std::ofstream file;
        std::ostream* sink = &out;
        if (!is_stdio(cfg.out)) {
            file.open(cfg.out, std::ios::binary);
            if (!file) throw Error(ErrorCode::Io, "cannot open " + cfg.out);
            sink = &file;
        }
        const auto start = std::chrono::steady_clock::now();
        write_header(*sink, {spec.n, cfg.count});

        const std::uint64_t chunks = chunk_count(cfg.count);
        const std::size_t workers = std::max<std::size_t>(1, cfg.threads);
        std::vector<std::vector<std::uint8_t>> batch(workers);
        for (std::uint64_t first = 0; first < chunks; first += workers) {
            const std::uint64_t in_batch = std::min<std::uint64_t>(workers, chunks - first);
            parallel_for_items(in_batch, workers, [&](std::size_t, std::uint64_t i) {
                generate_chunk(spec, root, first + i, cfg.count, batch[i]);
            });
            for (std::uint64_t i = 0; i < in_batch; ++i) {
                sink->write(reinterpret_cast<const char*>(batch[i].data()),
                            static_cast<std::streamsize>(batch[i].size()));
            }
        }
        sink->flush();
        if (!*sink) throw Error(ErrorCode::Io, "write failed");

        const double secs =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        err << "generated " << cfg.count << " permutations of " << spec.n << " in "
            << fmt_g(secs, 3) << " s (" << fmt_g(static_cast<double>(cfg.count) / std::max(secs, 1e-9), 3)
            << " perm/s)\n";
        return kExitUniform;
    });
}

int cmd_estimate(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        if (cfg.report != "csv" && cfg.report != "json") {
            throw Error(ErrorCode::InvalidArgument, "--report must be csv or json");
        }
        const auto levels = levels_from(cfg);
        const Seed128 seed = Seed128::from_hex(cfg.seed);
        EstimatorReport report;
        if (!cfg.in.empty()) {
            const std::size_t n = cfg.in == "-" ? 0 : file_n(cfg.in);
            std::optional<CaseTable> table;
            CaseSubset subset;
            for_each_file_batch(cfg.in, [&](std::size_t file_n_value, std::span<const std::uint8_t> rows,
                                            std::uint64_t) {
                if (!table) {
                    if (n != 0 && n != file_n_value) {
                        throw Error(ErrorCode::MalformedFile, "inconsistent header");
                    }
                    table.emplace(file_n_value);
                    if (cfg.reduce > 1) {
                        subset = reduce_cases(case_count(file_n_value), cfg.reduce, seed);
                        table->restrict_rows(rows_of(subset, file_n_value));
                    }
                }
                table->accumulate_rows(rows);
            });
            if (!table) throw Error(ErrorCode::MalformedFile, "file holds no permutations");
            RunMetadata meta;
            meta.spec.n = table->n();
            meta.spec.bits = cfg.bits;
            if (cfg.algo) meta.spec.algo = parse_algorithm(*cfg.algo);
            meta.rng = parse_source_kind(cfg.rng);
            meta.seed = seed;
            meta.count = table->permutations();
            meta.reduce = cfg.reduce;
            report = make_report(*table, meta, levels, subset);
        } else {
            const ShuffleSpec spec = spec_from(cfg);
            const BitSource root = root_from(cfg, spec);
            require_count(cfg);
            report = run_pipeline(spec, root, cfg.count,
                                  PipelineOptions{levels, cfg.reduce, std::max<std::size_t>(1, cfg.threads)});
        }

        const std::string csv = to_csv(report);
        const std::string json = to_json(report);
        if (!is_stdio(cfg.out)) {
            write_text(cfg.out + ".csv", csv);
            write_text(cfg.out + ".json", json);
        }
        out << (cfg.report == "json" ? json : csv);
        err << "chi2 Q=" << fmt_g(report.chi2.q, 10) << " dof=" << report.chi2.dof
            << " tail=" << stats::format_probability(report.chi2.tail)
            << " skipped=" << report.skipped_cases << " verdict="
            << (report.biased() ? "biased" : "uniform") << '\n';
        return report.biased() ? kExitBiased : kExitUniform;
    });
}

int cmd_brute(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        std::size_t n = 0;
        std::vector<std::uint64_t> counts;
        if (!cfg.in.empty()) {
            for_each_file_batch(cfg.in, [&](std::size_t fn, std::span<const std::uint8_t> rows,
                                            std::uint64_t got) {
                if (counts.empty()) {
                    if (fn > kMaxFactorialN) {
                        throw Error(ErrorCode::FactorialTooLarge, "brute force needs N <= 8");
                    }
                    n = fn;
                    counts.assign(factorial(n), 0);
                }
                for (std::uint64_t r = 0; r < got; ++r) ++counts[lehmer_rank(rows.subspan(r * n, n))];
            });
            if (counts.empty()) throw Error(ErrorCode::MalformedFile, "file holds no permutations");
        } else {
            const ShuffleSpec spec = spec_from(cfg);
            if (spec.n > kMaxFactorialN) {
                throw Error(ErrorCode::FactorialTooLarge, "brute force needs N <= 8");
            }
            const BitSource root = root_from(cfg, spec);
            require_count(cfg);
            n = spec.n;
            const std::uint64_t chunks = chunk_count(cfg.count);
            const std::size_t workers = static_cast<std::size_t>(
                std::clamp<std::uint64_t>(std::max<std::size_t>(1, cfg.threads), 1, chunks));
            std::vector<std::vector<std::uint64_t>> partial(workers,
                                                            std::vector<std::uint64_t>(factorial(n), 0));
            std::vector<std::vector<std::uint8_t>> buffers(workers);
            parallel_for_items(chunks, workers, [&](std::size_t w, std::uint64_t chunk) {
                const std::uint64_t got = generate_chunk(spec, root, chunk, cfg.count, buffers[w]);
                const std::span<const std::uint8_t> rows(buffers[w]);
                for (std::uint64_t r = 0; r < got; ++r) ++partial[w][lehmer_rank(rows.subspan(r * n, n))];
            });
            counts = std::move(partial[0]);
            for (std::size_t w = 1; w < workers; ++w) {
                for (std::size_t i = 0; i < counts.size(); ++i) counts[i] += partial[w][i];
            }
        }
        const BruteForceReport r = brute_force_chi2(counts, n);
        const bool biased = r.tail < 0.05;
        std::string text;
        if (cfg.report == "json") {
            nlohmann::ordered_json j;
            j["n"] = n;
            j["cells"] = counts.size();
            j["Q"] = r.q;
            j["dof"] = r.dof;
            if (r.tail < 1e-300) {
                j["tail_probability"] = "<1e-300";
            } else {
                j["tail_probability"] = r.tail;
            }
            j["verdict"] = biased ? "biased" : "uniform";
            text = j.dump(2) + "\n";
        } else {
            text = "Q,dof,tail_probability\n" + fmt_g(r.q, 10) + ',' + std::to_string(r.dof) + ',' +
                   stats::format_probability(r.tail) + '\n';
        }
        if (!is_stdio(cfg.out)) write_text(cfg.out, text);
        out << text;
        return biased ? kExitBiased : kExitUniform;
    });
}

int cmd_order_check(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        std::optional<PermMultiset> dist;
        if (!cfg.in.empty()) {
            for_each_file_batch(cfg.in, [&](std::size_t fn, std::span<const std::uint8_t> rows,
                                            std::uint64_t got) {
                if (!dist) dist.emplace(fn);
                for (std::uint64_t r = 0; r < got; ++r) {
                    dist->add(validate(rows.subspan(r * fn, fn)));
                }
            });
            if (!dist) throw Error(ErrorCode::MalformedFile, "file holds no permutations");
        } else {
            dist = exact_distribution(spec_from(cfg)).weights;
        }
        const std::size_t n = dist->n();
        if (n > kMaxFactorialN) throw Error(ErrorCode::FactorialTooLarge, "order check needs N <= 8");
        if (cfg.k != 0 && cfg.k + 1 > n) {
            throw Error(ErrorCode::OutOfRange, "--k must be in [1, N-1]");
        }

        std::uint64_t cyclic = 0, even = 0;
        for (const auto& [p, w] : dist->entries()) {
            if (is_cyclic(p)) cyclic += w;
            if (parity(p) == Parity::even) even += w;
        }
        out << "n: " << n << "\n"
            << "samples: " << dist->total() << " (" << dist->support_size() << " distinct)\n"
            << "cyclic: " << cyclic << " of " << dist->total() << "\n"
            << "even: " << even << " of " << dist->total() << "\n"
            << "perfect: " << (check_perfect(*dist) ? "yes" : "no") << "\n"
            << "approximate-order: " << (check_approx_order(*dist) ? "holds" : "fails") << "\n";

        const std::size_t k_first = cfg.k == 0 ? 1 : cfg.k;
        const std::size_t k_last = cfg.k == 0 ? n - 1 : cfg.k;
        bool all_hold = true;
        for (std::size_t k = k_first; k <= k_last; ++k) {
            const OrderCheckResult r = check_order_k(*dist, k);
            const char* verdict = r.holds ? "holds" : (r.degenerate ? "degenerate" : "fails");
            out << "order " << k << ": " << verdict << "\n";
            if (r.witness) {
                const auto& w = *r.witness;
                out << "  witness: inputs " << render_tuple(w.inputs) << " outputs "
                    << render_tuple(w.outputs) << " P(f(" << int(w.inputs.back()) << ")="
                    << int(w.outputs.back()) << " | rest) = " << w.conditional.num << "/"
                    << w.conditional.den << ", expected 1/" << (n - k + 1) << "\n";
            }
            all_hold = all_hold && r.holds;
        }
        return all_hold ? kExitUniform : kExitBiased;
    });
}

int cmd_exact_dist(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    return guarded(err, [&] {
        const ExactDistribution dist = exact_distribution(spec_from(cfg));
        std::string text = "permutation,numerator,denominator\n";
        for (const auto& [p, w] : dist.weights.entries()) {
            for (std::size_t i = 0; i < p.size(); ++i) {
                if (i) text += ' ';
                text += std::to_string(p[i]);
            }
            text += ',' + std::to_string(w) + ',' + std::to_string(dist.denominator()) + '\n';
        }
        if (!is_stdio(cfg.out)) write_text(cfg.out, text);
        out << text;
        return kExitUniform;
    });
}

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    if (cfg.command == "gen") return cmd_gen(cfg, out, err);
    if (cfg.command == "estimate") return cmd_estimate(cfg, out, err);
    if (cfg.command == "brute") return cmd_brute(cfg, out, err);
    if (cfg.command == "order-check") return cmd_order_check(cfg, out, err);
    if (cfg.command == "exact-dist") return cmd_exact_dist(cfg, out, err);
    err << "error: unknown command '" << cfg.command << "'\n";
    return kExitError;
}

int main(int argc, char** argv) {
    CLI::App app{"Fisher-Yates shuffle generation and permutation uniformity analysis"};
    app.require_subcommand(1);
    RunConfig cfg;
    std::string algo;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--algo", algo, "fy-ideal | fy-mod | fy-float | fy-muldiv | naive | sattolo");
        sub->add_option("--n", cfg.n, "number of indices (2..255)");
        sub->add_option("--bits", cfg.bits, "bits per random draw");
        sub->add_option("--rng", cfg.rng, "lcg-msvc | aes128 | ideal | tape");
        sub->add_option("--seed", cfg.seed, "32 hex characters");
        sub->add_option("--count", cfg.count, "number of permutations");
        sub->add_option("--reduce", cfg.reduce, "case reduction factor (power of two)");
        sub->add_option("--k", cfg.k, "order to check (default: all)");
        sub->add_option("--in", cfg.in, "input permutation file, - for stdin");
        sub->add_option("--out", cfg.out, "output path");
        sub->add_option("--report", cfg.report, "csv | json");
        sub->add_option("--threads", cfg.threads, "worker threads");
        sub->add_option("--alpha-file", cfg.alpha_file, "confidence levels, one per line");
    };
    for (const auto& [name, help] : {
             std::pair{"gen", "generate a permutation file"},
             std::pair{"estimate", "approximate (N-1)th order estimator"},
             std::pair{"brute", "chi-square over all N! permutations"},
             std::pair{"order-check", "exact k-th order check for small N"},
             std::pair{"exact-dist", "exact output distribution by tape enumeration"},
         }) {
        add_common(app.add_subcommand(name, help));
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitUniform : kExitError;
    }
    cfg.command = app.get_subcommands().front()->get_name();
    if (!algo.empty()) cfg.algo = algo;
    return run(cfg, std::cout, std::cerr);
}

} // namespace permverify::cli
