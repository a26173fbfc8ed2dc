// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace permverify::cli {

inline constexpr int kExitUniform = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitBiased = 2;

struct RunConfig {
    std::string command;
    std::optional<std::string> algo;
    std::size_t n = 0;
    unsigned bits = 16;
    std::string rng = "aes128";
    std::string seed = std::string(32, '0');
    std::uint64_t count = 0;
    std::uint64_t reduce = 1;
    std::size_t k = 0; // 0: every k in [1, N-1]
    std::string in;
    std::string out;
    std::string report = "csv";
    std::size_t threads = 1;
    std::string alpha_file;
};

/// Each command returns its process exit code: 0 for a uniform verdict (or
/// success), 2 for a bias verdict, 1 for errors. Library errors are caught
/// and reported on `err`.
int cmd_gen(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_estimate(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_brute(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_order_check(const RunConfig& cfg, std::ostream& out, std::ostream& err);
int cmd_exact_dist(const RunConfig& cfg, std::ostream& out, std::ostream& err);

int run(const RunConfig& cfg, std::ostream& out, std::ostream& err);

/// Parses argv and dispatches; reads stdin for `--in -`.
int main(int argc, char** argv);

} // namespace permverify::cli
