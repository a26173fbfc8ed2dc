// SPDX-License-Identifier: Apache-2.0

#include "permverify/stats.hpp"

#include "permverify/error.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <cmath>
#include <cstdio>
#include <numbers>

namespace permverify::stats {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

double normal_upper(double z) { return 0.5 * std::erfc(z / std::numbers::sqrt2); }

double chi2_upper_tail(double q, std::uint64_t dof) {
    if (dof == 0) throw Error(ErrorCode::InvalidArgument, "chi-square needs dof >= 1");
    if (!(q > 0.0)) return 1.0;
    return boost::math::gamma_q(0.5 * static_cast<double>(dof), 0.5 * q);
}

double exact_binomial_tail(std::uint64_t x, std::uint64_t n) {
    if (n > 10'000) throw Error(ErrorCode::InvalidArgument, "exact binomial tail needs n <= 10^4");
    if (x >= n) return 1.0;
    const long double log_half_n = static_cast<long double>(n) * std::log(0.5L);
    const long double lg_n = std::lgamma(static_cast<long double>(n) + 1);
    long double sum = 0;
    for (std::uint64_t i = 0; i <= x; ++i) {
        const long double log_term = lg_n - std::lgamma(static_cast<long double>(i) + 1) -
                                     std::lgamma(static_cast<long double>(n - i) + 1) + log_half_n;
        sum += std::exp(log_term);
    }
    return static_cast<double>(std::min(sum, 1.0L));
}

std::string format_probability(double p) {
    if (p < 1e-300) return "<1e-300";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", p);
    return buf;
}

} // namespace permverify::stats
