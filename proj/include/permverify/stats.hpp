// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>

namespace permverify::stats {

enum class TailMethod { normal_approx, exact_binomial, chi2_gamma };

/// A probability tagged with how it was obtained.
struct TailProbability {
    double value = 1.0;
    TailMethod method = TailMethod::normal_approx;
};

/// Phi(z) through erfc; accurate in the far tails.
double normal_cdf(double z);
/// 1 - Phi(z) without cancellation.
double normal_upper(double z);

/// P(chi2_dof >= q), the regularized upper incomplete gamma Q(dof/2, q/2).
double chi2_upper_tail(double q, std::uint64_t dof);

/// Exact P(X <= x) for X ~ Binomial(n, 1/2), n <= 10^4.
double exact_binomial_tail(std::uint64_t x, std::uint64_t n);

/// Six significant digits, or "<1e-300" when the value underflows.
std::string format_probability(double p);

} // namespace permverify::stats
