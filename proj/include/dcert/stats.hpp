#pragma once

#include <cstdint>

namespace dcert {

/// Empirical-Bernstein confidence radius
///   r(n) = sigma_hat * sqrt(2 ln(3/delta) / n) + 3 range * ln(3/delta) / n.
double bernstein_radius(std::uint64_t n, double delta, double sigma_hat, double range);

/// Smallest n with bernstein_radius(n) <= epsilon. Finite for any epsilon > 0.
/// Throws std::invalid_argument on out-of-domain parameters.
std::uint64_t required_sample_size(double epsilon, double delta, double sigma_hat,
                                   double range);

/// Upper-tail probability of the chi-square distribution with `dof` degrees of
/// freedom, through the regularized incomplete gamma function (power series
/// for small arguments, continued fraction for large). Absolute error < 1e-8.
double chi_square_pvalue(double statistic, unsigned dof);

}  // namespace dcert
