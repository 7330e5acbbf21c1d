#include "dcert/stats.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace dcert {
namespace {

constexpr int kMaxIterations = 500;
constexpr double kEps = 1e-14;

// Regularized lower incomplete gamma P(a, x) by its power series (x < a + 1).
double gamma_p_series(double a, double x) {
    double term = 1.0 / a;
    double sum = term;
    double ap = a;
    for (int i = 0; i < kMaxIterations; ++i) {
        ap += 1.0;
        term *= x / ap;
        sum += term;
        if (std::fabs(term) < std::fabs(sum) * kEps) break;
    }
    return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Regularized upper incomplete gamma Q(a, x) by Lentz's continued fraction
// (x >= a + 1).
double gamma_q_continued_fraction(double a, double x) {
    constexpr double tiny = std::numeric_limits<double>::min() / kEps;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= kMaxIterations; ++i) {
        const double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::fabs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::fabs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::fabs(delta - 1.0) < kEps) break;
    }
    return h * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

double gamma_q(double a, double x) {
    if (x <= 0) return 1.0;
    if (x < a + 1.0) return 1.0 - gamma_p_series(a, x);
    return gamma_q_continued_fraction(a, x);
}

}  // namespace

double bernstein_radius(std::uint64_t n, double delta, double sigma_hat, double range) {
    const double log_term = std::log(3.0 / delta);
    const double dn = static_cast<double>(n);
    return sigma_hat * std::sqrt(2.0 * log_term / dn) + 3.0 * range * log_term / dn;
}

std::uint64_t required_sample_size(double epsilon, double delta, double sigma_hat,
                                   double range) {
    if (epsilon <= 0) throw std::invalid_argument("epsilon must be positive");
    if (delta <= 0 || delta >= 1) throw std::invalid_argument("delta must lie in (0, 1)");
    if (sigma_hat < 0) throw std::invalid_argument("sigma_hat must be non-negative");
    if (range <= 0) throw std::invalid_argument("range must be positive");

    // r(n) is strictly decreasing in n, so binary search over an exponentially
    // grown bracket finds the smallest admissible n.
    std::uint64_t hi = 1;
    while (bernstein_radius(hi, delta, sigma_hat, range) > epsilon) {
        hi *= 2;
        if (hi == 0) throw std::overflow_error("required sample size overflow");
    }
    std::uint64_t lo = hi / 2;  // radius(lo) > epsilon (or lo == 0)
    while (hi - lo > 1 && lo > 0) {
        const std::uint64_t mid = lo + (hi - lo) / 2;
        if (bernstein_radius(mid, delta, sigma_hat, range) <= epsilon) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    return hi;
}

double chi_square_pvalue(double statistic, unsigned dof) {
    if (statistic < 0) throw std::invalid_argument("statistic must be non-negative");
    if (dof == 0) throw std::invalid_argument("dof must be positive");
    return gamma_q(dof / 2.0, statistic / 2.0);
}

}  // namespace dcert
