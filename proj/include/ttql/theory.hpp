#pragma once

#include "ttql/rng.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace ttql {

/// Discounted error ratio outside [0, 1), where the coefficient bounds do not apply.
class OutOfRegimeError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/**
 * Coefficients of the error recursion
 *
 *   E_n <= (n - 1 + gamma * beta_{n-1}) / n * E_{n-1} + noise / n
 *
 * unrolled to horizon n:
 *
 *   w_k     = prod_{i=n-k}^{n-1} (i + gamma beta_i) / prod_{i=n-k}^{n} i,  k = 0..n-1
 *   alpha_n = prod_{i=1}^{n-1}   (i + gamma beta_i) / prod_{i=2}^{n}   i
 *
 * w_0 = 1/n (empty numerator). Products are evaluated as sums of log1p terms in
 * long double.
 */
struct Weights {
    std::vector<double> w;
    double alpha_n = 0.0;
    /// sum_{k=0}^{n-1} w_k^2, accumulated in long double.
    double sum_sq = 0.0;
};

/// `beta` holds beta_1 .. beta_{n-1}; each must lie in [0, 1]. Requires n >= 2.
[[nodiscard]] Weights weights(std::size_t n, double gamma, std::span<const double> beta);
/// Constant error ratio beta_i = beta for every i.
[[nodiscard]] Weights weights_constant(std::size_t n, double gamma, double beta);

/// Closed-form bound on sum w_k^2 when gamma * beta_i <= gamma_beta for all i.
/// Requires n >= 3 and 0 <= gamma_beta < 1 (OutOfRegimeError otherwise).
[[nodiscard]] double thm2_bound(std::size_t n, double gamma_beta);

/// C / n^(1 - gamma_beta) with C = (1 + gamma_beta) exp((0.5 - ln 2) gamma_beta); bounds alpha_n.
[[nodiscard]] double thm3_bound(std::size_t n, double gamma_beta);

/// alpha_n * e1 + sqrt(ln(1/delta) * sum w_k^2 / 2), with exact coefficients.
[[nodiscard]] double error_bound(std::size_t n, double e1, double delta, double gamma,
                                 std::span<const double> beta);

struct HoeffdingReport {
    static constexpr std::array<double, 3> deltas{0.1, 0.05, 0.01};
    std::array<double, 3> thresholds{};
    std::array<double, 3> violation_rates{};
    std::size_t trials = 0;
};

/**
 * Monte Carlo check of the weighted Hoeffding inequality: draws x_i ~ U[a, b],
 * forms S = sum w_i x_i and records how often S - E[S] exceeds
 * sqrt(0.5 ln(1/delta) sum w_i^2 (b - a)^2).
 */
[[nodiscard]] HoeffdingReport hoeffding_check(std::span<const double> weight_seq,
                                              std::size_t n_trials, Rng& rng, double a = 0.0,
                                              double b = 1.0);

/// sum_{i=a}^{b} 1/i <= 1/a + ln b - ln a, by direct summation. Requires 1 <= a < b.
[[nodiscard]] bool sum_log_inequality_check(std::size_t a, std::size_t b);

/// Checks every pair 1 <= a < b <= max_b; returns the number of failures.
[[nodiscard]] std::size_t sum_log_inequality_sweep(std::size_t max_b);

struct BoundsRow {
    std::size_t n = 0;
    double gamma_beta = 0.0;
    double exact_sum = 0.0;
    double thm2 = 0.0;
    double exact_alpha = 0.0;
    double thm3 = 0.0;
    bool sum_ok = false;
    bool alpha_ok = false;
};

/// Exact coefficients against both closed forms at every grid point.
[[nodiscard]] std::vector<BoundsRow> bounds_grid(std::span<const std::size_t> horizons,
                                                 std::span<const double> gamma_betas);

/// Least-squares slope of ln(sum w_k^2) against ln n.
[[nodiscard]] double sum_sq_loglog_slope(std::span<const std::size_t> horizons, double gamma_beta);

} // namespace ttql
