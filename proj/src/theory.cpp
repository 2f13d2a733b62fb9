#include "ttql/theory.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace ttql {

namespace {

void require_regime(double gamma_beta, const char* who) {
    if (!(gamma_beta >= 0.0 && gamma_beta < 1.0))
        throw OutOfRegimeError(std::string(who) + ": discounted error ratio " +
                               std::to_string(gamma_beta) + " is outside [0, 1)");
}

// gamma_beta[i - 1] holds gamma * beta_i for i = 1 .. n-1.
Weights weights_from_discounted(std::size_t n, std::span<const double> gamma_beta) {
    Weights out;
    out.w.resize(n);
    const long double log_n = std::log(static_cast<long double>(n));
    long double log_ratio = 0.0L;  // sum_{i=n-k}^{n-1} log(1 + gamma beta_i / i)
    long double sum_sq = 0.0L;
    for (std::size_t k = 0; k < n; ++k) {
        if (k > 0) {
            const std::size_t i = n - k;
            log_ratio += std::log1p(static_cast<long double>(gamma_beta[i - 1]) /
                                    static_cast<long double>(i));
        }
        const long double wk = std::exp(log_ratio - log_n);
        out.w[k] = static_cast<double>(wk);
        sum_sq += wk * wk;
    }
    out.alpha_n = out.w[n - 1];
    out.sum_sq = static_cast<double>(sum_sq);
    return out;
}

} // namespace

Weights weights(std::size_t n, double gamma, std::span<const double> beta) {
    if (n < 2) throw std::invalid_argument("weights: horizon must be >= 2");
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("weights: discount factor must lie in (0, 1)");
    if (beta.size() != n - 1)
        throw std::invalid_argument("weights: expected " + std::to_string(n - 1) +
                                    " error ratios, got " + std::to_string(beta.size()));
    std::vector<double> discounted(beta.size());
    for (std::size_t i = 0; i < beta.size(); ++i) {
        if (!(beta[i] >= 0.0 && beta[i] <= 1.0))
            throw std::invalid_argument("weights: error ratio beta_" + std::to_string(i + 1) +
                                        " = " + std::to_string(beta[i]) + " is outside [0, 1]");
        discounted[i] = gamma * beta[i];
    }
    return weights_from_discounted(n, discounted);
}

Weights weights_constant(std::size_t n, double gamma, double beta) {
    if (n < 2) throw std::invalid_argument("weights: horizon must be >= 2");
    const std::vector<double> seq(n - 1, beta);
    return weights(n, gamma, seq);
}

double thm2_bound(std::size_t n, double gamma_beta) {
    require_regime(gamma_beta, "thm2_bound");
    if (n < 3) throw std::invalid_argument("thm2_bound: horizon must be >= 3");
    const double nn = static_cast<double>(n);
    const double two_gb = 2.0 * gamma_beta;
    if (gamma_beta == 0.5)
        return std::pow(nn - 2.0, two_gb) / (nn * nn) * std::exp(two_gb) * (1.0 + std::log(nn));
    const double c = 1.0 - two_gb;
    return std::exp(two_gb) / std::pow(nn, 2.0 - two_gb) *
           (std::pow(nn, c) / c - 1.0 / c + 1.0);
}

double thm3_bound(std::size_t n, double gamma_beta) {
    require_regime(gamma_beta, "thm3_bound");
    if (n < 1) throw std::invalid_argument("thm3_bound: horizon must be >= 1");
    const double constant = (1.0 + gamma_beta) * std::exp((0.5 - std::log(2.0)) * gamma_beta);
    return constant / std::pow(static_cast<double>(n), 1.0 - gamma_beta);
}

double error_bound(std::size_t n, double e1, double delta, double gamma,
                   std::span<const double> beta) {
    if (!(delta > 0.0 && delta <= 1.0))
        throw std::invalid_argument("error_bound: delta must lie in (0, 1]");
    const auto coeffs = weights(n, gamma, beta);
    return coeffs.alpha_n * e1 + std::sqrt(std::log(1.0 / delta) * coeffs.sum_sq / 2.0);
}

HoeffdingReport hoeffding_check(std::span<const double> weight_seq, std::size_t n_trials, Rng& rng,
                                double a, double b) {
    if (!(b > a)) throw std::invalid_argument("hoeffding_check: need a < b");
    for (double w : weight_seq)
        if (!std::isfinite(w)) throw std::invalid_argument("hoeffding_check: weights must be finite");
    HoeffdingReport report;
    report.trials = n_trials;
    long double sum_sq = 0.0L;
    for (double w : weight_seq) sum_sq += static_cast<long double>(w) * w;
    const double span_sq = (b - a) * (b - a);
    for (std::size_t j = 0; j < report.deltas.size(); ++j)
        report.thresholds[j] =
            std::sqrt(0.5 * std::log(1.0 / report.deltas[j]) * static_cast<double>(sum_sq) * span_sq);

    const double mean = 0.5 * (a + b);
    std::array<std::size_t, 3> exceed{};
    for (std::size_t trial = 0; trial < n_trials; ++trial) {
        double deviation = 0.0;
        for (double w : weight_seq) deviation += w * (rng.uniform(a, b) - mean);
        for (std::size_t j = 0; j < exceed.size(); ++j)
            if (deviation > report.thresholds[j]) ++exceed[j];
    }
    for (std::size_t j = 0; j < exceed.size(); ++j)
        report.violation_rates[j] =
            n_trials == 0 ? 0.0 : static_cast<double>(exceed[j]) / static_cast<double>(n_trials);
    return report;
}

bool sum_log_inequality_check(std::size_t a, std::size_t b) {
    if (a < 1 || a >= b) throw std::invalid_argument("sum_log_inequality_check: need 1 <= a < b");
    long double sum = 0.0L;
    for (std::size_t i = a; i <= b; ++i) sum += 1.0L / static_cast<long double>(i);
    const long double bound =
        1.0L / a + std::log1p(static_cast<long double>(b - a) / static_cast<long double>(a));
    return sum <= bound;
}

std::size_t sum_log_inequality_sweep(std::size_t max_b) {
    std::size_t failures = 0;
    for (std::size_t a = 1; a < max_b; ++a) {
        const long double inv_a = 1.0L / static_cast<long double>(a);
        long double sum = inv_a;
        for (std::size_t b = a + 1; b <= max_b; ++b) {
            sum += 1.0L / static_cast<long double>(b);
            const long double bound =
                inv_a + std::log1p(static_cast<long double>(b - a) / static_cast<long double>(a));
            if (!(sum <= bound)) ++failures;
        }
    }
    return failures;
}

std::vector<BoundsRow> bounds_grid(std::span<const std::size_t> horizons,
                                   std::span<const double> gamma_betas) {
    std::vector<BoundsRow> rows;
    for (std::size_t n : horizons) {
        for (double gb : gamma_betas) {
            require_regime(gb, "bounds_grid");
            const std::vector<double> seq(n - 1, gb);
            const auto coeffs = weights_from_discounted(n, seq);
            BoundsRow row;
            row.n = n;
            row.gamma_beta = gb;
            row.exact_sum = coeffs.sum_sq;
            row.thm2 = thm2_bound(n, gb);
            row.exact_alpha = coeffs.alpha_n;
            row.thm3 = thm3_bound(n, gb);
            row.sum_ok = row.exact_sum <= row.thm2;
            row.alpha_ok = row.exact_alpha <= row.thm3;
            rows.push_back(row);
        }
    }
    return rows;
}

double sum_sq_loglog_slope(std::span<const std::size_t> horizons, double gamma_beta) {
    require_regime(gamma_beta, "sum_sq_loglog_slope");
    if (horizons.size() < 2) throw std::invalid_argument("sum_sq_loglog_slope: need two horizons");
    std::vector<double> xs;
    std::vector<double> ys;
    for (std::size_t n : horizons) {
        const std::vector<double> seq(n - 1, gamma_beta);
        xs.push_back(std::log(static_cast<double>(n)));
        ys.push_back(std::log(weights_from_discounted(n, seq).sum_sq));
    }
    const double m = static_cast<double>(xs.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= m;
    my /= m;
    double sxy = 0.0;
    double sxx = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return sxy / sxx;
}

} // namespace ttql
