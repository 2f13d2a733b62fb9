#pragma once

#include "ttql/mdp.hpp"
#include "ttql/rng.hpp"

#include <cstddef>

namespace ttql {

/// Max-norm error and max-norm Bellman error of one table, plus the proxy
/// bound mnbe / (1 - gamma) that always dominates mne.
struct ErrorPair {
    double mne = 0.0;
    double mnbe = 0.0;
    double proxy_bound = 0.0;
};

/// max_{s,a} |q - q_star|.
[[nodiscard]] double mne(const QTable& q, const QTable& q_star);

/// max_{s,a} |q - T* q| using the exact model expectation.
[[nodiscard]] double mnbe_exact(const QTable& q, const Mdp& mdp);

/**
 * Bellman error with the expectation over s' replaced by the mean of
 * `draws_per_pair` samples per (s, a).
 *
 * Pair (s, a) uses counters [first + (s*A + a) * draws, ...) of `rng`, so the
 * value does not depend on the order pairs are visited in.
 */
[[nodiscard]] double mnbe_sampled(const QTable& q, const Mdp& mdp, std::size_t draws_per_pair,
                                  Rng& rng);

[[nodiscard]] ErrorPair error_pair(const QTable& q, const QTable& q_star, const Mdp& mdp);

namespace detail {

/// Sup-norm distance between two equally sized spans.
[[nodiscard]] double max_abs_diff(std::span<const double> a, std::span<const double> b) noexcept;

} // namespace detail

} // namespace ttql
