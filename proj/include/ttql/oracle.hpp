#pragma once

#include "ttql/mdp.hpp"

#include <cstddef>
#include <optional>
#include <stdexcept>

namespace ttql {

/// Value iteration hit its iteration cap; usually a malformed MDP.
class NonConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SolveReport {
    QTable q_star;
    std::size_t iterations = 0;
    /// Sup-norm length of the last value-iteration step.
    double residual = 0.0;
    /// residual * gamma / (1 - gamma); bounds the distance to the true Q*.
    double guaranteed_mne = 0.0;
};

/// Default cap: 10 * ceil(ln(tol * (1 - gamma)) / ln(gamma)), at least 10.
[[nodiscard]] std::size_t default_iteration_cap(double gamma, double tol);

/**
 * Certified value iteration from the zero table.
 *
 * Iterates Q <- T* Q and stops as soon as the contraction certificate
 * ||Q_{k+1} - Q_k|| * gamma / (1 - gamma) drops to `tol`, returning Q_{k+1}.
 * Throws NonConvergenceError when `max_iterations` (default_iteration_cap when
 * absent) is exceeded and std::invalid_argument when tol <= 0.
 */
[[nodiscard]] SolveReport solve_q_star(const Mdp& mdp, double tol,
                                       std::optional<std::size_t> max_iterations = std::nullopt);

/// max |Q*_1 - Q*_2| with each Q* certified to tol / 2, so the result is within +-tol.
[[nodiscard]] double mdp_distance(const Mdp& m1, const Mdp& m2, double tol);

} // namespace ttql
