#include "ttql/oracle.hpp"

#include "ttql/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

namespace ttql {

std::size_t default_iteration_cap(double gamma, double tol) {
    const double steps = std::ceil(std::log(tol * (1.0 - gamma)) / std::log(gamma));
    if (!std::isfinite(steps) || steps < 1.0) return 10;
    return 10 * static_cast<std::size_t>(steps);
}

SolveReport solve_q_star(const Mdp& mdp, double tol, std::optional<std::size_t> max_iterations) {
    if (!(tol > 0.0)) throw std::invalid_argument("solve_q_star: tolerance must be positive");
    const double gamma = mdp.gamma();
    const double certificate = gamma / (1.0 - gamma);
    const std::size_t cap = max_iterations.value_or(default_iteration_cap(gamma, tol));

    std::vector<double> q(mdp.n_pairs(), 0.0);
    std::vector<double> next(mdp.n_pairs());
    std::vector<double> v(mdp.n_states());
    for (std::size_t it = 1; it <= cap; ++it) {
        detail::state_max_into(q, mdp.n_states(), mdp.n_actions(), v);
        detail::bellman_from_state_values(mdp, v, next);
        double residual = 0.0;
        for (std::size_t i = 0; i < next.size(); ++i)
            residual = std::max(residual, std::abs(next[i] - q[i]));
        q.swap(next);
        if (residual * certificate <= tol) {
            return SolveReport{QTable(mdp.n_states(), mdp.n_actions(), std::move(q)), it, residual,
                               residual * certificate};
        }
    }
    throw NonConvergenceError("solve_q_star: no convergence to tolerance " + std::to_string(tol) +
                              " within " + std::to_string(cap) + " iterations");
}

double mdp_distance(const Mdp& m1, const Mdp& m2, double tol) {
    if (!m1.same_spaces(m2))
        throw std::invalid_argument("mdp_distance: MDPs have different state/action spaces");
    const auto q1 = solve_q_star(m1, tol / 2.0);
    const auto q2 = solve_q_star(m2, tol / 2.0);
    return mne(q1.q_star, q2.q_star);
}

} // namespace ttql
