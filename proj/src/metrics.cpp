#include "ttql/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace ttql {

namespace detail {

double max_abs_diff(std::span<const double> a, std::span<const double> b) noexcept {
    // Independent lanes break the max dependency chain; max is exact, so order is irrelevant.
    double lane[4] = {0.0, 0.0, 0.0, 0.0};
    const std::size_t n = a.size();
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4)
        for (std::size_t k = 0; k < 4; ++k) lane[k] = std::max(lane[k], std::abs(a[i + k] - b[i + k]));
    for (; i < n; ++i) lane[0] = std::max(lane[0], std::abs(a[i] - b[i]));
    return std::max(std::max(lane[0], lane[1]), std::max(lane[2], lane[3]));
}

} // namespace detail

double mne(const QTable& q, const QTable& q_star) {
    if (!q.same_shape(q_star)) throw std::invalid_argument("mne: Q-table shapes differ");
    return detail::max_abs_diff(q.values(), q_star.values());
}

double mnbe_exact(const QTable& q, const Mdp& mdp) {
    if (!mdp.shape_matches(q))
        throw std::invalid_argument("mnbe_exact: Q-table shape does not match the MDP");
    std::vector<double> v(mdp.n_states());
    detail::state_max_into(q.values(), q.n_states(), q.n_actions(), v);
    std::vector<double> backup(mdp.n_pairs());
    detail::bellman_from_state_values(mdp, v, backup);
    return detail::max_abs_diff(q.values(), backup);
}

double mnbe_sampled(const QTable& q, const Mdp& mdp, std::size_t draws_per_pair, Rng& rng) {
    if (!mdp.shape_matches(q))
        throw std::invalid_argument("mnbe_sampled: Q-table shape does not match the MDP");
    if (draws_per_pair == 0) throw std::invalid_argument("mnbe_sampled: need at least one draw");
    const auto v = state_max(q);
    const std::size_t pairs = mdp.n_pairs();
    const std::uint64_t first = rng.reserve(static_cast<std::uint64_t>(pairs * draws_per_pair));
    double worst = 0.0;
    for (std::size_t pair = 0; pair < pairs; ++pair) {
        const StateIndex s = pair / mdp.n_actions();
        const ActionIndex a = pair % mdp.n_actions();
        const std::uint64_t base = first + pair * draws_per_pair;
        double sum = 0.0;
        for (std::size_t k = 0; k < draws_per_pair; ++k)
            sum += v[mdp.next_state_from_bits(pair, rng.at_u64(base + k))];
        const double backup =
            mdp.reward(s, a) + mdp.gamma() * (sum / static_cast<double>(draws_per_pair));
        worst = std::max(worst, std::abs(q.values()[pair] - backup));
    }
    return worst;
}

ErrorPair error_pair(const QTable& q, const QTable& q_star, const Mdp& mdp) {
    ErrorPair out;
    out.mne = mne(q, q_star);
    out.mnbe = mnbe_exact(q, mdp);
    out.proxy_bound = out.mnbe / (1.0 - mdp.gamma());
    return out;
}

} // namespace ttql
