#include "ttql/generators.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace ttql {

namespace {

constexpr double gamma_margin = 1e-6;

std::vector<double> random_row(std::size_t n, Rng& rng) {
    std::vector<double> row(n);
    double sum = 0.0;
    for (double& p : row) {
        p = rng.uniform();
        sum += p;
    }
    if (sum > 0.0) {
        for (double& p : row) p /= sum;
    } else {
        std::fill(row.begin(), row.end(), 1.0 / static_cast<double>(n));
    }
    return row;
}

struct ChainState {
    const Mdp* rewards;
    const Mdp* transitions;
    double gamma;
};

DeltaTildeBreakdown evaluate_chain(const Mdp& start, const Mdp& other, int start_index,
                                   const std::array<PerturbAxis, 3>& order, double dr, double dp) {
    DeltaTildeBreakdown out;
    out.chosen_combo.chain_order = order;
    out.chosen_combo.chain_start = start_index;
    ChainState cur{&start, &start, start.gamma()};
    for (PerturbAxis axis : order) {
        switch (axis) {
        case PerturbAxis::reward:
            out.reward_term = dr / (1.0 - cur.gamma);
            out.chosen_combo.gamma_reward_term = cur.gamma;
            cur.rewards = &other;
            break;
        case PerturbAxis::transition: {
            const double norm = reward_sup_norm(*cur.rewards);
            const double g = cur.gamma;
            out.transition_term = g * norm / ((1.0 - g) * (1.0 - g)) * dp;
            out.chosen_combo.gamma_transition_term = g;
            out.chosen_combo.reward_norm_transition_term = norm;
            cur.transitions = &other;
            break;
        }
        case PerturbAxis::gamma: {
            const double norm = reward_sup_norm(*cur.rewards);
            const double g1 = start.gamma();
            const double g2 = other.gamma();
            out.gamma_term = std::abs(g1 - g2) / ((1.0 - g1) * (1.0 - g2)) * norm;
            out.chosen_combo.reward_norm_gamma_term = norm;
            cur.gamma = other.gamma();
            break;
        }
        }
    }
    out.total = out.reward_term + out.transition_term + out.gamma_term;
    return out;
}

} // namespace

std::string_view to_string(PerturbAxis axis) noexcept {
    switch (axis) {
    case PerturbAxis::gamma: return "gamma";
    case PerturbAxis::reward: return "reward";
    case PerturbAxis::transition: return "transition";
    }
    return "unknown";
}

PerturbAxis parse_perturb_axis(std::string_view text) {
    if (text == "gamma" || text == "g") return PerturbAxis::gamma;
    if (text == "reward" || text == "r") return PerturbAxis::reward;
    if (text == "transition" || text == "p" || text == "P") return PerturbAxis::transition;
    throw std::invalid_argument("unknown perturbation axis '" + std::string(text) + "'");
}

void validate_perturbation(const PerturbSpec& spec, double gamma) {
    if (!std::isfinite(spec.epsilon) || spec.epsilon < 0.0)
        throw std::invalid_argument("perturbation magnitude must be finite and >= 0");
    switch (spec.axis) {
    case PerturbAxis::gamma:
        if (gamma + spec.epsilon >= 1.0)
            throw std::invalid_argument("gamma perturbation infeasible: " + std::to_string(gamma) +
                                        " + " + std::to_string(spec.epsilon) + " >= 1");
        break;
    case PerturbAxis::transition:
        if (spec.epsilon > 1.0)
            throw std::invalid_argument("transition mixture weight must be <= 1");
        break;
    case PerturbAxis::reward: break;
    }
}

Mdp random_mdp(std::size_t n_states, std::size_t n_actions, double gamma, Rng& rng) {
    if (n_states == 0 || n_actions == 0)
        throw std::invalid_argument("random_mdp: sizes must be >= 1");
    const std::size_t pairs = n_states * n_actions;
    std::vector<double> reward(pairs);
    for (double& r : reward) r = rng.uniform();
    std::vector<double> transition;
    transition.reserve(pairs * n_states);
    for (std::size_t pair = 0; pair < pairs; ++pair) {
        const auto row = random_row(n_states, rng);
        transition.insert(transition.end(), row.begin(), row.end());
    }
    return Mdp(n_states, n_actions, std::move(reward), std::move(transition), gamma);
}

Mdp perturb(const Mdp& mdp, const PerturbSpec& spec, Rng& rng) {
    validate_perturbation(spec, mdp.gamma());
    const double eps = spec.epsilon;
    std::vector<double> reward(mdp.rewards().begin(), mdp.rewards().end());
    std::vector<double> transition(mdp.transitions().begin(), mdp.transitions().end());
    double gamma = mdp.gamma();
    auto normalization = RowNormalization::strict;

    switch (spec.axis) {
    case PerturbAxis::gamma:
        gamma = std::clamp(gamma + eps, gamma_margin, 1.0 - gamma_margin);
        break;
    case PerturbAxis::reward:
        for (double& r : reward) r = std::clamp(r + eps * rng.uniform(-1.0, 1.0), 0.0, 1.0);
        break;
    case PerturbAxis::transition: {
        const std::size_t n = mdp.n_states();
        for (std::size_t pair = 0; pair < mdp.n_pairs(); ++pair) {
            const auto fresh = random_row(n, rng);
            for (std::size_t j = 0; j < n; ++j) {
                double& p = transition[pair * n + j];
                p = (1.0 - eps) * p + eps * fresh[j];
            }
        }
        if (eps > 0.0) normalization = RowNormalization::renormalize;
        break;
    }
    }
    return Mdp(mdp.n_states(), mdp.n_actions(), std::move(reward), std::move(transition), gamma,
               normalization);
}

double reward_distance(const Mdp& m1, const Mdp& m2) {
    if (!m1.same_spaces(m2)) throw std::invalid_argument("reward_distance: spaces differ");
    double worst = 0.0;
    for (std::size_t i = 0; i < m1.n_pairs(); ++i)
        worst = std::max(worst, std::abs(m1.rewards()[i] - m2.rewards()[i]));
    return worst;
}

double transition_distance(const Mdp& m1, const Mdp& m2) {
    if (!m1.same_spaces(m2)) throw std::invalid_argument("transition_distance: spaces differ");
    const std::size_t n = m1.n_states();
    double worst = 0.0;
    for (std::size_t pair = 0; pair < m1.n_pairs(); ++pair) {
        double l1 = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            l1 += std::abs(m1.transitions()[pair * n + j] - m2.transitions()[pair * n + j]);
        worst = std::max(worst, l1);
    }
    return worst;
}

double reward_sup_norm(const Mdp& mdp) {
    double worst = 0.0;
    for (double r : mdp.rewards()) worst = std::max(worst, std::abs(r));
    return worst;
}

DeltaTildeBreakdown delta_tilde_bound(const Mdp& m1, const Mdp& m2, BoundSearch search) {
    if (!m1.same_spaces(m2))
        throw std::invalid_argument("delta_tilde_bound: MDPs have different state/action spaces");
    const double dr = reward_distance(m1, m2);
    const double dp = transition_distance(m1, m2);

    if (search == BoundSearch::proof_chain) {
        bool start_first = m1.gamma() < m2.gamma();
        if (m1.gamma() == m2.gamma()) start_first = reward_sup_norm(m1) >= reward_sup_norm(m2);
        const std::array order{PerturbAxis::reward, PerturbAxis::transition, PerturbAxis::gamma};
        return start_first ? evaluate_chain(m1, m2, 1, order, dr, dp)
                           : evaluate_chain(m2, m1, 2, order, dr, dp);
    }

    std::array order{PerturbAxis::gamma, PerturbAxis::reward, PerturbAxis::transition};
    std::sort(order.begin(), order.end());
    std::optional<DeltaTildeBreakdown> best;
    do {
        for (int start = 1; start <= 2; ++start) {
            auto candidate = start == 1 ? evaluate_chain(m1, m2, 1, order, dr, dp)
                                        : evaluate_chain(m2, m1, 2, order, dr, dp);
            if (!best || candidate.total < best->total) best = candidate;
        }
    } while (std::next_permutation(order.begin(), order.end()));
    return *best;
}

} // namespace ttql
