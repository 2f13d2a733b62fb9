#pragma once

#include "ttql/mdp.hpp"
#include "ttql/rng.hpp"

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace ttql {

enum class PerturbAxis { gamma, reward, transition };

[[nodiscard]] std::string_view to_string(PerturbAxis axis) noexcept;
/// Accepts "gamma", "reward"/"r", "transition"/"p"; throws std::invalid_argument otherwise.
[[nodiscard]] PerturbAxis parse_perturb_axis(std::string_view text);

/**
 * A single-component perturbation of magnitude epsilon >= 0.
 *
 *  - gamma:      gamma' = gamma + epsilon, kept inside (1e-6, 1 - 1e-6);
 *                infeasible when gamma + epsilon >= 1.
 *  - reward:     r'(s,a) = clamp(r(s,a) + epsilon * u(s,a), 0, 1), u ~ U[-1, 1].
 *  - transition: P'(.|s,a) = (1 - epsilon) P(.|s,a) + epsilon U(.|s,a) with U a
 *                fresh random distribution per pair; epsilon <= 1.
 */
struct PerturbSpec {
    PerturbAxis axis = PerturbAxis::reward;
    double epsilon = 0.0;

    friend bool operator==(const PerturbSpec&, const PerturbSpec&) = default;
};

/// Throws std::invalid_argument when `spec` cannot be applied to an MDP with discount `gamma`.
void validate_perturbation(const PerturbSpec& spec, double gamma);

/// Rewards i.i.d. U[0, 1]; each transition row is a normalised vector of i.i.d. U[0, 1) draws.
[[nodiscard]] Mdp random_mdp(std::size_t n_states, std::size_t n_actions, double gamma, Rng& rng);

/**
 * Perturbed copy of `mdp`.
 *
 * The draws consumed from `rng` do not depend on epsilon, so perturbations of
 * different magnitudes made from equal generators share their noise and grow
 * monotonically along the axis.
 */
[[nodiscard]] Mdp perturb(const Mdp& mdp, const PerturbSpec& spec, Rng& rng);

/// max_{s,a} |r1 - r2|.
[[nodiscard]] double reward_distance(const Mdp& m1, const Mdp& m2);
/// max_{s,a} sum_{s'} |P1(s'|s,a) - P2(s'|s,a)|.
[[nodiscard]] double transition_distance(const Mdp& m1, const Mdp& m2);
/// max_{s,a} |r(s,a)|.
[[nodiscard]] double reward_sup_norm(const Mdp& mdp);

/// Where the discounts and reward norms of the closed-form bound came from.
struct BoundCombination {
    double gamma_reward_term = 0.0;      ///< discount in the reward term
    double gamma_transition_term = 0.0;  ///< discount in the transition term
    double reward_norm_transition_term = 0.0;
    double reward_norm_gamma_term = 0.0;
    /// Order in which the auxiliary chain swaps components, e.g. {reward, transition, gamma}.
    std::array<PerturbAxis, 3> chain_order{PerturbAxis::reward, PerturbAxis::transition,
                                           PerturbAxis::gamma};
    /// 1 or 2: the MDP the auxiliary chain starts from.
    int chain_start = 1;
};

struct DeltaTildeBreakdown {
    double reward_term = 0.0;
    double transition_term = 0.0;
    double gamma_term = 0.0;
    double total = 0.0;
    BoundCombination chosen_combo;
};

enum class BoundSearch {
    /// Start the chain at the MDP with the smaller discount, swapping reward,
    /// then transitions, then discount. On equal discounts start at the MDP
    /// with the larger reward norm.
    proof_chain,
    /// Minimum over every chain start and swap order; each is a valid bound.
    all_chains,
};

/**
 * Closed-form upper bound on ||Q*_1 - Q*_2||_inf:
 *
 *   ||r1 - r2|| / (1 - g')  +  g'' ||r'|| / (1 - g'')^2 * ||P1 - P2||
 *     + |g1 - g2| / ((1 - g1)(1 - g2)) * ||r''||
 *
 * where (g', g'', r', r'') are read off a chain of auxiliary MDPs that swaps one
 * component at a time from one MDP to the other. ||P1 - P2|| is the largest L1
 * distance between corresponding next-state distributions.
 */
[[nodiscard]] DeltaTildeBreakdown delta_tilde_bound(const Mdp& m1, const Mdp& m2,
                                                    BoundSearch search = BoundSearch::proof_chain);

} // namespace ttql
