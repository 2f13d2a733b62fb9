#pragma once

#include "ttql/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace ttql {

using StateIndex = std::size_t;
using ActionIndex = std::size_t;

/// Row-stochasticity tolerance applied when an Mdp is constructed.
inline constexpr double stochastic_tolerance = 1e-12;

/**
 * State-action value table, stored row-major as values[s * n_actions + a].
 *
 * Immutable once built; operators return new tables.
 */
class QTable {
public:
    QTable(std::size_t n_states, std::size_t n_actions, double fill = 0.0);
    /// Throws std::invalid_argument on a size mismatch or a non-finite entry.
    QTable(std::size_t n_states, std::size_t n_actions, std::vector<double> values);

    [[nodiscard]] std::size_t n_states() const noexcept { return n_states_; }
    [[nodiscard]] std::size_t n_actions() const noexcept { return n_actions_; }
    [[nodiscard]] std::size_t size() const noexcept { return values_.size(); }

    [[nodiscard]] double operator()(StateIndex s, ActionIndex a) const noexcept {
        return values_[s * n_actions_ + a];
    }
    [[nodiscard]] std::span<const double> values() const noexcept { return values_; }
    [[nodiscard]] std::span<const double> row(StateIndex s) const noexcept {
        return std::span<const double>(values_).subspan(s * n_actions_, n_actions_);
    }
    [[nodiscard]] bool same_shape(const QTable& other) const noexcept {
        return n_states_ == other.n_states_ && n_actions_ == other.n_actions_;
    }

    friend bool operator==(const QTable&, const QTable&) = default;

private:
    std::size_t n_states_;
    std::size_t n_actions_;
    std::vector<double> values_;
};

enum class RowNormalization {
    /// Reject rows whose sum is off by more than stochastic_tolerance.
    strict,
    /// Divide every row by its sum before validating.
    renormalize,
};

/**
 * Finite discounted MDP with dense transition tensor.
 *
 * reward[s * A + a] holds r(s, a) and transition[(s * A + a) * S + s'] holds
 * P(s' | s, a). Construction validates that every row is a distribution, that
 * rewards lie in [0, 1] and that 0 < gamma < 1; violations throw
 * std::invalid_argument.
 *
 * Alongside the row-major tensor the object keeps a next-state-major copy for
 * vectorised expectations and per-row alias tables for O(1) sampling.
 */
namespace detail {
struct AliasSlot {
    std::uint32_t threshold;
    std::uint32_t alias;
};
} // namespace detail

class Mdp {
public:
    Mdp(std::size_t n_states, std::size_t n_actions, std::vector<double> reward,
        std::vector<double> transition, double gamma,
        RowNormalization normalization = RowNormalization::strict);

    [[nodiscard]] std::size_t n_states() const noexcept { return n_states_; }
    [[nodiscard]] std::size_t n_actions() const noexcept { return n_actions_; }
    [[nodiscard]] std::size_t n_pairs() const noexcept { return n_states_ * n_actions_; }
    [[nodiscard]] double gamma() const noexcept { return gamma_; }

    [[nodiscard]] double reward(StateIndex s, ActionIndex a) const noexcept {
        return reward_[s * n_actions_ + a];
    }
    [[nodiscard]] double transition(StateIndex s, ActionIndex a, StateIndex next) const noexcept {
        return transition_[(s * n_actions_ + a) * n_states_ + next];
    }
    [[nodiscard]] std::span<const double> transition_row(StateIndex s, ActionIndex a) const noexcept {
        return std::span<const double>(transition_).subspan((s * n_actions_ + a) * n_states_,
                                                            n_states_);
    }
    [[nodiscard]] std::span<const double> rewards() const noexcept { return reward_; }
    [[nodiscard]] std::span<const double> transitions() const noexcept { return transition_; }

    /**
     * Maps 64 random bits to a next state of pair index s * A + a (alias method).
     *
     * The high 32 bits pick a column by multiply-shift, the low 32 bits are
     * compared with that column's threshold.
     */
    [[nodiscard]] StateIndex next_state_from_bits(std::size_t pair, std::uint64_t bits) const noexcept {
        const std::uint64_t column = ((bits >> 32) * n_states_) >> 32;
        const detail::AliasSlot& slot = alias_[pair * n_states_ + column];
        const std::uint64_t keep = 0 - static_cast<std::uint64_t>((bits & 0xffffffffULL) < slot.threshold);
        return slot.alias ^ ((column ^ slot.alias) & keep);
    }

    /// next[pair] = next_state_from_bits(pair, rng.at_u64(first_counter + pair)) for every pair.
    void sample_all(const Rng& rng, std::uint64_t first_counter, std::span<std::uint32_t> next) const;

    /// out[s * A + a] = sum_{s'} P(s' | s, a) * v[s'], summed in ascending s' order.
    void expect_next(std::span<const double> v, std::span<double> out) const;

    [[nodiscard]] bool same_spaces(const Mdp& other) const noexcept {
        return n_states_ == other.n_states_ && n_actions_ == other.n_actions_;
    }
    [[nodiscard]] bool shape_matches(const QTable& q) const noexcept {
        return q.n_states() == n_states_ && q.n_actions() == n_actions_;
    }

    friend bool operator==(const Mdp& lhs, const Mdp& rhs) noexcept {
        return lhs.n_states_ == rhs.n_states_ && lhs.n_actions_ == rhs.n_actions_ &&
               lhs.gamma_ == rhs.gamma_ && lhs.reward_ == rhs.reward_ &&
               lhs.transition_ == rhs.transition_;
    }

private:
    void build_caches();

    std::size_t n_states_;
    std::size_t n_actions_;
    double gamma_;
    std::vector<double> reward_;
    std::vector<double> transition_;
    std::vector<double> by_next_state_;
    std::vector<detail::AliasSlot> alias_;
};

/// (T* q)(s, a) = r(s, a) + gamma * sum_{s'} P(s' | s, a) max_a' q(s', a').
[[nodiscard]] QTable bellman_optimal(const QTable& q, const Mdp& mdp);

/// Draws s' ~ P(. | s, a) using one 64-bit output of `rng`.
[[nodiscard]] StateIndex sample_next_state(const Mdp& mdp, StateIndex s, ActionIndex a, Rng& rng);

/// Greedy action and value at state s; ties go to the lowest action index.
[[nodiscard]] std::pair<ActionIndex, double> greedy_max(const QTable& q, StateIndex s);

/// max_a q(s, a) for every state.
[[nodiscard]] std::vector<double> state_max(const QTable& q);

namespace detail {

void state_max_into(std::span<const double> q, std::size_t n_states, std::size_t n_actions,
                    std::span<double> out) noexcept;

/// out = r + gamma * P v, where v is already a per-state value vector.
void bellman_from_state_values(const Mdp& mdp, std::span<const double> v, std::span<double> out);

} // namespace detail

} // namespace ttql
