#include "ttql/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>


namespace ttql {

QTable::QTable(std::size_t n_states, std::size_t n_actions, double fill)
    : n_states_(n_states), n_actions_(n_actions), values_(n_states * n_actions, fill) {
    if (n_states == 0 || n_actions == 0)
        throw std::invalid_argument("QTable: state and action counts must be positive");
    if (!std::isfinite(fill)) throw std::invalid_argument("QTable: fill value must be finite");
}

QTable::QTable(std::size_t n_states, std::size_t n_actions, std::vector<double> values)
    : n_states_(n_states), n_actions_(n_actions), values_(std::move(values)) {
    if (n_states == 0 || n_actions == 0)
        throw std::invalid_argument("QTable: state and action counts must be positive");
    if (values_.size() != n_states * n_actions)
        throw std::invalid_argument("QTable: expected " + std::to_string(n_states * n_actions) +
                                    " values, got " + std::to_string(values_.size()));
    for (double v : values_)
        if (!std::isfinite(v)) throw std::invalid_argument("QTable: entries must be finite");
}

Mdp::Mdp(std::size_t n_states, std::size_t n_actions, std::vector<double> reward,
         std::vector<double> transition, double gamma, RowNormalization normalization)
    : n_states_(n_states), n_actions_(n_actions), gamma_(gamma), reward_(std::move(reward)),
      transition_(std::move(transition)) {
    if (n_states == 0 || n_actions == 0)
        throw std::invalid_argument("Mdp: state and action counts must be positive");
    if (n_states > 0xffffffffULL) throw std::invalid_argument("Mdp: too many states");
    if (!(gamma > 0.0 && gamma < 1.0))
        throw std::invalid_argument("Mdp: discount factor must lie in (0, 1)");
    const std::size_t pairs = n_states * n_actions;
    if (reward_.size() != pairs)
        throw std::invalid_argument("Mdp: reward table has " + std::to_string(reward_.size()) +
                                    " entries, expected " + std::to_string(pairs));
    if (transition_.size() != pairs * n_states)
        throw std::invalid_argument("Mdp: transition tensor has " +
                                    std::to_string(transition_.size()) + " entries, expected " +
                                    std::to_string(pairs * n_states));
    for (double r : reward_)
        if (!(r >= 0.0 && r <= 1.0)) throw std::invalid_argument("Mdp: rewards must lie in [0, 1]");

    for (std::size_t pair = 0; pair < pairs; ++pair) {
        auto row = std::span<double>(transition_).subspan(pair * n_states, n_states);
        double sum = 0.0;
        for (double p : row) {
            if (!(p >= 0.0) || !std::isfinite(p))
                throw std::invalid_argument("Mdp: transition probabilities must be finite and >= 0");
            sum += p;
        }
        if (normalization == RowNormalization::renormalize) {
            if (!(sum > 0.0)) throw std::invalid_argument("Mdp: cannot renormalize an all-zero row");
            for (double& p : row) p /= sum;
            sum = 0.0;
            for (double p : row) sum += p;
        }
        if (std::abs(sum - 1.0) > stochastic_tolerance)
            throw std::invalid_argument("Mdp: transition row for state " +
                                        std::to_string(pair / n_actions) + ", action " +
                                        std::to_string(pair % n_actions) + " sums to " +
                                        std::to_string(sum));
    }
    build_caches();
}

void Mdp::build_caches() {
    const std::size_t pairs = n_pairs();
    by_next_state_.assign(pairs * n_states_, 0.0);
    for (std::size_t pair = 0; pair < pairs; ++pair)
        for (std::size_t next = 0; next < n_states_; ++next)
            by_next_state_[next * pairs + pair] = transition_[pair * n_states_ + next];

    // Vose alias tables, one per (s, a) row. Construction order is fixed so the
    // tables (and thus every sampled trajectory) are reproducible. A slot whose
    // column carries full probability aliases to itself.
    alias_.assign(pairs * n_states_, detail::AliasSlot{0, 0});
    std::vector<double> scaled(n_states_);
    std::vector<std::uint32_t> small;
    std::vector<std::uint32_t> large;
    const double n = static_cast<double>(n_states_);
    for (std::size_t pair = 0; pair < pairs; ++pair) {
        detail::AliasSlot* slots = alias_.data() + pair * n_states_;
        small.clear();
        large.clear();
        for (std::size_t j = 0; j < n_states_; ++j) {
            scaled[j] = transition_[pair * n_states_ + j] * n;
            (scaled[j] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(j));
        }
        while (!small.empty() && !large.empty()) {
            const auto l = small.back();
            small.pop_back();
            const auto g = large.back();
            const double cut = std::floor(std::max(scaled[l], 0.0) * 0x1.0p32);
            slots[l] = detail::AliasSlot{static_cast<std::uint32_t>(cut), g};
            scaled[g] = (scaled[g] + scaled[l]) - 1.0;
            if (scaled[g] < 1.0) {
                large.pop_back();
                small.push_back(g);
            }
        }
        // Leftovers carry probability 1 up to rounding.
        for (auto j : large) slots[j] = detail::AliasSlot{0, j};
        for (auto j : small) slots[j] = detail::AliasSlot{0, j};
    }
}

namespace {

// Each pair accumulates in ascending s' order; lanes run across pairs, so the
// wider clones give the same bits as the baseline one.
#if defined(__x86_64__) && defined(__GNUC__) && !defined(__clang__)
__attribute__((target_clones("avx2", "default")))
#endif
void expect_next_kernel(const double* __restrict by_next, const double* __restrict v,
                        double* __restrict acc, std::size_t pairs, std::size_t n_states) {
    std::fill(acc, acc + pairs, 0.0);
    std::size_t next = 0;
    for (; next + 8 <= n_states; next += 8) {
        const double* c = by_next + next * pairs;
        const double w0 = v[next], w1 = v[next + 1], w2 = v[next + 2], w3 = v[next + 3];
        const double w4 = v[next + 4], w5 = v[next + 5], w6 = v[next + 6], w7 = v[next + 7];
        for (std::size_t pair = 0; pair < pairs; ++pair) {
            double x = acc[pair];
            x += c[pair] * w0;
            x += c[pairs + pair] * w1;
            x += c[2 * pairs + pair] * w2;
            x += c[3 * pairs + pair] * w3;
            x += c[4 * pairs + pair] * w4;
            x += c[5 * pairs + pair] * w5;
            x += c[6 * pairs + pair] * w6;
            x += c[7 * pairs + pair] * w7;
            acc[pair] = x;
        }
    }
    for (; next < n_states; ++next) {
        const double value = v[next];
        const double* column = by_next + next * pairs;
        for (std::size_t pair = 0; pair < pairs; ++pair) acc[pair] += column[pair] * value;
    }
}

void sample_kernel(const detail::AliasSlot* slots, std::uint64_t key, std::uint64_t first,
                   std::size_t begin, std::size_t pairs, std::uint64_t n_states,
                   std::uint32_t* next) {
    for (std::size_t pair = begin; pair < pairs; ++pair) {
        const std::uint64_t bits = splitmix64_mix(key + (first + pair + 1) * 0x9e3779b97f4a7c15ULL);
        const std::uint64_t column = ((bits >> 32) * n_states) >> 32;
        const detail::AliasSlot slot = slots[pair * n_states + column];
        const std::uint32_t keep =
            0u - static_cast<std::uint32_t>(static_cast<std::uint32_t>(bits) < slot.threshold);
        next[pair] = slot.alias ^ ((static_cast<std::uint32_t>(column) ^ slot.alias) & keep);
    }
}

} // namespace

void Mdp::sample_all(const Rng& rng, std::uint64_t first_counter, std::span<std::uint32_t> next) const {
    if (next.size() != n_pairs()) throw std::invalid_argument("sample_all: output size mismatch");
    sample_kernel(alias_.data(), rng.key(), first_counter, 0, n_pairs(), n_states_, next.data());
}

void Mdp::expect_next(std::span<const double> v, std::span<double> out) const {
    expect_next_kernel(by_next_state_.data(), v.data(), out.data(), n_pairs(), n_states_);
}

namespace detail {

void state_max_into(std::span<const double> q, std::size_t n_states, std::size_t n_actions,
                    std::span<double> out) noexcept {
    for (std::size_t s = 0; s < n_states; ++s) {
        const double* row = q.data() + s * n_actions;
        double best = row[0];
        for (std::size_t a = 1; a < n_actions; ++a)
            if (row[a] > best) best = row[a];
        out[s] = best;
    }
}

void bellman_from_state_values(const Mdp& mdp, std::span<const double> v, std::span<double> out) {
    mdp.expect_next(v, out);
    const auto rewards = mdp.rewards();
    const double gamma = mdp.gamma();
    for (std::size_t pair = 0; pair < mdp.n_pairs(); ++pair)
        out[pair] = rewards[pair] + gamma * out[pair];
}

} // namespace detail

QTable bellman_optimal(const QTable& q, const Mdp& mdp) {
    if (!mdp.shape_matches(q))
        throw std::invalid_argument("bellman_optimal: Q-table shape does not match the MDP");
    std::vector<double> v(mdp.n_states());
    detail::state_max_into(q.values(), q.n_states(), q.n_actions(), v);
    std::vector<double> out(mdp.n_pairs());
    detail::bellman_from_state_values(mdp, v, out);
    return QTable(mdp.n_states(), mdp.n_actions(), std::move(out));
}

StateIndex sample_next_state(const Mdp& mdp, StateIndex s, ActionIndex a, Rng& rng) {
    if (s >= mdp.n_states() || a >= mdp.n_actions())
        throw std::invalid_argument("sample_next_state: state or action index out of range");
    return mdp.next_state_from_bits(s * mdp.n_actions() + a, rng.next_u64());
}

std::pair<ActionIndex, double> greedy_max(const QTable& q, StateIndex s) {
    if (s >= q.n_states()) throw std::invalid_argument("greedy_max: state index out of range");
    const auto row = q.row(s);
    ActionIndex best = 0;
    for (ActionIndex a = 1; a < row.size(); ++a)
        if (row[a] > row[best]) best = a;
    return {best, row[best]};
}

std::vector<double> state_max(const QTable& q) {
    std::vector<double> out(q.n_states());
    detail::state_max_into(q.values(), q.n_states(), q.n_actions(), out);
    return out;
}

} // namespace ttql
