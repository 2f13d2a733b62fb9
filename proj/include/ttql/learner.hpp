#pragma once

#include "ttql/mdp.hpp"
#include "ttql/rng.hpp"

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace ttql {

enum class GateMode {
    /// Plain synchronous Q-learning; the source is never used.
    never_transfer,
    /// Always bootstrap from the source table.
    always_transfer,
    /// Transfer while MNBE(source) <= MNBE(Q_t) under the new task's model.
    bellman_gate,
    /// Transfer while ||Q_source - Q*_new|| <= ||Q_t - Q*_new||. Reads the oracle
    /// solution, so it is only meant for theory experiments.
    distance_oracle,
};

[[nodiscard]] std::string_view to_string(GateMode mode) noexcept;
/// Accepts the enum names plus the CLI spellings "never", "always", "bellman", "oracle".
[[nodiscard]] GateMode parse_gate_mode(std::string_view text);

struct InitZeros {};
struct InitConstant {
    double value = 0.0;
};
using InitSpec = std::variant<InitZeros, InitConstant, QTable>;

struct LearnerConfig {
    std::size_t horizon = 10000;
    GateMode gate = GateMode::bellman_gate;
    /// Steps between gate evaluations; the last decision is held in between.
    std::size_t safe_check_period = 1;
    InitSpec init = InitZeros{};
};

struct SafeConditionDecision {
    bool flag = false;
    double source_mnbe = 0.0;
    double current_mnbe = 0.0;
};

/// Both Bellman errors are measured under `mdp_new`; the flag is source_mnbe <= current_mnbe.
[[nodiscard]] SafeConditionDecision safe_condition(const QTable& q_source, const QTable& q_current,
                                                   const Mdp& mdp_new);

/**
 * One synchronous update with step size alpha_t = 1 / (t + 1):
 *
 *   Q_{t+1}(s,a) = (1 - alpha_t) Q_t(s,a) + alpha_t (r(s,a) + gamma max_a' q_target(s', a'))
 *
 * with one fresh s' ~ P(.|s,a) per pair. Claims n_states * n_actions counters
 * from `rng`; pair (s, a) uses the counter at offset s * A + a.
 */
[[nodiscard]] QTable ttql_step(const QTable& q, const QTable& q_target, const Mdp& mdp,
                               std::size_t t, Rng& rng);

/// Trace row for step t. Gate fields describe Q_t; error fields describe Q_{t+1}.
struct StepRecord {
    std::size_t step = 0;
    /// MNE(Q_{t+1}) against the new task's oracle Q*.
    double mne = 0.0;
    /// MNBE(Q_{t+1}) under the new task's model.
    double mnbe = 0.0;
    /// Whether Q_target was the source table in this step.
    bool transfer_flag = false;
    /// MNBE(source) / MNBE(Q_t); 1 when there is no source.
    double beta_hat = 1.0;
    /// MNE(Q_target) / MNE(Q_t), the oracle error ratio of the target actually used.
    double beta_true = 1.0;
    double alpha = 0.0;
    /// True when the gate was evaluated at this step.
    bool gate_checked = false;
};

struct RunTrace {
    /// MNE(Q_1) and MNBE(Q_1).
    double initial_mne = 0.0;
    double initial_mnbe = 0.0;
    /// MNBE(source) under the new task; 0 when there is no source.
    double source_mnbe = 0.0;
    std::vector<StepRecord> steps;
    QTable final_q;
};

/**
 * Target transfer Q-learning on `mdp_new`.
 *
 * `q_star_new` feeds the trace diagnostics only; except in distance_oracle
 * mode the learner's decisions never read it. Throws std::invalid_argument
 * when a source is required but absent, or when shapes disagree.
 */
[[nodiscard]] RunTrace run(const Mdp& mdp_new, const std::optional<QTable>& q_source,
                           const LearnerConfig& cfg, const QTable& q_star_new, Rng& rng);

/// CSV columns: step,mne,mnbe,transfer_flag,beta_hat,alpha.
void write_trace_csv(const RunTrace& trace, std::ostream& out);
[[nodiscard]] std::string trace_to_csv(const RunTrace& trace);

/// Shortest round-trip decimal form ('.' separator, no locale), "nan"/"inf" for non-finite.
[[nodiscard]] std::string format_double(double value);

} // namespace ttql
