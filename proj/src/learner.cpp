#include "ttql/learner.hpp"

#include "ttql/metrics.hpp"

#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace ttql {

namespace {

void update_kernel(const double* __restrict q, const double* __restrict rewards,
                   const double* __restrict target_max, const std::uint32_t* __restrict next,
                   double alpha, double gamma, std::size_t pairs, double* __restrict out) {
    const double keep = 1.0 - alpha;
    for (std::size_t pair = 0; pair < pairs; ++pair)
        out[pair] = keep * q[pair] + alpha * (rewards[pair] + gamma * target_max[next[pair]]);
}

void synchronous_update(const Mdp& mdp, std::span<const double> q,
                        std::span<const double> target_max, double alpha, const Rng& rng,
                        std::uint64_t first_counter, std::span<std::uint32_t> next,
                        std::span<double> out) {
    mdp.sample_all(rng, first_counter, next);
    update_kernel(q.data(), mdp.rewards().data(), target_max.data(), next.data(), alpha,
                  mdp.gamma(), mdp.n_pairs(), out.data());
}

double ratio(double numerator, double denominator) {
    if (denominator > 0.0) return numerator / denominator;
    return numerator == 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
}

std::vector<double> initial_values(const InitSpec& init, const Mdp& mdp) {
    const std::size_t pairs = mdp.n_pairs();
    if (std::holds_alternative<InitZeros>(init)) return std::vector<double>(pairs, 0.0);
    if (const auto* c = std::get_if<InitConstant>(&init)) {
        if (!std::isfinite(c->value)) throw std::invalid_argument("run: initial constant must be finite");
        return std::vector<double>(pairs, c->value);
    }
    const auto& table = std::get<QTable>(init);
    if (!mdp.shape_matches(table))
        throw std::invalid_argument("run: initial Q-table shape does not match the MDP");
    return std::vector<double>(table.values().begin(), table.values().end());
}

} // namespace

std::string_view to_string(GateMode mode) noexcept {
    switch (mode) {
    case GateMode::never_transfer: return "never_transfer";
    case GateMode::always_transfer: return "always_transfer";
    case GateMode::bellman_gate: return "bellman_gate";
    case GateMode::distance_oracle: return "distance_oracle";
    }
    return "unknown";
}

GateMode parse_gate_mode(std::string_view text) {
    if (text == "never" || text == "never_transfer") return GateMode::never_transfer;
    if (text == "always" || text == "always_transfer") return GateMode::always_transfer;
    if (text == "bellman" || text == "bellman_gate") return GateMode::bellman_gate;
    if (text == "oracle" || text == "distance_oracle") return GateMode::distance_oracle;
    throw std::invalid_argument("unknown gate mode '" + std::string(text) + "'");
}

SafeConditionDecision safe_condition(const QTable& q_source, const QTable& q_current,
                                     const Mdp& mdp_new) {
    SafeConditionDecision out;
    out.source_mnbe = mnbe_exact(q_source, mdp_new);
    out.current_mnbe = mnbe_exact(q_current, mdp_new);
    out.flag = out.source_mnbe <= out.current_mnbe;
    return out;
}

QTable ttql_step(const QTable& q, const QTable& q_target, const Mdp& mdp, std::size_t t, Rng& rng) {
    if (t < 1) throw std::invalid_argument("ttql_step: step index starts at 1");
    if (!mdp.shape_matches(q) || !mdp.shape_matches(q_target))
        throw std::invalid_argument("ttql_step: Q-table shape does not match the MDP");
    const auto target_max = state_max(q_target);
    const double alpha = 1.0 / static_cast<double>(t + 1);
    const auto first = rng.reserve(mdp.n_pairs());
    std::vector<double> out(mdp.n_pairs());
    std::vector<std::uint32_t> next(mdp.n_pairs());
    synchronous_update(mdp, q.values(), target_max, alpha, rng, first, next, out);
    return QTable(mdp.n_states(), mdp.n_actions(), std::move(out));
}

RunTrace run(const Mdp& mdp_new, const std::optional<QTable>& q_source, const LearnerConfig& cfg,
             const QTable& q_star_new, Rng& rng) {
    if (cfg.horizon < 1) throw std::invalid_argument("run: horizon must be >= 1");
    if (cfg.safe_check_period < 1) throw std::invalid_argument("run: safe_check_period must be >= 1");
    if (!mdp_new.shape_matches(q_star_new))
        throw std::invalid_argument("run: oracle Q-table shape does not match the MDP");
    if (cfg.gate != GateMode::never_transfer && !q_source)
        throw std::invalid_argument("run: gate mode '" + std::string(to_string(cfg.gate)) +
                                    "' needs a source Q-table");
    if (q_source && !mdp_new.shape_matches(*q_source))
        throw std::invalid_argument("run: source Q-table shape does not match the MDP");

    const std::size_t n_states = mdp_new.n_states();
    const std::size_t n_actions = mdp_new.n_actions();
    const std::size_t pairs = mdp_new.n_pairs();
    const auto q_star = q_star_new.values();

    std::vector<double> q = initial_values(cfg.init, mdp_new);
    std::vector<double> next(pairs);
    std::vector<std::uint32_t> successors(pairs);
    std::vector<double> backup(pairs);
    std::vector<double> current_max(n_states);

    auto measure = [&](double& out_mne, double& out_mnbe) {
        detail::state_max_into(q, n_states, n_actions, current_max);
        detail::bellman_from_state_values(mdp_new, current_max, backup);
        out_mnbe = detail::max_abs_diff(q, backup);
        out_mne = detail::max_abs_diff(q, q_star);
    };

    RunTrace trace{0.0, 0.0, 0.0, {}, QTable(n_states, n_actions)};
    double mne_now = 0.0;
    double mnbe_now = 0.0;
    measure(mne_now, mnbe_now);
    trace.initial_mne = mne_now;
    trace.initial_mnbe = mnbe_now;

    std::vector<double> source_max;
    double source_mne = 0.0;
    if (q_source) {
        source_max = state_max(*q_source);
        trace.source_mnbe = mnbe_exact(*q_source, mdp_new);
        source_mne = mne(*q_source, q_star_new);
    }

    trace.steps.reserve(cfg.horizon);
    bool flag = false;
    for (std::size_t t = 1; t <= cfg.horizon; ++t) {
        StepRecord rec;
        rec.step = t;
        rec.gate_checked = (t - 1) % cfg.safe_check_period == 0;
        if (rec.gate_checked) {
            switch (cfg.gate) {
            case GateMode::never_transfer: flag = false; break;
            case GateMode::always_transfer: flag = true; break;
            case GateMode::bellman_gate: flag = trace.source_mnbe <= mnbe_now; break;
            case GateMode::distance_oracle: flag = source_mne <= mne_now; break;
            }
        }
        rec.transfer_flag = flag;
        rec.beta_hat = q_source ? ratio(trace.source_mnbe, mnbe_now) : 1.0;
        rec.beta_true = flag ? ratio(source_mne, mne_now) : 1.0;
        rec.alpha = 1.0 / static_cast<double>(t + 1);

        const std::span<const double> target_max =
            flag ? std::span<const double>(source_max) : std::span<const double>(current_max);
        const auto first = rng.reserve(pairs);
        synchronous_update(mdp_new, q, target_max, rec.alpha, rng, first, successors, next);
        q.swap(next);

        measure(mne_now, mnbe_now);
        rec.mne = mne_now;
        rec.mnbe = mnbe_now;
        trace.steps.push_back(rec);
    }
    trace.final_q = QTable(n_states, n_actions, std::move(q));
    return trace;
}

std::string format_double(double value) {
    if (std::isnan(value)) return "nan";
    if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
    char buffer[64];
    const auto result = std::to_chars(buffer, buffer + sizeof(buffer), value);
    return std::string(buffer, result.ptr);
}

void write_trace_csv(const RunTrace& trace, std::ostream& out) {
    out << "step,mne,mnbe,transfer_flag,beta_hat,alpha\n";
    for (const auto& rec : trace.steps) {
        out << rec.step << ',' << format_double(rec.mne) << ',' << format_double(rec.mnbe) << ','
            << (rec.transfer_flag ? 1 : 0) << ',' << format_double(rec.beta_hat) << ','
            << format_double(rec.alpha) << '\n';
    }
}

std::string trace_to_csv(const RunTrace& trace) {
    std::ostringstream out;
    write_trace_csv(trace, out);
    return out.str();
}

} // namespace ttql
