#include "ttql/harness.hpp"

#include "ttql/mdp_io.hpp"

#include <charconv>
#include <cmath>
#include <map>

namespace ttql {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

std::string where(std::size_t line) { return "line " + std::to_string(line) + ": "; }

template <class T>
T parse_number(std::string_view key, std::string_view value, std::size_t line) {
    T out{};
    const auto* end = value.data() + value.size();
    const auto result = std::from_chars(value.data(), end, out);
    if (value.empty() || result.ec != std::errc() || result.ptr != end)
        throw ConfigError(where(line) + "'" + std::string(key) + "' expects a number, got '" +
                          std::string(value) + "'");
    return out;
}

std::string_view gate_key(GateMode mode) {
    switch (mode) {
    case GateMode::never_transfer: return "never";
    case GateMode::always_transfer: return "always";
    case GateMode::bellman_gate: return "bellman";
    case GateMode::distance_oracle: return "oracle";
    }
    return "bellman";
}

struct Entry {
    std::string value;
    std::size_t line;
};

} // namespace

std::string_view to_string(SuiteKind kind) noexcept {
    switch (kind) {
    case SuiteKind::similarity: return "exp-similarity";
    case SuiteKind::safecond: return "exp-safecond";
    case SuiteKind::bounds_verify: return "bounds-verify";
    case SuiteKind::custom: return "custom";
    }
    return "custom";
}

SuiteKind parse_suite_kind(std::string_view text) {
    if (text == "exp-similarity" || text == "similarity") return SuiteKind::similarity;
    if (text == "exp-safecond" || text == "safecond") return SuiteKind::safecond;
    if (text == "bounds-verify") return SuiteKind::bounds_verify;
    if (text == "custom") return SuiteKind::custom;
    throw ConfigError("unknown suite '" + std::string(text) + "'");
}

std::vector<PerturbSpec> default_axes(SuiteKind kind) {
    using enum PerturbAxis;
    switch (kind) {
    case SuiteKind::similarity:
    case SuiteKind::custom:
        return {{gamma, 0.01},      {gamma, 0.03},      {gamma, 0.06},
                {reward, 0.05},     {reward, 0.15},     {reward, 0.3},
                {transition, 0.05}, {transition, 0.15}, {transition, 0.3}};
    case SuiteKind::safecond: return {{transition, 0.05}, {reward, 0.3}, {gamma, 0.08}};
    case SuiteKind::bounds_verify: return {};
    }
    return {};
}

ExperimentConfig default_config(SuiteKind kind) {
    ExperimentConfig cfg;
    cfg.suite = kind;
    cfg.axes = default_axes(kind);
    return cfg;
}

void validate_config(const ExperimentConfig& cfg) {
    if (cfg.n_states < 1 || cfg.n_actions < 1)
        throw ConfigError("n_states and n_actions must be >= 1");
    if (!(cfg.gamma0 > 0.0 && cfg.gamma0 < 1.0)) throw ConfigError("gamma0 must lie in (0, 1)");
    if (cfg.horizon < 1) throw ConfigError("horizon must be >= 1");
    if (cfg.seeds < 1) throw ConfigError("seeds must be >= 1");
    if (cfg.safe_check_period < 1) throw ConfigError("safe_check_period must be >= 1");
    if (!(cfg.solver_tol > 0.0) || !std::isfinite(cfg.solver_tol))
        throw ConfigError("solver_tol must be positive");
    for (std::size_t i = 0; i < cfg.axes.size(); ++i) {
        try {
            validate_perturbation(cfg.axes[i], cfg.gamma0);
        } catch (const std::invalid_argument& e) {
            throw ConfigError("source " + std::to_string(i + 1) + ": " + e.what());
        }
    }
}

ExperimentConfig parse_config(std::string_view text, std::optional<SuiteKind> suite) {
    std::map<std::string, Entry, std::less<>> entries;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        auto nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        auto line = text.substr(pos, nl - pos);
        pos = nl + 1;
        ++line_no;
        if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw ConfigError(where(line_no) + "expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const std::string value(trim(line.substr(eq + 1)));
        if (key.empty()) throw ConfigError(where(line_no) + "empty key");
        if (!entries.emplace(key, Entry{value, line_no}).second)
            throw ConfigError(where(line_no) + "duplicate key '" + key + "'");
    }

    SuiteKind kind = suite.value_or(SuiteKind::similarity);
    if (auto it = entries.find("suite"); it != entries.end()) {
        const auto named = parse_suite_kind(it->second.value);
        if (suite && *suite != named)
            throw ConfigError("config is for suite '" + it->second.value + "', not '" +
                              std::string(to_string(*suite)) + "'");
        kind = named;
    }
    ExperimentConfig cfg = default_config(kind);

    std::map<long, std::pair<std::optional<Entry>, std::optional<Entry>>> sources;
    for (const auto& [key, entry] : entries) {
        const auto& v = entry.value;
        const auto line = entry.line;
        if (key == "suite") continue;
        if (key == "n_states") cfg.n_states = parse_number<std::size_t>(key, v, line);
        else if (key == "n_actions") cfg.n_actions = parse_number<std::size_t>(key, v, line);
        else if (key == "gamma0") cfg.gamma0 = parse_number<double>(key, v, line);
        else if (key == "horizon") cfg.horizon = parse_number<std::size_t>(key, v, line);
        else if (key == "seeds") cfg.seeds = parse_number<std::size_t>(key, v, line);
        else if (key == "seed") cfg.first_seed = parse_number<std::uint64_t>(key, v, line);
        else if (key == "safe_check_period")
            cfg.safe_check_period = parse_number<std::size_t>(key, v, line);
        else if (key == "solver_tol") cfg.solver_tol = parse_number<double>(key, v, line);
        else if (key == "output_dir") cfg.output_dir = v;
        else if (key == "gate") {
            try {
                cfg.gate = parse_gate_mode(v);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(where(line) + e.what());
            }
        } else if (key.starts_with("axis.") || key.starts_with("epsilon.")) {
            const bool is_axis = key.starts_with("axis.");
            const std::string_view index_text = std::string_view(key).substr(is_axis ? 5 : 8);
            const long index = parse_number<long>(key, index_text, line);
            if (index < 0) throw ConfigError(where(line) + "source index must be >= 0");
            auto& slot = sources[index];
            (is_axis ? slot.first : slot.second) = entry;
        } else {
            throw ConfigError(where(line) + "unknown key '" + key + "'");
        }
    }

    if (!sources.empty()) {
        cfg.axes.clear();
        for (const auto& [index, pair] : sources) {
            if (!pair.first || !pair.second)
                throw ConfigError("source " + std::to_string(index) +
                                  " needs both axis." + std::to_string(index) + " and epsilon." +
                                  std::to_string(index));
            PerturbSpec spec;
            try {
                spec.axis = parse_perturb_axis(pair.first->value);
            } catch (const std::invalid_argument& e) {
                throw ConfigError(where(pair.first->line) + e.what());
            }
            spec.epsilon = parse_number<double>("epsilon", pair.second->value, pair.second->line);
            cfg.axes.push_back(spec);
        }
    }
    validate_config(cfg);
    return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, std::optional<SuiteKind> suite) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const std::exception& e) {
        throw ConfigError(e.what());
    }
    return parse_config(text, suite);
}

std::string config_to_text(const ExperimentConfig& cfg) {
    std::string out;
    auto put = [&](std::string_view key, const std::string& value) {
        out.append(key).append(" = ").append(value).append("\n");
    };
    put("suite", std::string(to_string(cfg.suite)));
    put("n_states", std::to_string(cfg.n_states));
    put("n_actions", std::to_string(cfg.n_actions));
    put("gamma0", format_double(cfg.gamma0));
    put("horizon", std::to_string(cfg.horizon));
    put("seeds", std::to_string(cfg.seeds));
    put("seed", std::to_string(cfg.first_seed));
    put("safe_check_period", std::to_string(cfg.safe_check_period));
    put("gate", std::string(gate_key(cfg.gate)));
    put("solver_tol", format_double(cfg.solver_tol));
    if (!cfg.output_dir.empty()) put("output_dir", cfg.output_dir);
    for (std::size_t i = 0; i < cfg.axes.size(); ++i) {
        put("axis." + std::to_string(i + 1), std::string(to_string(cfg.axes[i].axis)));
        put("epsilon." + std::to_string(i + 1), format_double(cfg.axes[i].epsilon));
    }
    return out;
}

} // namespace ttql
