#include "ttql/cli.hpp"

#include "ttql/generators.hpp"
#include "ttql/harness.hpp"
#include "ttql/learner.hpp"
#include "ttql/mdp_io.hpp"
#include "ttql/oracle.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <iostream>
#include <optional>
#include <stdexcept>

namespace ttql {

namespace {

constexpr std::uint64_t learning_stream = 2;
constexpr std::uint64_t perturb_stream = 100;

/// Raised for problems with the invocation itself; maps to exit code 2.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

void emit(std::ostream& out, const std::optional<std::string>& path, const std::string& text) {
    if (path) write_text_file_atomic(*path, text);
    else out << text;
}

void error_line(std::ostream& err, std::string_view kind, std::string_view message) {
    nlohmann::ordered_json doc;
    doc["error"] = kind;
    doc["message"] = message;
    err << doc.dump() << "\n";
}

struct GenerateArgs {
    std::size_t states = 50;
    std::size_t actions = 50;
    double gamma = 0.9;
    std::uint64_t seed = 0;
    std::optional<std::string> from;
    std::optional<std::string> axis;
    double epsilon = 0.0;
    std::optional<std::string> out;
};

struct SolveArgs {
    std::string mdp;
    double tol = 1e-10;
    std::optional<std::string> q_out;
};

struct LearnArgs {
    std::optional<std::string> mdp;
    std::size_t states = 50;
    std::size_t actions = 50;
    double gamma = 0.9;
    std::uint64_t model_seed = 0;
    std::optional<std::string> source_mdp;
    std::optional<std::string> source_q;
    std::optional<std::string> gate;
    std::size_t horizon = 10000;
    std::uint64_t seed = 0;
    std::size_t period = 1;
    double tol = 1e-10;
    std::optional<std::string> out;
    std::optional<std::string> q_out;
};

struct SuiteArgs {
    std::string name;
    std::optional<std::string> config;
    std::optional<std::string> manifest;
    std::optional<std::string> output_dir;
    std::size_t threads = 0;
};

struct BoundsArgs {
    std::optional<std::string> out;
};

struct ChartArgs {
    std::vector<std::string> inputs;
    std::string column = "median_mne";
    std::string out;
    std::string title;
    bool linear = false;
};

Mdp model_for_learning(const LearnArgs& a) {
    if (a.mdp) return load_mdp(*a.mdp);
    Rng rng = Rng(a.model_seed).substream(1);
    return random_mdp(a.states, a.actions, a.gamma, rng);
}

int do_generate(const GenerateArgs& a, std::ostream& out) {
    Mdp mdp = [&] {
        if (a.from) return load_mdp(*a.from);
        Rng rng = Rng(a.seed).substream(1);
        return random_mdp(a.states, a.actions, a.gamma, rng);
    }();
    if (a.axis) {
        const PerturbSpec spec{parse_perturb_axis(*a.axis), a.epsilon};
        Rng rng = Rng(a.seed).substream(perturb_stream + static_cast<std::uint64_t>(spec.axis));
        mdp = perturb(mdp, spec, rng);
    }
    emit(out, a.out, mdp_to_json(mdp));
    return 0;
}

int do_solve(const SolveArgs& a, std::ostream& out) {
    const Mdp mdp = load_mdp(a.mdp);
    const auto report = solve_q_star(mdp, a.tol);
    if (a.q_out) save_qtable(report.q_star, *a.q_out);
    nlohmann::ordered_json doc;
    doc["iterations"] = report.iterations;
    doc["residual"] = report.residual;
    doc["guaranteed_mne"] = report.guaranteed_mne;
    doc["gamma"] = mdp.gamma();
    out << doc.dump() << "\n";
    return 0;
}

int do_learn(const LearnArgs& a, std::ostream& out) {
    if (a.source_mdp && a.source_q) throw UsageError("--source and --source-q are exclusive");
    const Mdp mdp = model_for_learning(a);
    const QTable q_star = solve_q_star(mdp, a.tol).q_star;
    std::optional<QTable> source;
    if (a.source_mdp) {
        const Mdp src = load_mdp(*a.source_mdp);
        if (!src.same_spaces(mdp)) throw UsageError("source MDP has different state/action counts");
        source = solve_q_star(src, a.tol).q_star;
    } else if (a.source_q) {
        source = load_qtable(*a.source_q);
    }
    LearnerConfig cfg;
    cfg.horizon = a.horizon;
    cfg.safe_check_period = a.period;
    cfg.gate = a.gate ? parse_gate_mode(*a.gate)
                      : (source ? GateMode::bellman_gate : GateMode::never_transfer);
    if (cfg.gate != GateMode::never_transfer && !source)
        throw UsageError("--gate " + std::string(to_string(cfg.gate)) +
                         " needs --source or --source-q");
    Rng rng = Rng(a.seed).substream(learning_stream);
    const RunTrace trace = run(mdp, source, cfg, q_star, rng);
    if (a.q_out) save_qtable(trace.final_q, *a.q_out);
    emit(out, a.out, trace_to_csv(trace));
    return 0;
}

int do_suite(const SuiteArgs& a, std::ostream& out, std::ostream& err) {
    const SuiteKind kind = parse_suite_kind(a.name);
    if (a.config && a.manifest) throw UsageError("--config and --manifest are exclusive");
    ExperimentConfig cfg = default_config(kind);
    if (a.config) cfg = load_config(*a.config, kind);
    if (a.manifest) {
        std::string text;
        try {
            text = read_text_file(*a.manifest);
        } catch (const std::exception& e) {
            throw ConfigError(e.what());
        }
        cfg = config_from_manifest(text);
        if (cfg.suite != kind) throw ConfigError("manifest is for suite '" +
                                                 std::string(to_string(cfg.suite)) + "'");
    }
    if (a.output_dir) cfg.output_dir = *a.output_dir;
    if (cfg.output_dir.empty()) cfg.output_dir = "out/" + std::string(to_string(kind));

    if (kind == SuiteKind::bounds_verify) {
        bool ok = false;
        const auto h = default_bounds_horizons();
        const auto g = default_bounds_gamma_betas();
        const auto csv = bounds_verify_csv(h, g, &ok);
        write_text_file_atomic(std::filesystem::path(cfg.output_dir) / "bounds.csv", csv);
        out << csv;
        if (!ok) throw std::runtime_error("a closed-form bound was violated");
        return 0;
    }
    SuiteOptions options;
    options.threads = a.threads;
    options.on_variant = [&](const VariantResult& v) {
        err << "finished " << v.name << " (median final MNE " << format_double(v.median_final_mne())
            << ")\n";
    };
    const SuiteResult result = run_and_write_suite(cfg, options);
    out << summary_csv(result);
    return 0;
}

int do_bounds(const BoundsArgs& a, std::ostream& out) {
    bool ok = false;
    const auto h = default_bounds_horizons();
    const auto g = default_bounds_gamma_betas();
    emit(out, a.out, bounds_verify_csv(h, g, &ok));
    if (!ok) throw std::runtime_error("a closed-form bound was violated");
    return 0;
}

int do_chart(const ChartArgs& a) {
    std::vector<ChartSeries> series;
    for (const auto& input : a.inputs) {
        const std::filesystem::path path(input);
        std::string label = path.parent_path().filename().string();
        if (label.empty() || label == ".") label = path.stem().string();
        series.push_back(read_chart_series(path, a.column, label));
    }
    ChartOptions options;
    options.title = a.title;
    options.y_label = a.column;
    options.log_y = !a.linear;
    write_text_file_atomic(a.out, svg_line_chart(series, options));
    return 0;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Target transfer Q-learning toolkit", "ttql"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(library_version()));

    GenerateArgs gen;
    auto* generate = app.add_subcommand("generate", "Write a random (or perturbed) MDP as JSON");
    generate->add_option("--states", gen.states, "Number of states")->capture_default_str();
    generate->add_option("--actions", gen.actions, "Number of actions")->capture_default_str();
    generate->add_option("--gamma", gen.gamma, "Discount factor")->capture_default_str();
    generate->add_option("--seed", gen.seed, "Seed")->capture_default_str();
    generate->add_option("--from", gen.from, "Perturb this MDP instead of a random one");
    generate->add_option("--perturb", gen.axis, "Perturbation axis: gamma, reward or transition");
    generate->add_option("--epsilon", gen.epsilon, "Perturbation magnitude")->capture_default_str();
    generate->add_option("--out", gen.out, "Output file (default: stdout)");

    SolveArgs sol;
    auto* solve = app.add_subcommand("solve", "Certified value iteration; prints a JSON report");
    solve->add_option("--mdp", sol.mdp, "MDP JSON file")->required();
    solve->add_option("--tol", sol.tol, "Certificate tolerance")->capture_default_str();
    solve->add_option("--q-out", sol.q_out, "Write Q* as JSON");

    LearnArgs lrn;
    auto* learn = app.add_subcommand("learn", "Single TTQL run; writes the trace CSV");
    learn->add_option("--mdp", lrn.mdp, "Target MDP (default: generated from --model-seed)");
    learn->add_option("--states", lrn.states, "States of the generated MDP")->capture_default_str();
    learn->add_option("--actions", lrn.actions, "Actions of the generated MDP")->capture_default_str();
    learn->add_option("--gamma", lrn.gamma, "Discount of the generated MDP")->capture_default_str();
    learn->add_option("--model-seed", lrn.model_seed, "Seed of the generated MDP")->capture_default_str();
    learn->add_option("--source", lrn.source_mdp, "Source MDP; its Q* is the transfer table");
    learn->add_option("--source-q", lrn.source_q, "Source Q-table JSON");
    learn->add_option("--gate", lrn.gate, "never, always, bellman or oracle")
        ->check(CLI::IsMember({"never", "always", "bellman", "oracle"}));
    learn->add_option("--horizon", lrn.horizon, "Number of updates")->capture_default_str();
    learn->add_option("--seed", lrn.seed, "Learning seed")->capture_default_str();
    learn->add_option("--period", lrn.period, "Steps between gate checks")->capture_default_str();
    learn->add_option("--tol", lrn.tol, "Oracle tolerance")->capture_default_str();
    learn->add_option("--out", lrn.out, "Trace CSV (default: stdout)");
    learn->add_option("--q-out", lrn.q_out, "Write the final Q-table as JSON");

    SuiteArgs sui;
    auto* suite = app.add_subcommand("suite", "Run a named experiment suite");
    suite->add_option("name", sui.name, "exp-similarity, exp-safecond, bounds-verify or custom")
        ->required();
    suite->add_option("--config", sui.config, "Config file");
    suite->add_option("--manifest", sui.manifest, "Re-run the config recorded in a manifest");
    suite->add_option("--output-dir", sui.output_dir, "Overrides output_dir");
    suite->add_option("--threads", sui.threads, "Worker threads (0: all cores)")->capture_default_str();

    BoundsArgs bnd;
    auto* bounds = app.add_subcommand("bounds-verify", "Exact coefficients against the closed forms");
    bounds->add_option("--out", bnd.out, "Output CSV (default: stdout)");

    ChartArgs chr;
    auto* chart = app.add_subcommand("chart", "Render CSV columns as an SVG line chart");
    chart->add_option("--input", chr.inputs, "CSV file with a 'step' column (repeatable)")
        ->required();
    chart->add_option("--column", chr.column, "Column to plot")->capture_default_str();
    chart->add_option("--out", chr.out, "Output SVG")->required();
    chart->add_option("--title", chr.title, "Chart title");
    chart->add_flag("--linear", chr.linear, "Linear instead of log y axis");

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());
    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e, out, err);
        error_line(err, "usage", e.what());
        return 2;
    }

    try {
        if (generate->parsed()) return do_generate(gen, out);
        if (solve->parsed()) return do_solve(sol, out);
        if (learn->parsed()) return do_learn(lrn, out);
        if (suite->parsed()) return do_suite(sui, out, err);
        if (bounds->parsed()) return do_bounds(bnd, out);
        if (chart->parsed()) return do_chart(chr);
    } catch (const std::invalid_argument& e) {
        error_line(err, "usage", e.what());
        return 2;
    } catch (const std::domain_error& e) {
        error_line(err, "usage", e.what());
        return 2;
    } catch (const std::exception& e) {
        error_line(err, "runtime", e.what());
        return 1;
    }
    return 2;
}

} // namespace ttql
