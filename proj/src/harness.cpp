#include "ttql/harness.hpp"

#include "ttql/mdp_io.hpp"
#include "ttql/metrics.hpp"
#include "ttql/oracle.hpp"
#include "ttql/theory.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <mutex>
#include <thread>

#ifndef TTQL_VERSION
#define TTQL_VERSION "0.0.0"
#endif

namespace ttql {

namespace {

constexpr std::uint64_t model_stream = 1;
constexpr std::uint64_t learning_stream = 2;
constexpr std::uint64_t perturb_stream = 100;

std::size_t resolve_threads(std::size_t requested) {
    if (requested > 0) return requested;
    return std::max<std::size_t>(1, std::thread::hardware_concurrency());
}

template <class F>
void parallel_for(std::size_t count, std::size_t threads, F&& body) {
    threads = std::min(threads, count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) body(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= count) return;
            try {
                body(i);
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(count);
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(threads);
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
}

struct Variant {
    std::string name;
    std::optional<std::size_t> source_index;
    GateMode gate = GateMode::never_transfer;
};

struct Replicate {
    std::uint64_t seed = 0;
    Mdp model;
    QTable q_star;
    std::vector<QTable> source_q;
    std::vector<double> source_distance;
};

std::string source_label(const PerturbSpec& spec) {
    return std::string(to_string(spec.axis)) + "-" + format_double(spec.epsilon);
}

void make_unique_names(std::vector<Variant>& variants) {
    for (std::size_t i = 0; i < variants.size(); ++i) {
        std::size_t copies = 1;
        for (std::size_t j = 0; j < i; ++j)
            if (variants[j].name == variants[i].name) ++copies;
        if (copies > 1) variants[i].name += "_" + std::to_string(copies);
    }
}

std::vector<Variant> plan_variants(const ExperimentConfig& cfg) {
    std::vector<Variant> out{{"baseline", std::nullopt, GateMode::never_transfer}};
    for (std::size_t i = 0; i < cfg.axes.size(); ++i) {
        const auto label = source_label(cfg.axes[i]);
        switch (cfg.suite) {
        case SuiteKind::similarity: out.push_back({label, i, GateMode::bellman_gate}); break;
        case SuiteKind::safecond:
            out.push_back({"wsc-" + label, i, GateMode::bellman_gate});
            out.push_back({"wosc-" + label, i, GateMode::always_transfer});
            break;
        case SuiteKind::custom:
            out.push_back({label, i, cfg.gate});
            break;
        case SuiteKind::bounds_verify: break;
        }
    }
    make_unique_names(out);
    return out;
}

Replicate prepare(const ExperimentConfig& cfg, std::uint64_t seed) {
    const Rng root(seed);
    Rng model_rng = root.substream(model_stream);
    Mdp model = random_mdp(cfg.n_states, cfg.n_actions, cfg.gamma0, model_rng);
    QTable q_star = solve_q_star(model, cfg.solver_tol).q_star;
    Replicate rep{seed, std::move(model), std::move(q_star), {}, {}};
    for (const auto& spec : cfg.axes) {
        // One noise stream per axis, so magnitudes along an axis share their draws.
        Rng perturb_rng = root.substream(perturb_stream + static_cast<std::uint64_t>(spec.axis));
        const Mdp source = perturb(rep.model, spec, perturb_rng);
        QTable q = solve_q_star(source, cfg.solver_tol).q_star;
        rep.source_distance.push_back(mne(q, rep.q_star));
        rep.source_q.push_back(std::move(q));
    }
    return rep;
}

struct RunOutput {
    RunSummary summary;
    std::vector<double> mne;
    std::vector<double> mnbe;
    std::vector<unsigned char> flags;
};

RunOutput run_one(const ExperimentConfig& cfg, const Replicate& rep, const Variant& variant) {
    LearnerConfig lc;
    lc.horizon = cfg.horizon;
    lc.gate = variant.gate;
    lc.safe_check_period = cfg.safe_check_period;
    std::optional<QTable> source;
    if (variant.source_index) source = rep.source_q[*variant.source_index];
    // Every variant of a replicate consumes the same learning stream.
    Rng rng = Rng(rep.seed).substream(learning_stream);
    const RunTrace trace = run(rep.model, source, lc, rep.q_star, rng);

    RunOutput out;
    out.summary.seed = rep.seed;
    if (variant.source_index) out.summary.source_distance = rep.source_distance[*variant.source_index];
    out.summary.source_mnbe = trace.source_mnbe;
    out.mne.reserve(trace.steps.size());
    out.mnbe.reserve(trace.steps.size());
    out.flags.reserve(trace.steps.size());
    double total = 0.0;
    for (const auto& rec : trace.steps) {
        out.mne.push_back(rec.mne);
        out.mnbe.push_back(rec.mnbe);
        out.flags.push_back(rec.transfer_flag ? 1 : 0);
        total += rec.mne;
        out.summary.transfer_steps += rec.transfer_flag ? 1 : 0;
    }
    out.summary.final_mne = trace.steps.back().mne;
    out.summary.auc = total / static_cast<double>(trace.steps.size());
    return out;
}

VariantResult aggregate(const ExperimentConfig& cfg, const Variant& variant,
                        std::vector<RunOutput>& runs) {
    VariantResult out;
    out.name = variant.name;
    out.gate = variant.gate;
    if (variant.source_index) out.source = cfg.axes[*variant.source_index];
    for (const auto& r : runs) out.runs.push_back(r.summary);

    const std::size_t steps = cfg.horizon;
    out.median_mne.resize(steps);
    out.q25_mne.resize(steps);
    out.q75_mne.resize(steps);
    out.median_mnbe.resize(steps);
    out.transfer_rate.resize(steps);
    std::vector<double> column(runs.size());
    for (std::size_t t = 0; t < steps; ++t) {
        std::size_t flags = 0;
        for (std::size_t i = 0; i < runs.size(); ++i) {
            column[i] = runs[i].mne[t];
            flags += runs[i].flags[t];
        }
        std::sort(column.begin(), column.end());
        out.median_mne[t] = quantile(column, 0.5);
        out.q25_mne[t] = quantile(column, 0.25);
        out.q75_mne[t] = quantile(column, 0.75);
        for (std::size_t i = 0; i < runs.size(); ++i) column[i] = runs[i].mnbe[t];
        out.median_mnbe[t] = quantile(column, 0.5);
        out.transfer_rate[t] = static_cast<double>(flags) / static_cast<double>(runs.size());
    }
    return out;
}

SuiteResult run_planned(const ExperimentConfig& cfg, const SuiteOptions& options) {
    validate_config(cfg);
    const auto variants = plan_variants(cfg);
    const std::size_t threads = resolve_threads(options.threads);

    SuiteResult result;
    result.config = cfg;
    for (std::size_t i = 0; i < cfg.seeds; ++i) result.seeds.push_back(cfg.first_seed + i);

    std::vector<std::optional<Replicate>> reps(cfg.seeds);
    parallel_for(cfg.seeds, threads, [&](std::size_t i) { reps[i] = prepare(cfg, result.seeds[i]); });

    for (const auto& variant : variants) {
        std::vector<RunOutput> runs(cfg.seeds);
        parallel_for(cfg.seeds, threads,
                     [&](std::size_t i) { runs[i] = run_one(cfg, *reps[i], variant); });
        result.variants.push_back(aggregate(cfg, variant, runs));
        if (options.on_variant) options.on_variant(result.variants.back());
    }
    return result;
}

double median_of(const std::vector<RunSummary>& runs, double RunSummary::*field, double q) {
    std::vector<double> values;
    values.reserve(runs.size());
    for (const auto& r : runs) values.push_back(r.*field);
    return quantile(std::move(values), q);
}

std::string hex64(std::uint64_t value) {
    char buffer[17];
    std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(value));
    return buffer;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
    ExperimentConfig copy = cfg;
    copy.output_dir.clear();
    return fnv1a64(config_to_text(copy));
}

std::string suite_chart(const SuiteResult& result) {
    std::vector<ChartSeries> series;
    for (const auto& v : result.variants) {
        ChartSeries s;
        s.label = v.name;
        for (std::size_t t = 0; t < v.median_mne.size(); ++t) {
            s.x.push_back(static_cast<double>(t + 1));
            s.y.push_back(v.median_mne[t]);
        }
        series.push_back(std::move(s));
    }
    ChartOptions options;
    options.title = std::string(to_string(result.config.suite)) + ": median MNE over " +
                    std::to_string(result.seeds.size()) + " seeds";
    return svg_line_chart(series, options);
}

std::vector<std::pair<std::string, std::string>> suite_files(const SuiteResult& result) {
    std::vector<std::pair<std::string, std::string>> files;
    for (const auto& v : result.variants) {
        files.emplace_back(v.name + "/curve.csv", variant_curve_csv(v));
        files.emplace_back(v.name + "/runs.csv", variant_runs_csv(v));
    }
    files.emplace_back("summary.csv", summary_csv(result));
    files.emplace_back("mne.svg", suite_chart(result));
    files.emplace_back("config.cfg", config_to_text(result.config));
    return files;
}

} // namespace

double quantile(std::vector<double> values, double q) {
    if (values.empty()) throw std::invalid_argument("quantile: empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q must lie in [0, 1]");
    if (!std::is_sorted(values.begin(), values.end())) std::sort(values.begin(), values.end());
    const double h = static_cast<double>(values.size() - 1) * q;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= values.size()) return values.back();
    return values[lo] + (h - static_cast<double>(lo)) * (values[lo + 1] - values[lo]);
}

double VariantResult::median_final_mne() const {
    return median_of(runs, &RunSummary::final_mne, 0.5);
}
double VariantResult::q25_final_mne() const {
    return median_of(runs, &RunSummary::final_mne, 0.25);
}
double VariantResult::q75_final_mne() const {
    return median_of(runs, &RunSummary::final_mne, 0.75);
}
double VariantResult::median_source_distance() const {
    return median_of(runs, &RunSummary::source_distance, 0.5);
}

const VariantResult& SuiteResult::variant(std::string_view name) const {
    for (const auto& v : variants)
        if (v.name == name) return v;
    throw std::out_of_range("no variant named '" + std::string(name) + "'");
}

SuiteResult run_similarity_suite(const ExperimentConfig& cfg, const SuiteOptions& options) {
    ExperimentConfig copy = cfg;
    copy.suite = SuiteKind::similarity;
    return run_planned(copy, options);
}

SuiteResult run_safecond_suite(const ExperimentConfig& cfg, const SuiteOptions& options) {
    ExperimentConfig copy = cfg;
    copy.suite = SuiteKind::safecond;
    return run_planned(copy, options);
}

SuiteResult run_custom_suite(const ExperimentConfig& cfg, const SuiteOptions& options) {
    ExperimentConfig copy = cfg;
    copy.suite = SuiteKind::custom;
    return run_planned(copy, options);
}

SuiteResult run_suite(const ExperimentConfig& cfg, const SuiteOptions& options) {
    if (cfg.suite == SuiteKind::bounds_verify)
        throw ConfigError("bounds-verify has no learning runs");
    return run_planned(cfg, options);
}

std::string variant_curve_csv(const VariantResult& v) {
    std::string out = "step,median_mne,q25_mne,q75_mne,median_mnbe,transfer_rate\n";
    for (std::size_t t = 0; t < v.median_mne.size(); ++t) {
        out += std::to_string(t + 1);
        for (double x : {v.median_mne[t], v.q25_mne[t], v.q75_mne[t], v.median_mnbe[t],
                         v.transfer_rate[t]})
            out += "," + format_double(x);
        out += "\n";
    }
    return out;
}

std::string variant_runs_csv(const VariantResult& v) {
    std::string out = "seed,source_distance,source_mnbe,final_mne,auc,transfer_steps\n";
    for (const auto& r : v.runs) {
        out += std::to_string(r.seed) + "," + format_double(r.source_distance) + "," +
               format_double(r.source_mnbe) + "," + format_double(r.final_mne) + "," +
               format_double(r.auc) + "," + std::to_string(r.transfer_steps) + "\n";
    }
    return out;
}

std::string summary_csv(const SuiteResult& result) {
    std::string out =
        "variant,axis,epsilon,gate,median_source_distance,median_final_mne,q25_final_mne,"
        "q75_final_mne,median_auc,mean_transfer_rate\n";
    for (const auto& v : result.variants) {
        double transfers = 0.0;
        for (const auto& r : v.runs) transfers += static_cast<double>(r.transfer_steps);
        const double steps = static_cast<double>(v.runs.size() * v.median_mne.size());
        out += v.name + "," + (v.source ? std::string(to_string(v.source->axis)) : "none") + "," +
               format_double(v.source ? v.source->epsilon : 0.0) + "," +
               std::string(to_string(v.gate)) + "," + format_double(v.median_source_distance()) +
               "," + format_double(v.median_final_mne()) + "," + format_double(v.q25_final_mne()) +
               "," + format_double(v.q75_final_mne()) + "," +
               format_double(median_of(v.runs, &RunSummary::auc, 0.5)) + "," +
               format_double(steps > 0 ? transfers / steps : 0.0) + "\n";
    }
    return out;
}

std::string manifest_json(const SuiteResult& result, const std::filesystem::path& output_dir) {
    nlohmann::ordered_json doc;
    doc["tool"] = "ttql";
    doc["version"] = std::string(library_version());
    doc["suite"] = std::string(to_string(result.config.suite));
    doc["config"] = config_to_text(result.config);
    doc["config_hash"] = hex64(config_hash(result.config));
    doc["seeds"] = result.seeds;
    nlohmann::ordered_json variants = nlohmann::ordered_json::array();
    for (const auto& v : result.variants) variants.push_back(v.name);
    doc["variants"] = variants;
    nlohmann::ordered_json outputs = nlohmann::ordered_json::object();
    for (const auto& [name, text] : suite_files(result)) outputs[name] = hex64(fnv1a64(text));
    doc["outputs"] = outputs;
    doc["output_dir"] = output_dir.generic_string();
    return doc.dump(2) + "\n";
}

ExperimentConfig config_from_manifest(std::string_view manifest_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(manifest_text.begin(), manifest_text.end());
    } catch (const nlohmann::json::parse_error& e) {
        throw ConfigError(std::string("manifest is not valid JSON: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("config") || !doc["config"].is_string())
        throw ConfigError("manifest has no 'config' entry");
    return parse_config(doc["config"].get<std::string>());
}

void write_variant_outputs(const std::filesystem::path& dir, const VariantResult& variant) {
    write_text_file_atomic(dir / variant.name / "curve.csv", variant_curve_csv(variant));
    write_text_file_atomic(dir / variant.name / "runs.csv", variant_runs_csv(variant));
}

void write_suite_outputs(const std::filesystem::path& dir, const SuiteResult& result) {
    for (const auto& [name, text] : suite_files(result)) write_text_file_atomic(dir / name, text);
    write_text_file_atomic(dir / "manifest.json", manifest_json(result, dir));
}

SuiteResult run_and_write_suite(const ExperimentConfig& cfg, SuiteOptions options) {
    validate_config(cfg);
    if (cfg.output_dir.empty()) throw ConfigError("output_dir is not set");
    const std::filesystem::path dir(cfg.output_dir);
    try {
        std::filesystem::create_directories(dir);
        write_text_file_atomic(dir / ".write-probe", "");
        std::filesystem::remove(dir / ".write-probe");
    } catch (const std::exception& e) {
        throw ConfigError("output_dir '" + cfg.output_dir + "' is not writable: " + e.what());
    }
    auto user_callback = options.on_variant;
    options.on_variant = [&](const VariantResult& v) {
        write_variant_outputs(dir, v);
        if (user_callback) user_callback(v);
    };
    SuiteResult result = run_suite(cfg, options);
    write_suite_outputs(dir, result);
    return result;
}

std::vector<std::size_t> default_bounds_horizons() { return {100, 1000, 10000}; }

std::vector<double> default_bounds_gamma_betas() { return {0.1, 0.3, 0.49, 0.5, 0.51, 0.7, 0.9}; }

std::string bounds_verify_csv(std::span<const std::size_t> horizons,
                              std::span<const double> gamma_betas, bool* all_ok) {
    const auto rows = bounds_grid(horizons, gamma_betas);
    std::string out = "n,gamma_beta,exact_sum,thm2,exact_alpha,thm3,sum_ok,alpha_ok\n";
    bool ok = true;
    for (const auto& r : rows) {
        ok = ok && r.sum_ok && r.alpha_ok;
        out += std::to_string(r.n) + "," + format_double(r.gamma_beta) + "," +
               format_double(r.exact_sum) + "," + format_double(r.thm2) + "," +
               format_double(r.exact_alpha) + "," + format_double(r.thm3) + "," +
               (r.sum_ok ? "true" : "false") + "," + (r.alpha_ok ? "true" : "false") + "\n";
    }
    if (all_ok) *all_ok = ok;
    return out;
}

std::string_view library_version() noexcept { return TTQL_VERSION; }

} // namespace ttql
