#pragma once

#include "ttql/generators.hpp"
#include "ttql/learner.hpp"

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ttql {

/// Malformed or invalid experiment configuration.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

enum class SuiteKind { similarity, safecond, bounds_verify, custom };

[[nodiscard]] std::string_view to_string(SuiteKind kind) noexcept;
/// "exp-similarity", "exp-safecond", "bounds-verify" or "custom".
[[nodiscard]] SuiteKind parse_suite_kind(std::string_view text);

struct ExperimentConfig {
    SuiteKind suite = SuiteKind::similarity;
    std::size_t n_states = 50;
    std::size_t n_actions = 50;
    double gamma0 = 0.9;
    std::vector<PerturbSpec> axes;
    std::size_t horizon = 10000;
    std::size_t seeds = 20;
    /// Seed of the first replicate; replicate i uses first_seed + i.
    std::uint64_t first_seed = 0;
    std::size_t safe_check_period = 1;
    /// Gate used by the custom suite.
    GateMode gate = GateMode::bellman_gate;
    /// Certificate tolerance for every oracle solve.
    double solver_tol = 1e-10;
    std::string output_dir;

    friend bool operator==(const ExperimentConfig&, const ExperimentConfig&) = default;
};

/// Defaults of a suite, including its source list.
[[nodiscard]] ExperimentConfig default_config(SuiteKind kind);

/// Axes used when a config file lists none.
[[nodiscard]] std::vector<PerturbSpec> default_axes(SuiteKind kind);

/**
 * Parses the key = value config format (see docs/formats.md).
 *
 * Keys missing from `text` keep the values of default_config(suite). Sources
 * are given as axis.N / epsilon.N pairs and are ordered by N. Throws
 * ConfigError on unknown keys, malformed values or a failed validation.
 */
[[nodiscard]] ExperimentConfig parse_config(std::string_view text,
                                            std::optional<SuiteKind> suite = std::nullopt);
[[nodiscard]] ExperimentConfig load_config(const std::filesystem::path& path,
                                           std::optional<SuiteKind> suite = std::nullopt);

/// Canonical text form: every key, fixed order, shortest round-trip numbers.
[[nodiscard]] std::string config_to_text(const ExperimentConfig& cfg);

/// Throws ConfigError when a field or a source is out of range.
void validate_config(const ExperimentConfig& cfg);

struct RunSummary {
    std::uint64_t seed = 0;
    /// ||Q*_source - Q*_0||; 0 without a source.
    double source_distance = 0.0;
    double source_mnbe = 0.0;
    double final_mne = 0.0;
    /// Mean of the MNE curve over steps 1..horizon.
    double auc = 0.0;
    std::size_t transfer_steps = 0;
};

struct VariantResult {
    std::string name;
    std::optional<PerturbSpec> source;
    GateMode gate = GateMode::never_transfer;
    /// Ordered by seed.
    std::vector<RunSummary> runs;
    /// Per step across seeds (index t - 1).
    std::vector<double> median_mne;
    std::vector<double> q25_mne;
    std::vector<double> q75_mne;
    std::vector<double> median_mnbe;
    std::vector<double> transfer_rate;

    [[nodiscard]] double median_final_mne() const;
    [[nodiscard]] double q25_final_mne() const;
    [[nodiscard]] double q75_final_mne() const;
    [[nodiscard]] double median_source_distance() const;
};

struct SuiteResult {
    ExperimentConfig config;
    std::vector<std::uint64_t> seeds;
    std::vector<VariantResult> variants;

    /// Throws std::out_of_range for an unknown name.
    [[nodiscard]] const VariantResult& variant(std::string_view name) const;
};

struct SuiteOptions {
    /// Worker threads; 0 picks std::thread::hardware_concurrency().
    std::size_t threads = 0;
    /// Called after each variant finishes, from the calling thread.
    std::function<void(const VariantResult&)> on_variant;
};

/// Baseline Q-learning plus one bellman-gated TTQL run per source.
[[nodiscard]] SuiteResult run_similarity_suite(const ExperimentConfig& cfg,
                                               const SuiteOptions& options = {});
/// Baseline plus, for each source, a gated (wsc-*) and an always-transfer (wosc-*) run.
[[nodiscard]] SuiteResult run_safecond_suite(const ExperimentConfig& cfg,
                                             const SuiteOptions& options = {});
/// Baseline plus one run per source with cfg.gate.
[[nodiscard]] SuiteResult run_custom_suite(const ExperimentConfig& cfg,
                                           const SuiteOptions& options = {});
/// Dispatches on cfg.suite; bounds-verify has no learning runs and is rejected here.
[[nodiscard]] SuiteResult run_suite(const ExperimentConfig& cfg, const SuiteOptions& options = {});

/**
 * Writes a suite into cfg.output_dir:
 *
 *   <variant>/curve.csv, <variant>/runs.csv   written as each variant completes
 *   summary.csv, mne.svg, config.cfg, manifest.json
 *
 * Every file goes through write_text_file_atomic.
 */
void write_variant_outputs(const std::filesystem::path& dir, const VariantResult& variant);
void write_suite_outputs(const std::filesystem::path& dir, const SuiteResult& result);

/// Runs the suite and writes every output as it becomes available.
SuiteResult run_and_write_suite(const ExperimentConfig& cfg, SuiteOptions options = {});

[[nodiscard]] std::string variant_curve_csv(const VariantResult& variant);
[[nodiscard]] std::string variant_runs_csv(const VariantResult& variant);
[[nodiscard]] std::string summary_csv(const SuiteResult& result);

/// Manifest JSON: config (canonical text and hash), seeds, version, output hashes.
[[nodiscard]] std::string manifest_json(const SuiteResult& result,
                                        const std::filesystem::path& output_dir);
/// Config recorded in a manifest written by write_suite_outputs.
[[nodiscard]] ExperimentConfig config_from_manifest(std::string_view manifest_text);

/// Theory grid used by bounds-verify.
[[nodiscard]] std::string bounds_verify_csv(std::span<const std::size_t> horizons,
                                            std::span<const double> gamma_betas,
                                            bool* all_ok = nullptr);
[[nodiscard]] std::vector<std::size_t> default_bounds_horizons();
[[nodiscard]] std::vector<double> default_bounds_gamma_betas();

struct ChartSeries {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct ChartOptions {
    std::string title;
    std::string x_label = "step";
    std::string y_label = "MNE";
    bool log_y = true;
    /// Each series is thinned to at most this many points.
    std::size_t max_points = 400;
};

/// Static SVG line chart. Non-positive values are dropped on a log axis.
[[nodiscard]] std::string svg_line_chart(const std::vector<ChartSeries>& series,
                                         const ChartOptions& options);

/// Reads column `y_column` against column "step" from a CSV with a header row.
[[nodiscard]] ChartSeries read_chart_series(const std::filesystem::path& csv_path,
                                            std::string_view y_column, std::string label);

/// Linear-interpolated quantile of an unsorted sample (q in [0, 1]).
[[nodiscard]] double quantile(std::vector<double> values, double q);

[[nodiscard]] std::string_view library_version() noexcept;

} // namespace ttql
