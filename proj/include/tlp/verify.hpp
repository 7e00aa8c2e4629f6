#pragma once

#include <json.hpp>

#include <array>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "tlp/limit_laws.hpp"
#include "tlp/simulate.hpp"

namespace tlp {

// One-sample Kolmogorov-Smirnov distance. `sorted` must be ascending and
// NaN-free; cdf must be non-decreasing into [0,1].
double ks_statistic(const std::vector<double>& sorted,
                    const std::function<double(double)>& cdf);

struct KsConfig {
  double null_coeff = 1.36;          // threshold = null_coeff/sqrt(n) + slack
  std::vector<double> slack;         // one entry per r-grid cell
  std::vector<int> columns;          // components to test (subset of {1,2})
};

struct TrendConfig {
  int column = 2;
  bool strict = false;  // strict decrease vs non-increasing
};

struct MomentChecks {
  std::optional<std::array<double, 2>> mean1, var1, mean2, var2, corr;
  bool any() const {
    return mean1 || var1 || mean2 || var2 || corr;
  }
};

struct ExperimentConfig {
  nlohmann::json model_spec;
  Scheme scheme = Scheme::COND_CLT;
  std::vector<std::size_t> r_grid;
  double t = 1.0;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  double rel_tol = 1e-4;
  ResidualMode mode = ResidualMode::gaussian;
  bool limit_law_source = false;  // draw from the limit law, skip the simulator
  Exec exec = Exec::openmp;
  int threads = 0;
  std::size_t max_points = 10'000'000;
  bool keep_samples = false;
  KsConfig ks;
  std::optional<TrendConfig> trend;  // enforced in the verdict when present
  MomentChecks moment_checks;       // evaluated per cell; verdict uses last r

  // Full config with defaults filled in; parse_experiment_config(resolved())
  // reproduces this config exactly.
  nlohmann::json resolved() const;
};

// Strict parser: unknown keys anywhere are ConfigErrors, as are violations of
// the invariants (increasing r grid, n >= 100, positive thresholds, scheme /
// column compatibility).
ExperimentConfig parse_experiment_config(const nlohmann::json& j);
ExperimentConfig load_experiment_config(const std::string& path);

struct CellReport {
  std::size_t r = 0;
  // NaN when the column was not tested.
  double ks_col1, ks_col2, threshold_col1, threshold_col2;
  bool ks_col1_pass = true;
  bool ks_col2_pass = true;
  double mean1, var1, mean2, var2, corr;
  bool moments_pass = true;
  std::vector<std::string> failures;  // human-readable reasons
};

struct ExperimentReport {
  ExperimentConfig config;
  std::vector<CellReport> cells;
  bool trend_checked = false;
  bool trend_pass = true;
  std::vector<double> trend_values;  // KS of the trend column along the grid
  bool verdict = false;  // terminal-r pass flags, plus trend when configured
  double runtime_seconds = 0.0;
  std::string error;  // non-empty when the run aborted (budget exhaustion)
  std::vector<std::vector<NormalizedRow>> samples;  // kept when configured
};

// Builds the limit law matching a config's scheme against a model: gamma from
// the model, c_alpha resolved from known_c_alpha() or the ratio extrapolation.
LimitLaw limit_law_for(const ExperimentConfig& config,
                       const LevyTailModel& model);

// Runs the experiment (simulator or limit-law source), computes per-cell KS /
// moment statistics and the verdict. Budget exhaustion is reported in-band
// via report.error with verdict=false; config and model errors propagate.
ExperimentReport run_experiment(const ExperimentConfig& config);

// Serializes a report: "json" (schema-versioned, round-trips), "csv" (one row
// per cell), or "plotdata" (per cell and tested component: x, empirical CDF,
// limit CDF; needs keep_samples).
std::string emit_report(const ExperimentReport& report,
                        const std::string& format);

// Writes content to path via a temp file + rename, so readers never observe
// a partial artifact.
void write_text_atomic(const std::string& path, const std::string& content);

struct CalibrationResult {
  int n_pass = 0;
  int n_seeds = 0;
  std::vector<std::uint64_t> failing_seeds;
};

// Re-runs the config with limit-law samples (seed + i for i in [0, n_seeds))
// and counts the seeds whose every enabled KS threshold passes. Trend and
// moment checks are not part of calibration.
CalibrationResult null_calibration(const ExperimentConfig& config, int n_seeds);

}  // namespace tlp
