#include "tlp/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "tlp/errors.hpp"
#include "tlp/moments.hpp"
#include "tlp/norming.hpp"
#include "tlp/numeric.hpp"

namespace tlp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}  // namespace

Scheme scheme_from_string(const std::string& name) {
  if (name == "COND_CLT") return Scheme::COND_CLT;
  if (name == "JOINT_RANDOM") return Scheme::JOINT_RANDOM;
  if (name == "NEG_DET_SCALE") return Scheme::NEG_DET_SCALE;
  if (name == "NEG_DET_CENTER") return Scheme::NEG_DET_CENTER;
  if (name == "G0_DET_SCALE") return Scheme::G0_DET_SCALE;
  if (name == "RV_DET_CENTER") return Scheme::RV_DET_CENTER;
  if (name == "SLOW_DET_CENTER") return Scheme::SLOW_DET_CENTER;
  if (name == "DELTA_ONLY") return Scheme::DELTA_ONLY;
  throw ConfigError(
      "unknown scheme '" + name +
      "' (expected COND_CLT, JOINT_RANDOM, NEG_DET_SCALE, NEG_DET_CENTER, "
      "G0_DET_SCALE, RV_DET_CENTER, SLOW_DET_CENTER or DELTA_ONLY)");
}

std::string scheme_to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::COND_CLT: return "COND_CLT";
    case Scheme::JOINT_RANDOM: return "JOINT_RANDOM";
    case Scheme::NEG_DET_SCALE: return "NEG_DET_SCALE";
    case Scheme::NEG_DET_CENTER: return "NEG_DET_CENTER";
    case Scheme::G0_DET_SCALE: return "G0_DET_SCALE";
    case Scheme::RV_DET_CENTER: return "RV_DET_CENTER";
    case Scheme::SLOW_DET_CENTER: return "SLOW_DET_CENTER";
    case Scheme::DELTA_ONLY: return "DELTA_ONLY";
  }
  return "?";
}

ResidualMode residual_mode_from_string(const std::string& name) {
  if (name == "gaussian") return ResidualMode::gaussian;
  if (name == "compensated") return ResidualMode::compensated;
  throw ConfigError("unknown residual mode '" + name +
                    "' (expected gaussian or compensated)");
}

std::string residual_mode_to_string(ResidualMode mode) {
  return mode == ResidualMode::gaussian ? "gaussian" : "compensated";
}

namespace {

void validate_grid(const std::vector<std::size_t>& r_grid,
                   std::size_t min_depth) {
  if (r_grid.empty()) throw ConfigError("r_grid must be non-empty");
  bool first = true;
  std::size_t prev = 0;
  for (std::size_t r : r_grid) {
    if (r < min_depth) {
      throw ConfigError("trimming depths must be >= " +
                        std::to_string(min_depth));
    }
    if (!first && r <= prev) {
      throw ConfigError("r_grid must be strictly increasing");
    }
    first = false;
    prev = r;
  }
}

void validate_horizon(double t) {
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw DomainError("horizon t must be positive and finite");
  }
}

struct ResidualMoments {
  double mean = 0.0;  // t * first truncated moment at the cut level
  double sd = 0.0;    // sqrt(t * second truncated moment)
};

ResidualMoments residual_moments(const LevyTailModel& model, double log_d,
                                 double log_t) {
  ResidualMoments rm;
  rm.mean = std::exp(log_t + truncated_moment_log(model, 1.0, log_d).log_value);
  rm.sd =
      std::exp(0.5 * (log_t + truncated_moment_log(model, 2.0, log_d).log_value));
  return rm;
}

// Generator for the ordered jump magnitudes of one path: jump l has size
// tail_inverse(G_l / t) where G_l is a unit-rate Poisson arrival sequence.
// Compensated summation plus a nextafter bump keep G strictly increasing even
// past the point where single exponential increments fall under one ulp.
class JumpSequence {
 public:
  JumpSequence(const LevyTailModel& model, double t, RngStream& stream)
      : model_(model),
        stream_(stream),
        log_t_(std::log(t)),
        t_(t),
        log_top_(model.log_max_tail_level()),
        bounded_(std::isfinite(model.log_max_tail_level())) {}

  double next() {
    acc_.add(stream_.next_exponential());
    double g = acc_.value();
    if (!(g > prev_g_)) g = std::nextafter(prev_g_, kInf);
    prev_g_ = g;
    if (!bounded_) return model_.tail_inverse(g / t_);
    double log_y = std::log(g) - log_t_;
    if (log_y > log_top_) {
      throw ModelError(model_.label() +
                       ": grid exhausted before the truncation target; extend "
                       "the table toward smaller x");
    }
    return std::exp(model_.log_tail_inverse_from_log(log_y));
  }

  // Log of the current (smallest realised) jump, exact under linear underflow.
  double log_current_jump() const {
    return model_.log_tail_inverse_from_log(std::log(prev_g_) - log_t_);
  }

 private:
  const LevyTailModel& model_;
  RngStream& stream_;
  NeumaierSum acc_;
  double prev_g_ = 0.0;
  double log_t_;
  double t_;
  double log_top_;
  bool bounded_;
};

}  // namespace

std::vector<TrimmedSample> sweep_trimmed(const LevyTailModel& model,
                                         const std::vector<std::size_t>& r_grid,
                                         double t, RngStream& stream,
                                         const SweepOptions& opts) {
  validate_grid(r_grid, 0);
  validate_horizon(t);
  if (!(opts.rel_tol > 0.0) || !std::isfinite(opts.rel_tol)) {
    throw ConfigError("rel_tol must be positive and finite");
  }
  const std::size_t n_cells = r_grid.size();
  const std::size_t r_max = r_grid.back();
  const std::size_t stop_at = opts.force_truncation_index;
  if (stop_at != 0 && stop_at < r_max) {
    throw ConfigError("force_truncation_index must be >= the deepest trim");
  }
  if (r_max > opts.max_points || (stop_at != 0 && stop_at > opts.max_points)) {
    throw BudgetError("jump budget smaller than the requested trimming depth",
                      0, kInf, 0.0);
  }
  const double log_t = std::log(t);

  std::vector<TrimmedSample> out(n_cells);
  if (r_grid[0] == 0) out[0].delta = kInf;  // untrimmed: no r-th jump
  std::vector<NeumaierSum> acc(n_cells);
  JumpSequence jumps(model, t, stream);

  ResidualMoments rm;
  bool satisfied = false;
  std::size_t l = 0;
  std::size_t next_check = stop_at != 0 ? stop_at : r_max;

  while (l < opts.max_points) {
    ++l;
    double x = jumps.next();

    std::size_t k = 0;
    while (k < n_cells && r_grid[k] < l) {
      acc[k].add(x);
      ++k;
    }
    if (k < n_cells && r_grid[k] == l) out[k].delta = x;

    if (l < next_check) continue;
    rm = residual_moments(model, jumps.log_current_jump(), log_t);
    if (stop_at != 0) {
      satisfied = true;
      break;
    }
    // The deepest trim has the smallest sum, so it binds the criterion.
    if (rm.sd <= opts.rel_tol * (acc.back().value() + rm.mean)) {
      satisfied = true;
      break;
    }
    next_check = std::min(l + std::max<std::size_t>(16, l / 8), opts.max_points);
  }

  if (!satisfied) {
    double partial = acc.back().value() + rm.mean;
    double achieved = partial > 0.0 ? rm.sd / partial : kInf;
    throw BudgetError("jump budget exhausted before the residual target", l,
                      achieved, partial);
  }

  double residual = rm.mean;
  if (opts.mode == ResidualMode::gaussian && rm.sd > 0.0) {
    // Gaussian tail proxy, resampled away from negative territory (the exact
    // residual is a nonnegative sum); the acceptance region has probability
    // ~1 whenever the truncation rule was satisfied.
    double draw = rm.mean + rm.sd * stream.next_normal();
    for (int tries = 0; draw < 0.0 && tries < 64; ++tries) {
      draw = rm.mean + rm.sd * stream.next_normal();
    }
    residual = std::max(draw, 0.0);
  }

  for (std::size_t k = 0; k < n_cells; ++k) {
    out[k].trimmed_x = acc[k].value() + residual;
    out[k].truncation_index = l;
    out[k].tail_mean = rm.mean;
    out[k].tail_sd = rm.sd;
  }
  return out;
}

TrimmedSample sample_trimmed(const LevyTailModel& model, std::size_t r, double t,
                             RngStream& stream, const SweepOptions& opts) {
  return sweep_trimmed(model, {r}, t, stream, opts)[0];
}

std::vector<TrimmedSample> sweep_delta_only(const LevyTailModel& model,
                                            const std::vector<std::size_t>& r_grid,
                                            double t, RngStream& stream,
                                            const SweepOptions& opts) {
  validate_grid(r_grid, 1);
  validate_horizon(t);
  const std::size_t r_max = r_grid.back();
  if (r_max > opts.max_points) {
    throw BudgetError("jump budget smaller than the requested trimming depth",
                      0, kInf, 0.0);
  }
  std::vector<TrimmedSample> out(r_grid.size());
  JumpSequence jumps(model, t, stream);
  std::size_t k = 0;
  for (std::size_t l = 1; l <= r_max; ++l) {
    double x = jumps.next();
    if (r_grid[k] == l) {
      out[k].delta = x;
      out[k].trimmed_x = kNaN;
      out[k].truncation_index = l;
      ++k;
    }
  }
  return out;
}

namespace {

struct CellNorm {
  double b = 0.0;
  double a = 0.0;
  double log_b = 0.0;
  double mu_b = 0.0;     // first truncated moment at b (horizon 1)
  double sigma_b = 0.0;  // sqrt of the second truncated moment at b
  double b_sqrt_r = 0.0;
};

bool scheme_uses_deterministic_moments(Scheme s) {
  switch (s) {
    case Scheme::NEG_DET_SCALE:
    case Scheme::NEG_DET_CENTER:
    case Scheme::G0_DET_SCALE:
    case Scheme::RV_DET_CENTER:
    case Scheme::SLOW_DET_CENTER:
      return true;
    default:
      return false;
  }
}

void validate_scheme_regime(const LevyTailModel& model, Scheme scheme,
                            double t) {
  double gamma = model.gamma();
  switch (scheme) {
    case Scheme::NEG_DET_SCALE:
    case Scheme::NEG_DET_CENTER:
      if (!(gamma < 0.0)) {
        throw ConfigError(scheme_to_string(scheme) +
                          " requires a model with gamma < 0");
      }
      break;
    case Scheme::G0_DET_SCALE:
    case Scheme::RV_DET_CENTER:
    case Scheme::SLOW_DET_CENTER:
      if (gamma != 0.0) {
        throw ConfigError(scheme_to_string(scheme) +
                          " requires a model with gamma = 0");
      }
      break;
    default:
      break;
  }
  if (t != 1.0 && scheme != Scheme::DELTA_ONLY) {
    throw ConfigError("horizon t != 1 is only supported with DELTA_ONLY");
  }
}

NormalizedRow normalize_row(const LevyTailModel& model, Scheme scheme,
                            const CellNorm& cell, const TrimmedSample& s,
                            std::size_t replicate) {
  NormalizedRow row;
  row.replicate = replicate;
  row.delta = s.delta;
  row.trimmed_x = s.trimmed_x;
  row.truncation_index = s.truncation_index;
  row.tail_sd = s.tail_sd;

  auto mean_at_delta = [&](double log_d) {
    return std::exp(truncated_moment_log(model, 1.0, log_d).log_value);
  };
  auto sd_at_delta = [&](double log_d) {
    return std::exp(0.5 * truncated_moment_log(model, 2.0, log_d).log_value);
  };

  switch (scheme) {
    case Scheme::COND_CLT:
    case Scheme::JOINT_RANDOM: {
      double log_d = std::log(s.delta);
      row.col1 = (s.trimmed_x - mean_at_delta(log_d)) / sd_at_delta(log_d);
      row.col2 = (s.delta - cell.b) / cell.a;
      break;
    }
    case Scheme::NEG_DET_SCALE: {
      double log_d = std::log(s.delta);
      row.col1 = (s.trimmed_x - mean_at_delta(log_d)) / cell.sigma_b;
      row.col2 = std::exp(log_d - cell.log_b);
      break;
    }
    case Scheme::NEG_DET_CENTER:
      row.col1 = (s.trimmed_x - cell.mu_b) / cell.b_sqrt_r;
      row.col2 = std::exp(std::log(s.delta) - cell.log_b);
      break;
    case Scheme::G0_DET_SCALE: {
      double log_d = std::log(s.delta);
      row.col1 = (s.trimmed_x - mean_at_delta(log_d)) / cell.sigma_b;
      row.col2 = (s.delta - cell.b) / cell.a;
      break;
    }
    case Scheme::RV_DET_CENTER:
      row.col1 = (s.trimmed_x - cell.mu_b) / cell.sigma_b;
      row.col2 = (s.delta - cell.b) / cell.a;
      break;
    case Scheme::SLOW_DET_CENTER:
      row.col1 = (s.trimmed_x - cell.mu_b) / cell.b_sqrt_r;
      row.col2 = (s.delta - cell.b) / cell.a;
      break;
    case Scheme::DELTA_ONLY:
      row.col1 = kNaN;
      row.col2 = (s.delta - cell.b) / cell.a;
      break;
  }
  return row;
}

// Runs body(i) for i in [0, n), serial or OpenMP. Replicates are independent;
// on error the work is aborted (best effort) and the failure from the lowest
// replicate index that actually ran is rethrown.
template <typename Body>
void for_each_replicate(std::size_t n, Exec exec, int threads, Body&& body) {
#ifdef _OPENMP
  if (exec == Exec::openmp) {
    std::atomic<bool> abort{false};
    std::exception_ptr first_error = nullptr;
    std::size_t first_error_at = n;
    int nt = threads > 0 ? threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic, 16) num_threads(nt)
    for (long long i = 0; i < static_cast<long long>(n); ++i) {
      if (abort.load(std::memory_order_relaxed)) continue;
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
#pragma omp critical(tlp_replicate_error)
        {
          if (static_cast<std::size_t>(i) < first_error_at) {
            first_error_at = static_cast<std::size_t>(i);
            first_error = std::current_exception();
          }
        }
        abort.store(true, std::memory_order_relaxed);
      }
    }
    if (first_error) std::rethrow_exception(first_error);
    return;
  }
#endif
  (void)exec;
  (void)threads;
  for (std::size_t i = 0; i < n; ++i) {
    body(i);  // serial: first throw propagates immediately
  }
}

}  // namespace

std::vector<std::vector<NormalizedRow>> sample_normalized_sweep(
    const LevyTailModel& model, Scheme scheme,
    const std::vector<std::size_t>& r_grid, double t, std::size_t n,
    std::uint64_t seed, const SimOptions& opts) {
  validate_grid(r_grid, 1);
  validate_horizon(t);
  validate_scheme_regime(model, scheme, t);
  if (n < 1) throw ConfigError("replicate count n must be >= 1");

  const std::size_t n_cells = r_grid.size();
  std::vector<CellNorm> cells;
  cells.reserve(n_cells);
  for (std::size_t r : r_grid) {
    double r_eff = scheme == Scheme::DELTA_ONLY
                       ? static_cast<double>(r) / t
                       : static_cast<double>(r);
    NormingSequences ns = norming_sequences(model, r_eff);
    CellNorm c;
    c.b = ns.b;
    c.a = ns.a;
    c.log_b = ns.log_b;
    if (scheme_uses_deterministic_moments(scheme)) {
      c.mu_b = std::exp(truncated_moment_log(model, 1.0, ns.log_b).log_value);
      c.sigma_b =
          std::exp(0.5 * truncated_moment_log(model, 2.0, ns.log_b).log_value);
      c.b_sqrt_r = std::exp(ns.log_b + 0.5 * std::log(r_eff));
    }
    cells.push_back(c);
  }

  std::vector<std::vector<NormalizedRow>> rows(
      n_cells, std::vector<NormalizedRow>(n));
  for_each_replicate(n, opts.exec, opts.threads, [&](std::size_t i) {
    RngStream stream(seed, i);
    std::vector<TrimmedSample> samples =
        scheme == Scheme::DELTA_ONLY
            ? sweep_delta_only(model, r_grid, t, stream, opts.sweep)
            : sweep_trimmed(model, r_grid, t, stream, opts.sweep);
    for (std::size_t k = 0; k < n_cells; ++k) {
      rows[k][i] = normalize_row(model, scheme, cells[k], samples[k], i);
    }
  });
  return rows;
}

std::vector<NormalizedRow> sample_normalized(const LevyTailModel& model,
                                             Scheme scheme, std::size_t r,
                                             double t, std::size_t n,
                                             std::uint64_t seed,
                                             const SimOptions& opts) {
  return std::move(
      sample_normalized_sweep(model, scheme, {r}, t, n, seed, opts)[0]);
}

}  // namespace tlp
