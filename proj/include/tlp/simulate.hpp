#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "tlp/levy_model.hpp"
#include "tlp/rng.hpp"

namespace tlp {

// Output normalizations. COND_CLT / JOINT_RANDOM standardize the small-jump
// sum by moments evaluated at the random trimming threshold; the *_DET_*
// schemes replace one or both random normalizers with deterministic ones;
// DELTA_ONLY reports just the normalized r-th largest jump.
enum class Scheme {
  COND_CLT,
  JOINT_RANDOM,
  NEG_DET_SCALE,
  NEG_DET_CENTER,
  G0_DET_SCALE,
  RV_DET_CENTER,
  SLOW_DET_CENTER,
  DELTA_ONLY,
};

Scheme scheme_from_string(const std::string& name);
std::string scheme_to_string(Scheme scheme);

// How the mass below the truncation level is re-injected into the sum:
// its exact conditional mean, or a mean + noise draw clipped at zero.
enum class ResidualMode { compensated, gaussian };

ResidualMode residual_mode_from_string(const std::string& name);
std::string residual_mode_to_string(ResidualMode mode);

enum class Exec { serial, openmp };

struct SweepOptions {
  double rel_tol = 1e-4;            // residual sd target relative to the sum
  ResidualMode mode = ResidualMode::gaussian;
  std::size_t max_points = 10'000'000;  // per-replicate jump budget
  std::size_t force_truncation_index = 0;  // 0 = stop by the rel_tol rule
};

// One trimmed-path draw for a single trimming depth r.
struct TrimmedSample {
  double delta = 0.0;       // r-th largest jump (+inf sentinel when r = 0)
  double trimmed_x = 0.0;   // sum of all smaller jumps (+ residual)
  std::size_t truncation_index = 0;  // jumps realised explicitly
  double tail_mean = 0.0;   // residual mean re-injected into trimmed_x
  double tail_sd = 0.0;     // residual sd at the cut; in compensated mode it
                            // bounds the omitted stochastic part
};

// Draws one path of the jump sequence at horizon t and reads it at every
// trimming depth in r_grid (strictly increasing; depth 0 means no trimming
// and reports delta = +inf). All depths share the path and a single residual
// draw, so grid cells are common-random-number coupled. Throws BudgetError if
// max_points explicit jumps do not reach the rel_tol truncation target.
std::vector<TrimmedSample> sweep_trimmed(const LevyTailModel& model,
                                         const std::vector<std::size_t>& r_grid,
                                         double t, RngStream& stream,
                                         const SweepOptions& opts = {});

// Single-depth convenience wrapper around sweep_trimmed.
TrimmedSample sample_trimmed(const LevyTailModel& model, std::size_t r,
                             double t, RngStream& stream,
                             const SweepOptions& opts = {});

// Like sweep_trimmed but only realises the first max(r_grid) jumps and
// records the r-th largest per cell; trimmed_x is NaN.
std::vector<TrimmedSample> sweep_delta_only(const LevyTailModel& model,
                                            const std::vector<std::size_t>& r_grid,
                                            double t, RngStream& stream,
                                            const SweepOptions& opts = {});

// One normalized output row (one replicate at one trimming depth).
struct NormalizedRow {
  std::size_t replicate = 0;
  double col1 = 0.0;  // normalized trimmed sum (NaN for DELTA_ONLY)
  double col2 = 0.0;  // normalized r-th largest jump
  double delta = 0.0;
  double trimmed_x = 0.0;
  std::size_t truncation_index = 0;
  double tail_sd = 0.0;
};

struct SimOptions {
  SweepOptions sweep;
  Exec exec = Exec::serial;
  int threads = 0;  // 0 = library default
};

// n replicates at each depth in r_grid, normalized per `scheme`. Replicate i
// always consumes stream (seed, i), so results are invariant under exec mode
// and thread count, and the jump columns (delta, col2) are invariant under
// regridding too; the trimmed sum is not, because its truncation level binds
// at the deepest requested trim. Returns rows[cell][replicate]. Horizons
// t != 1 are only meaningful for DELTA_ONLY and rejected otherwise.
std::vector<std::vector<NormalizedRow>> sample_normalized_sweep(
    const LevyTailModel& model, Scheme scheme,
    const std::vector<std::size_t>& r_grid, double t, std::size_t n,
    std::uint64_t seed, const SimOptions& opts = {});

// Single-depth convenience wrapper.
std::vector<NormalizedRow> sample_normalized(const LevyTailModel& model,
                                             Scheme scheme, std::size_t r,
                                             double t, std::size_t n,
                                             std::uint64_t seed,
                                             const SimOptions& opts = {});

}  // namespace tlp
