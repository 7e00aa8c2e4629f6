// Acceptance harness: runs the pinned desk-scale criteria and prints one
// [PASS]/[FAIL] line each. Exit 0 iff every selected criterion passes.
//
//   tlp_acceptance [--criterion N] [--config-dir DIR]
//
// Criteria 1-8 execute the preset configs under configs/ and re-assert the
// pinned thresholds in code, so silent config edits surface as failures
// ("config drift") rather than weakened bounds. Criteria 9-12 exercise the
// moment engine, its asymptotics, simulator exactness, and the verification
// harness's null calibration.

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <exception>
#include <numeric>
#include <string>
#include <vector>

#include "tlp/levy_model.hpp"
#include "tlp/moments.hpp"
#include "tlp/norming.hpp"
#include "tlp/numeric.hpp"
#include "tlp/rng.hpp"
#include "tlp/simulate.hpp"
#include "tlp/verify.hpp"

using namespace tlp;

namespace {

std::string g_config_dir = "configs";

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) {
  char buf[1024];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

ExperimentConfig load(const std::string& name) {
  return load_experiment_config(g_config_dir + "/" + name);
}

// Pinned-run guard: the preset must still describe the criterion's setting.
std::string drift_check(const ExperimentConfig& c, const std::string& model,
                        Scheme scheme, const std::vector<std::size_t>& grid,
                        std::size_t n, double t) {
  if (c.model_spec.value("model", "") != model) return "model changed";
  if (c.scheme != scheme) return "scheme changed";
  if (c.r_grid != grid) return "r grid changed";
  if (c.n != n) return "n changed";
  if (c.t != t) return "horizon changed";
  if (model == "stable" && !near(c.model_spec.value("alpha", 0.0), 0.5, 0.0)) {
    return "alpha changed";
  }
  if (model == "logpower" && !near(c.model_spec.value("gamma", 0.0), -1.0, 0.0)) {
    return "gamma changed";
  }
  return "";
}

// Checks every realised per-cell threshold of one column against the pinned
// bounds (the asymptotic-coefficient split must still add up to them).
std::string threshold_check(const ExperimentReport& rep, int column,
                            const std::vector<double>& bounds) {
  if (rep.cells.size() != bounds.size()) return "cell count changed";
  for (std::size_t k = 0; k < bounds.size(); ++k) {
    double thr = column == 1 ? rep.cells[k].threshold_col1
                             : rep.cells[k].threshold_col2;
    if (!near(thr, bounds[k], 5e-5)) {
      return fmt("threshold drift: col%d cell %zu is %.8f, pinned %.4f", column,
                 k, thr, bounds[k]);
    }
  }
  return "";
}

Outcome run_marginal(const std::string& file, const std::string& model,
                     Scheme scheme, double t, int column, double bound,
                     const char* label) {
  ExperimentConfig c = load(file);
  std::string d = drift_check(c, model, scheme, {2000}, 20000, t);
  if (!d.empty()) return {false, "config drift: " + d};
  ExperimentReport rep = run_experiment(c);
  if (!rep.error.empty()) return {false, "run aborted: " + rep.error};
  d = threshold_check(rep, column, {bound});
  if (!d.empty()) return {false, d};
  const CellReport& cell = rep.cells.back();
  double ks = column == 1 ? cell.ks_col1 : cell.ks_col2;
  return {rep.verdict, fmt("%s: ks=%.4f (bound %.3f) at r=2000, n=20000",
                           label, ks, bound)};
}

// 1: r-th-jump marginal for the stable tail, deterministic norming.
Outcome criterion_1() {
  return run_marginal("repro_1.10.json", "stable", Scheme::DELTA_ONLY, 1.0, 2,
                      0.02, "jump marginal vs limit cdf");
}

// 2: trimmed-sum CLT with random centering and scaling.
Outcome criterion_2() {
  return run_marginal("repro_2.1.json", "stable", Scheme::COND_CLT, 1.0, 1,
                      0.02, "trimmed-sum marginal vs normal");
}

// 3: joint limit: both marginals plus asymptotic independence.
Outcome criterion_3() {
  ExperimentConfig c = load("repro_2.2.json");
  std::string d = drift_check(c, "stable", Scheme::JOINT_RANDOM, {2000}, 20000, 1.0);
  if (!d.empty()) return {false, "config drift: " + d};
  if (!c.moment_checks.corr || (*c.moment_checks.corr)[0] != -0.05 ||
      (*c.moment_checks.corr)[1] != 0.05) {
    return {false, "config drift: correlation window changed"};
  }
  ExperimentReport rep = run_experiment(c);
  if (!rep.error.empty()) return {false, "run aborted: " + rep.error};
  for (int col : {1, 2}) {
    d = threshold_check(rep, col, {0.02});
    if (!d.empty()) return {false, d};
  }
  const CellReport& cell = rep.cells.back();
  return {rep.verdict,
          fmt("ks1=%.4f ks2=%.4f (bound 0.020), corr=%+.4f (|corr| bound 0.05)",
              cell.ks_col1, cell.ks_col2, cell.corr)};
}

// 4: deterministic scale in the flat regime; same joint checks.
Outcome criterion_4() {
  ExperimentConfig c = load("repro_2.3ii.json");
  std::string d = drift_check(c, "stable", Scheme::G0_DET_SCALE, {2000}, 20000, 1.0);
  if (!d.empty()) return {false, "config drift: " + d};
  if (!c.moment_checks.corr || (*c.moment_checks.corr)[0] != -0.05 ||
      (*c.moment_checks.corr)[1] != 0.05) {
    return {false, "config drift: correlation window changed"};
  }
  ExperimentReport rep = run_experiment(c);
  if (!rep.error.empty()) return {false, "run aborted: " + rep.error};
  for (int col : {1, 2}) {
    d = threshold_check(rep, col, {0.02});
    if (!d.empty()) return {false, d};
  }
  const CellReport& cell = rep.cells.back();
  return {rep.verdict,
          fmt("ks1=%.4f ks2=%.4f (bound 0.020), corr=%+.4f (|corr| bound 0.05)",
              cell.ks_col1, cell.ks_col2, cell.corr)};
}

// 5: deterministic centering with a regularly varying tail: the limit pair is
// correlated with first-component variance 1 + 1/c_alpha = 4.
Outcome criterion_5() {
  ExperimentConfig c = load("repro_2.4i.json");
  std::string d = drift_check(c, "stable", Scheme::RV_DET_CENTER, {2000}, 20000, 1.0);
  if (!d.empty()) return {false, "config drift: " + d};
  if (!c.moment_checks.var1 || (*c.moment_checks.var1)[0] != 3.6 ||
      (*c.moment_checks.var1)[1] != 4.4) {
    return {false, "config drift: variance window changed"};
  }
  if (!c.moment_checks.corr || (*c.moment_checks.corr)[0] != 0.83 ||
      (*c.moment_checks.corr)[1] != 0.9) {
    return {false, "config drift: correlation window changed"};
  }
  ExperimentReport rep = run_experiment(c);
  if (!rep.error.empty()) return {false, "run aborted: " + rep.error};
  d = threshold_check(rep, 1, {0.025});
  if (!d.empty()) return {false, d};
  const CellReport& cell = rep.cells.back();
  return {rep.verdict,
          fmt("ks1=%.4f (bound 0.025), var1=%.4f (window [3.6,4.4]), "
              "corr=%.4f (window [0.83,0.90])",
              cell.ks_col1, cell.var1, cell.corr)};
}

// 6: slowly varying tail, deterministic centering. The normal marginal and
// the KS trend hold; the independence half does not at any finite depth (the
// trimmed sum keeps a jump-driven component), so the correlation window is
// expected to fail. Reported honestly.
Outcome criterion_6() {
  ExperimentConfig c = load("repro_2.4ii.json");
  std::string d = drift_check(c, "slowtail", Scheme::SLOW_DET_CENTER, {500, 2000},
                              10000, 1.0);
  if (!d.empty()) return {false, "config drift: " + d};
  if (!c.moment_checks.corr || (*c.moment_checks.corr)[0] != -0.05 ||
      (*c.moment_checks.corr)[1] != 0.05) {
    return {false, "config drift: correlation window changed"};
  }
  if (!c.trend || c.trend->strict) return {false, "config drift: trend changed"};
  ExperimentReport rep = run_experiment(c);
  if (!rep.error.empty()) return {false, "run aborted: " + rep.error};
  d = threshold_check(rep, 1, {0.10, 0.05});
  if (!d.empty()) return {false, d};
  const CellReport& cell = rep.cells.back();
  return {rep.verdict,
          fmt("ks1=%.4f/%.4f over r={500,2000} (bounds 0.10/0.05, "
              "non-increasing=%s), corr=%+.4f (|corr| bound 0.05)",
              rep.cells[0].ks_col1, cell.ks_col1,
              rep.trend_pass ? "yes" : "no", cell.corr)};
}

// 7: negative regime: jump-marginal KS strictly decreasing along the r grid,
// and the deterministic-center first component's variance matches the
// independently derived limit value 4(e^(1/2) - e^(1/4)) within 10%.
Outcome criterion_7() {
  const double limit_var = 4.0 * (std::exp(0.5) - std::exp(0.25));
  ExperimentConfig c = load("repro_2.3i.json");
  std::string d = drift_check(c, "logpower", Scheme::NEG_DET_CENTER,
                              {500, 2000, 5000}, 10000, 1.0);
  if (!d.empty()) return {false, "config drift: " + d};
  if (!c.trend || !c.trend->strict || c.trend->column != 2) {
    return {false, "config drift: trend changed"};
  }
  if (!c.moment_checks.var1 ||
      !near((*c.moment_checks.var1)[0], 0.9 * limit_var, 1e-9) ||
      !near((*c.moment_checks.var1)[1], 1.1 * limit_var, 1e-9)) {
    return {false, "config drift: variance window is not +-10% of the limit"};
  }
  ExperimentReport rep = run_experiment(c);
  if (!rep.error.empty()) return {false, "run aborted: " + rep.error};
  d = threshold_check(rep, 2, {0.10, 0.10, 0.05});
  if (!d.empty()) return {false, d};
  const CellReport& cell = rep.cells.back();
  return {rep.verdict,
          fmt("ks2=%.4f/%.4f/%.4f over r={500,2000,5000} (strictly "
              "decreasing=%s, final bound 0.05), var1=%.4f (window "
              "[%.4f,%.4f])",
              rep.cells[0].ks_col2, rep.cells[1].ks_col2, cell.ks_col2,
              rep.trend_pass ? "yes" : "no", cell.var1, 0.9 * limit_var,
              1.1 * limit_var)};
}

// 8: jump marginal at a general horizon, normings taken at r/t.
Outcome criterion_8() {
  return run_marginal("repro_7.1.json", "stable", Scheme::DELTA_ONLY, 4.0, 2,
                      0.025, "jump marginal vs limit cdf at t=4");
}

// 9: moment engine: quadrature agrees with the closed form at 50 probes, and
// the second-moment ratio is constant at alpha/(2-alpha).
Outcome criterion_9() {
  ModelPtr m = make_stable(0.5);
  const double alpha = 0.5;
  double max_rel = 0.0;
  int probes = 0;
  for (int p = 1; p <= 2; ++p) {
    for (int i = 0; i < 25; ++i) {
      double log_t = -6.0 + 12.0 * i / 24.0;
      TruncatedMoment q =
          truncated_moment_log(*m, p, log_t, MomentRoute::force_quadrature);
      double analytic = std::log(alpha / (p - alpha)) + (p - alpha) * log_t;
      max_rel = std::max(max_rel, std::fabs(std::expm1(q.log_value - analytic)));
      ++probes;
    }
  }
  double max_dev = 0.0;
  for (double x : {1e-6, 1e-4, 1e-2, 0.1, 1.0, 10.0, 100.0}) {
    max_dev = std::max(max_dev,
                       std::fabs(c_alpha_ratio(*m, x) - alpha / (2.0 - alpha)));
  }
  bool pass = probes == 50 && max_rel <= 1e-8 && max_dev <= 1e-10;
  return {pass, fmt("quadrature vs closed form: max rel err %.2e over %d "
                    "probes (bound 1e-8); ratio constancy: max dev %.2e "
                    "(bound 1e-10)",
                    max_rel, probes, max_dev)};
}

// 10: second-moment asymptotic in the negative regime:
// sigma^2(b_r) |gamma| / (b_r^2 sqrt(r)) -> 1, monotonically along the grid.
Outcome criterion_10() {
  ModelPtr m = make_logpower(-1.0);
  std::vector<double> gaps;
  std::string shown;
  for (double r : {1e3, 1e4, 1e5}) {
    double log_b = m->log_tail_inverse_from_log(std::log(r));
    TruncatedMoment m2 =
        truncated_moment_log(*m, 2.0, log_b, MomentRoute::force_quadrature);
    double ratio = std::exp(m2.log_value - 2.0 * log_b) / std::sqrt(r);
    gaps.push_back(std::fabs(ratio - 1.0));
    shown += fmt("%s%.5f", shown.empty() ? "" : ", ", ratio);
  }
  bool monotone = gaps[0] > gaps[1] && gaps[1] > gaps[2];
  bool pass = monotone && gaps[2] <= 0.05;
  return {pass, fmt("scaled variance ratio %s over r={1e3,1e4,1e5} "
                    "(monotone approach=%s, final gap %.2e, bound 0.05)",
                    shown.c_str(), monotone ? "yes" : "no", gaps[2])};
}

// 11: simulator exactness: trimmed sum plus removed jumps reconstructs the
// untrimmed sum pathwise, and the trimmed sum is centered by the conditional
// mean given the r-th jump.
Outcome criterion_11() {
  ModelPtr m = make_stable(0.5);
  std::vector<std::size_t> grid(51);
  std::iota(grid.begin(), grid.end(), 0);
  SweepOptions so;
  so.mode = ResidualMode::compensated;
  double worst = 0.0;
  for (std::uint64_t rep = 0; rep < 200; ++rep) {
    RngStream s(4242, rep);
    std::vector<TrimmedSample> cells = sweep_trimmed(*m, grid, 1.0, s, so);
    NeumaierSum back;
    back.add(cells[50].trimmed_x);
    for (std::size_t i = 1; i <= 50; ++i) back.add(cells[i].delta);
    worst = std::max(worst, std::fabs(back.value() - cells[0].trimmed_x) /
                                cells[0].trimmed_x);
  }
  bool identity_ok = worst <= 1e-12;

  // mu(x) = sqrt(x) for this tail: E[trimmed - mu(delta)] = 0 exactly.
  const std::size_t n = 10000;
  NeumaierSum sum, sumsq;
  for (std::uint64_t i = 0; i < n; ++i) {
    RngStream s(31337, i);
    TrimmedSample ts = sample_trimmed(*m, 50, 1.0, s, so);
    double dev = ts.trimmed_x - std::sqrt(ts.delta);
    sum.add(dev);
    sumsq.add(dev * dev);
  }
  double mean = sum.value() / n;
  double var = (sumsq.value() - n * mean * mean) / (n - 1);
  double se = std::sqrt(var / n);
  bool centered = std::fabs(mean) <= 3.0 * se;
  return {identity_ok && centered,
          fmt("reconstruction rel err %.2e over 200 paths (bound 1e-12); "
              "centering |mean|=%.2e vs 3 se=%.2e at r=50, n=10000",
              worst, std::fabs(mean), 3.0 * se)};
}

// 12: null calibration: limit-law self-samples clear every preset's KS
// thresholds in at least 99 of 100 seeds.
Outcome criterion_12() {
  const char* files[] = {"repro_1.10.json", "repro_2.1.json", "repro_2.2.json",
                         "repro_2.3i.json", "repro_2.3ii.json",
                         "repro_2.4i.json", "repro_2.4ii.json",
                         "repro_7.1.json"};
  int worst = 100;
  std::string worst_file = "-";
  for (const char* f : files) {
    CalibrationResult res = null_calibration(load(f), 100);
    if (res.n_pass < worst) {
      worst = res.n_pass;
      worst_file = f;
    }
  }
  return {worst >= 99, fmt("min pass count %d/100 across 8 presets (bound 99; "
                           "worst preset %s)",
                           worst, worst_file.c_str())};
}

}  // namespace

int main(int argc, char** argv) {
  int selected = 0;
  for (int i = 1; i < argc; ++i) {
    std::string a = argv[i];
    if (a == "--criterion" && i + 1 < argc) {
      selected = std::atoi(argv[++i]);
      if (selected < 1 || selected > 12) {
        std::fprintf(stderr, "criterion must be in 1..12\n");
        return 2;
      }
    } else if (a == "--config-dir" && i + 1 < argc) {
      g_config_dir = argv[++i];
    } else {
      std::fprintf(stderr,
                   "usage: tlp_acceptance [--criterion N] [--config-dir DIR]\n");
      return 2;
    }
  }

  Outcome (*fns[12])() = {criterion_1, criterion_2, criterion_3, criterion_4,
                          criterion_5, criterion_6, criterion_7, criterion_8,
                          criterion_9, criterion_10, criterion_11, criterion_12};
  bool all = true;
  for (int k = 1; k <= 12; ++k) {
    if (selected != 0 && selected != k) continue;
    Outcome o;
    try {
      o = fns[k - 1]();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("[%s] criterion %02d: %s\n", o.pass ? "PASS" : "FAIL", k,
                o.detail.c_str());
    std::fflush(stdout);
    all = all && o.pass;
  }
  return all ? 0 : 1;
}
