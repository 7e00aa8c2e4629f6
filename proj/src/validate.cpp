#include <cmath>
#include <limits>
#include <sstream>
#include <string>
#include <vector>

#include "tlp/errors.hpp"
#include "tlp/levy_model.hpp"
#include "tlp/moments.hpp"

namespace tlp {

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

}  // namespace

ValidationReport validate_model(const LevyTailModel& model) {
  ValidationReport rep;
  rep.label = model.label();
  rep.gamma = model.gamma();
  rep.support_edge = model.support_edge();
  std::vector<std::string> violations;

  if (rep.gamma > 0.0) {
    violations.push_back("regime gamma must be <= 0, got " + fmt(rep.gamma));
  } else {
    rep.checks.emplace_back("regime", "gamma = " + fmt(rep.gamma));
  }

  // Probe window in log scale. Built-in models accept any log_x below the
  // support edge; a tabulated grid constrains us to its own range.
  bool finite_edge = std::isfinite(rep.support_edge);
  double log_hi = finite_edge ? std::log(rep.support_edge) : 20.0;
  double log_lo = log_hi - 40.0;
  bool grid_limited = false;
  for (int k = 0; k < 60; ++k) {
    try {
      model.tail_from_log(log_lo);
      break;
    } catch (const DomainError&) {
      grid_limited = true;
      log_lo += 0.5;  // shrink until we are inside the tabulated range
    }
  }
  if (grid_limited) {
    // Land strictly inside and re-sample the upper end as well.
    try {
      model.tail_from_log(log_hi);
    } catch (const DomainError&) {
      log_hi -= 1e-9;
    }
  }

  // Monotonicity: strictly decreasing while positive.
  const int kProbes = 64;
  double prev = std::numeric_limits<double>::infinity();
  bool monotone = true;
  for (int i = 0; i < kProbes; ++i) {
    double lx = log_lo + (log_hi - log_lo) * i / (kProbes - 1);
    double v = model.tail_from_log(lx);
    if (v < 0.0 || std::isnan(v)) {
      violations.push_back("tail must be nonnegative, got " + fmt(v) +
                           " at log x = " + fmt(lx));
      monotone = false;
      break;
    }
    if (v > prev || (v == prev && v > 0.0)) {
      violations.push_back("tail not strictly decreasing near log x = " +
                           fmt(lx));
      monotone = false;
      break;
    }
    prev = v;
  }
  if (monotone) {
    rep.checks.emplace_back("monotone",
                            "strictly decreasing over probe grid of " +
                                std::to_string(kProbes));
  }

  // Infinite activity: tail should keep growing as x drops.
  if (grid_limited) {
    rep.checks.emplace_back(
        "divergence", "not verifiable from a finite grid; left-edge tail = " +
                          fmt(model.tail_from_log(log_lo)));
  } else {
    double near = model.tail_from_log(log_lo);
    double nearer = model.tail_from_log(log_lo - 20.0);
    if (!(nearer > near) || !(near > 10.0)) {
      violations.push_back("tail does not appear to diverge as x -> 0 (" +
                           fmt(near) + " then " + fmt(nearer) + ")");
    } else {
      rep.checks.emplace_back("divergence",
                              "tail(" + fmt(std::exp(log_lo - 20.0)) + ") = " +
                                  fmt(nearer));
    }
  }

  // Inverse consistency: tail(tail_inverse(y)) must reproduce y.
  {
    double worst = 0.0;
    double worst_y = 0.0;
    bool ok = true;
    for (int i = 0; i < kProbes; ++i) {
      double lx = log_lo + (log_hi - log_lo) * i / (kProbes - 1);
      double y = model.tail_from_log(lx);
      if (!(y > 0.0)) continue;
      try {
        double lxi = model.log_tail_inverse_from_log(std::log(y));
        double back = model.tail_from_log(lxi);
        double rel = std::fabs(back - y) / y;
        if (rel > worst) {
          worst = rel;
          worst_y = y;
        }
      } catch (const DomainError& e) {
        violations.push_back("inverse round trip failed at level " + fmt(y) +
                             ": " + e.what());
        ok = false;
        break;
      }
    }
    if (ok && worst > 1e-10) {
      violations.push_back("inverse round trip error " + fmt(worst) +
                           " at level " + fmt(worst_y) + " exceeds 1e-10");
    } else if (ok) {
      rep.checks.emplace_back("inverse",
                              "round trip within " + fmt(worst) + " relative");
    }
  }

  // Integrability of u against the measure near 0.
  try {
    double t_ref = std::min(1.0, rep.support_edge);
    if (grid_limited) {
      // Stay inside the tabulated range.
      t_ref = std::exp(log_hi);
    }
    TruncatedMoment m = truncated_moment(model, 1.0, t_ref);
    if (!std::isfinite(m.log_value) && !(m.value >= 0.0)) {
      violations.push_back("first truncated moment is not finite");
    } else {
      std::string note = "int u Pi(du) up to " + fmt(t_ref) + " = " +
                         fmt(m.value) + " (" + m.method + ")";
      if (m.grid_truncated) note += ", grid-truncated";
      rep.checks.emplace_back("integrability", note);
    }
  } catch (const std::exception& e) {
    violations.push_back(std::string("integrability probe failed: ") +
                         e.what());
  }

  if (!violations.empty()) {
    std::string msg = "model validation failed for " + rep.label + ":";
    for (const auto& v : violations) msg += "\n  - " + v;
    throw ModelError(msg);
  }
  return rep;
}

}  // namespace tlp
