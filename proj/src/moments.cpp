#include "tlp/moments.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tlp/errors.hpp"
#include "tlp/numeric.hpp"

namespace tlp {

namespace {

// Floor for the transformed lower limit: contributions of measure levels
// below this are bounded by edge^p * 1e-280 and irrelevant at double
// precision.
constexpr double kLogTinyLevel = -644.0;  // log(1e-280)

struct QuadratureResult {
  double log_value;
  double rel_error;
  bool grid_truncated;
};

// Integrates int_{y0}^{y_top} (tail_inverse(u))^p du in the scaled form
//   exp(p L0 + log y0) * int_0^{v_max} exp(p (LTI(log y0 + v) - L0) + v) dv
// where LTI is log tail_inverse of log-argument and L0 = LTI(log y0). The
// scaled integrand starts at 1 and decays; panels of unit width are refined
// adaptively and the sweep stops once a panel is lost in the accumulated sum.
QuadratureResult transformed_integral(const LevyTailModel& model, double p,
                                      double log_y0) {
  double log_top = model.log_max_tail_level();
  double v_max = std::numeric_limits<double>::infinity();
  bool truncated = false;
  if (std::isfinite(log_top)) {
    v_max = log_top - log_y0;
    if (v_max <= 0.0) {
      // The whole integration range lies beyond the tabulated grid.
      return {-std::numeric_limits<double>::infinity(), 0.0, true};
    }
  }
  double L0 = model.log_tail_inverse_from_log(log_y0);

  auto integrand = [&](double v) {
    double lti = model.log_tail_inverse_from_log(log_y0 + v);
    return std::exp(p * (lti - L0) + v);
  };

  NeumaierSum acc;
  double err_abs = 0.0;
  const int kMaxPanels = 4000;
  bool converged = false;
  int k = 0;
  for (; k < kMaxPanels; ++k) {
    double lo = static_cast<double>(k);
    double hi = lo + 1.0;
    if (hi > v_max) hi = v_max;
    double panel_err = 0.0;
    double panel;
    try {
      panel = adaptive_simpson(integrand, lo, hi, 1e-11, &panel_err);
    } catch (const DomainError&) {
      // Tabulated models stop being defined past their grid; everything
      // beyond carries unknown (but monotonically shrinking) mass.
      truncated = true;
      converged = true;
      break;
    }
    acc.add(panel);
    err_abs += panel_err;
    if (hi >= v_max) {
      truncated = true;
      converged = true;
      break;
    }
    if (k >= 4 && panel < 1e-16 * acc.value()) {
      converged = true;
      break;
    }
  }

  double total = acc.value();
  if (!converged) {
    double partial =
        total > 0.0 ? std::exp(p * L0 + log_y0 + std::log(total)) : 0.0;
    throw BudgetError("quadrature did not converge within the panel budget",
                      static_cast<std::uint64_t>(kMaxPanels),
                      total > 0.0 ? err_abs / total : std::numeric_limits<double>::infinity(),
                      partial);
  }
  QuadratureResult res;
  res.grid_truncated = truncated;
  if (total <= 0.0) {
    res.log_value = -std::numeric_limits<double>::infinity();
    res.rel_error = 0.0;
    return res;
  }
  res.log_value = p * L0 + log_y0 + std::log(total);
  res.rel_error = err_abs / total;
  return res;
}

}  // namespace

TruncatedMoment truncated_moment_log(const LevyTailModel& model, double p,
                                     double log_t, MomentRoute route) {
  if (!(p >= 1.0) || !std::isfinite(p)) {
    throw DomainError("truncated_moment: p must be >= 1 and finite");
  }
  if (std::isnan(log_t)) throw DomainError("truncated_moment: t is NaN");

  // Beyond the support edge the measure has no mass, so clamp.
  double log_t_eff = std::min(log_t, model.log_support_edge());

  TruncatedMoment out;
  if (route != MomentRoute::force_quadrature) {
    if (auto lm = model.analytic_log_moment(p, log_t_eff)) {
      out.log_value = *lm;
      out.value = std::exp(*lm);
      out.method = "analytic";
      out.est_error = 0.0;
      return out;
    }
  }

  // Lower integration level tail(t); zero at the support edge, so floor it.
  double tail_at_t = model.tail_from_log(log_t_eff);
  double log_y0 =
      tail_at_t > 0.0 ? std::max(std::log(tail_at_t), kLogTinyLevel)
                      : kLogTinyLevel;
  QuadratureResult q = transformed_integral(model, p, log_y0);
  out.log_value = q.log_value;
  out.value = std::exp(q.log_value);
  out.method = "quadrature";
  out.est_error = q.rel_error;
  out.grid_truncated = q.grid_truncated;
  return out;
}

TruncatedMoment truncated_moment(const LevyTailModel& model, double p, double t,
                                 MomentRoute route) {
  if (!(t > 0.0) || std::isnan(t)) {
    throw DomainError("truncated_moment: t must be positive");
  }
  return truncated_moment_log(model, p, std::log(t), route);
}

double c_alpha_ratio_log(const LevyTailModel& model, double log_x) {
  double tail = model.tail_from_log(log_x);
  if (!(tail > 0.0)) {
    throw DomainError("c_alpha_ratio: tail must be positive at x");
  }
  TruncatedMoment m2 = truncated_moment_log(model, 2.0, log_x);
  return std::exp(m2.log_value - 2.0 * log_x - std::log(tail));
}

double c_alpha_ratio(const LevyTailModel& model, double x) {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("c_alpha_ratio: x must be positive and finite");
  }
  return c_alpha_ratio_log(model, std::log(x));
}

CAlphaEstimate c_alpha_limit(const LevyTailModel& model,
                             std::vector<double> log_x) {
  if (log_x.empty()) {
    for (double lx = -8.0; lx >= -256.0 - 0.5; lx *= 2.0) log_x.push_back(lx);
  }
  if (log_x.size() < 3) {
    throw DomainError("c_alpha_limit: need at least 3 grid points");
  }
  CAlphaEstimate est;
  est.log_x = log_x;
  for (double lx : log_x) est.ratios.push_back(c_alpha_ratio_log(model, lx));

  std::size_t n = est.ratios.size();
  double a = est.ratios[n - 3];
  double b = est.ratios[n - 2];
  double c = est.ratios[n - 1];
  double d1 = b - a;
  double d2 = c - b;
  // Differences should not grow if the sequence settles.
  est.converged = std::fabs(d2) <= std::fabs(d1) * 1.25 + 1e-14;
  double denom = d2 - d1;
  if (std::fabs(denom) < 1e-300) {
    est.estimate = c;
    est.uncertainty = std::fabs(d2);
  } else {
    double aitken = c - d2 * d2 / denom;
    est.estimate = aitken;
    est.uncertainty = std::fabs(aitken - c) + std::fabs(d2);
  }
  if (!est.converged) {
    est.estimate = c;  // report the last raw ratio; flag says "no limit"
  }
  return est;
}

}  // namespace tlp
