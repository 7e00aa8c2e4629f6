#pragma once

#include <string>
#include <vector>

#include "tlp/levy_model.hpp"

namespace tlp {

enum class MomentRoute {
  prefer_analytic,  // closed form when the model has one, else quadrature
  force_quadrature, // always integrate (used to cross-check closed forms)
};

struct TruncatedMoment {
  double value = 0.0;      // may underflow to 0 for steep tails; see log_value
  double log_value = 0.0;
  std::string method;      // "analytic" or "quadrature"
  double est_error = 0.0;  // relative error estimate (0 for analytic)
  bool grid_truncated = false;  // tabulated grid did not cover the deep tail
};

// int_0^t u^p Pi(du), p >= 1, t > 0; constant in t beyond the support edge.
// Computed through the inverse-tail transformation
//   int_0^t u^p Pi(du) = int_{tail(t)}^inf (tail_inverse(s))^p ds
// with a log substitution, so only tail_inverse evaluations are needed.
TruncatedMoment truncated_moment(const LevyTailModel& model, double p, double t,
                                 MomentRoute route = MomentRoute::prefer_analytic);

// Same, with t passed in log scale (usable where t itself underflows).
TruncatedMoment truncated_moment_log(const LevyTailModel& model, double p,
                                     double log_t,
                                     MomentRoute route = MomentRoute::prefer_analytic);

// Second-moment ratio sigma^2(x) / (x^2 tail(x)); converges to the model's
// c_alpha as x -> 0 (alpha/(2-alpha) for the stable family, 0 for slowly
// varying tails).
double c_alpha_ratio(const LevyTailModel& model, double x);
double c_alpha_ratio_log(const LevyTailModel& model, double log_x);

struct CAlphaEstimate {
  double estimate = 0.0;
  double uncertainty = 0.0;
  bool converged = false;  // false means "no limit detected on this grid"
  std::vector<double> log_x;
  std::vector<double> ratios;
};

// Extrapolates c_alpha_ratio along a geometric grid of log x values
// (default: log x doubling from -8 to -256) with an Aitken delta-squared
// step on the final points.
CAlphaEstimate c_alpha_limit(const LevyTailModel& model,
                             std::vector<double> log_x = {});

}  // namespace tlp
