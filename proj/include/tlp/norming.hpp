#pragma once

#include "tlp/levy_model.hpp"

namespace tlp {

// Limit-shape function family indexed by the regime parameter gamma <= 0:
//   gamma = 0:  h(x) = 2x on all of R
//   gamma < 0:  h(x) = -(2/gamma) log(1 - gamma x) on (−1/|gamma|, inf)
// Arguments outside the admissible window are DomainErrors.
double h_fn(double gamma, double x);

// Inverse of h_fn; maps 0 to 0 exactly in every regime.
double h_inverse_fn(double gamma, double y);

struct NormingSequences {
  double r = 0.0;
  double a = 0.0;      // scale; may underflow to 0 for steep tails (use log_a)
  double b = 0.0;      // center; may underflow to 0 (use log_b)
  double log_a = 0.0;
  double log_b = 0.0;
  double gamma = 0.0;
};

// Centering b_r = tail_inverse(r) and the per-regime scale:
//   gamma < 0: a_r = |gamma| b_r (exact in this family)
//   gamma = 0: a_r = 2 (tail_inverse(r - sqrt(r)) - tail_inverse(r))
// r is real and must exceed 1. Honors a model's analytic_norming override.
NormingSequences norming_sequences(const LevyTailModel& model, double r);

// Finite-r shape diagnostic (r - tail(a_r x + b_r)) / sqrt(r); converges to
// h_fn(gamma, x) pointwise when the norming is admissible. Computed in log
// scale so it stays usable where a_r, b_r underflow.
double empirical_h(const LevyTailModel& model, double r, double x);

// Slow-variation diagnostics built from the inverse tail:
//   H(t) = exp(2 sqrt(t)),  H_inverse(y) = (log y)^2 / 4,
//   V = tail_inverse o H_inverse,  f(t) = sqrt(t),
//   g_p(p, t) = V(t)^p (log t) / 2,
//   pi_p(p, t) = int_t^inf V(v)^p (log v) / (2v) dv.
// Everything takes log(t) ("log_s") because the interesting scales are
// e^(hundreds). pi_p is evaluated through the truncated-moment identity
// pi_p(V_inverse(t)) = int_0^t u^p Pi(du).
struct DeHaanDiagnostics {
  explicit DeHaanDiagnostics(ModelPtr model);

  double log_H(double t) const;             // log of H(t) = 2 sqrt(t)
  double H_inverse_from_log(double log_y) const;
  double log_V_from_log(double log_s) const;
  double log_g_p(double p, double log_s) const;
  double log_pi_p(double p, double log_s) const;

 private:
  ModelPtr model_;
};

// Normalized increment of V across a multiplicative step x at scale s
// (s passed as log s):
//   (V(s x) - V(s)) / a(H_inverse(s))
// Converges to -log(x)/2 when gamma = 0 and to -((x^(gamma/2)-1)/gamma) when
// gamma < 0.
double dehaan_v_check(const LevyTailModel& model, double x, double log_s);

}  // namespace tlp
