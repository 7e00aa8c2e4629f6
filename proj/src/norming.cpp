#include "tlp/norming.hpp"

#include <cmath>

#include "tlp/errors.hpp"
#include "tlp/moments.hpp"

namespace tlp {

double h_fn(double gamma, double x) {
  if (gamma > 0.0) throw DomainError("h_fn: gamma must be <= 0");
  if (!std::isfinite(x)) throw DomainError("h_fn: x must be finite");
  if (gamma == 0.0) return 2.0 * x;
  double arg = -gamma * x;  // |gamma| x
  if (1.0 + arg <= 0.0) {
    throw DomainError("h_fn: x outside the admissible window (1 - gamma x <= 0)");
  }
  return (2.0 / -gamma) * std::log1p(arg);
}

double h_inverse_fn(double gamma, double y) {
  if (gamma > 0.0) throw DomainError("h_inverse_fn: gamma must be <= 0");
  if (!std::isfinite(y)) throw DomainError("h_inverse_fn: y must be finite");
  if (gamma == 0.0) return 0.5 * y;
  double ag = -gamma;
  return std::expm1(0.5 * ag * y) / ag;
}

NormingSequences norming_sequences(const LevyTailModel& model, double r) {
  if (!(r > 1.0) || !std::isfinite(r)) {
    throw DomainError("norming_sequences: r must be finite and > 1");
  }
  NormingSequences ns;
  ns.r = r;
  ns.gamma = model.gamma();

  if (auto override = model.analytic_norming(r)) {
    ns.a = override->a;
    ns.b = override->b;
    ns.log_a = override->log_a;
    ns.log_b = override->log_b;
    return ns;
  }

  ns.log_b = model.log_tail_inverse(r);
  ns.b = std::exp(ns.log_b);
  if (ns.gamma < 0.0) {
    ns.log_a = std::log(-ns.gamma) + ns.log_b;
  } else {
    // a_r = 2 b_r (exp(delta) - 1) with delta = log inverse(r - sqrt r) - log inverse(r),
    // formed in log scale so it survives b_r underflowing.
    double delta = model.log_tail_inverse(r - std::sqrt(r)) - ns.log_b;
    ns.log_a = std::log(2.0) + ns.log_b + std::log(std::expm1(delta));
  }
  ns.a = std::exp(ns.log_a);
  return ns;
}

double empirical_h(const LevyTailModel& model, double r, double x) {
  NormingSequences ns = norming_sequences(model, r);
  double ratio = std::exp(ns.log_a - ns.log_b);  // a_r / b_r, O(1) or smaller
  double arg = 1.0 + ratio * x;
  if (arg <= 0.0) {
    throw DomainError("empirical_h: a_r x + b_r must stay positive");
  }
  double tail_at = model.tail_from_log(ns.log_b + std::log(arg));
  return (r - tail_at) / std::sqrt(r);
}

DeHaanDiagnostics::DeHaanDiagnostics(ModelPtr model)
    : model_(std::move(model)) {}

double DeHaanDiagnostics::log_H(double t) const {
  if (!(t > 0.0)) throw DomainError("log_H: t must be positive");
  return 2.0 * std::sqrt(t);
}

double DeHaanDiagnostics::H_inverse_from_log(double log_y) const {
  if (!(log_y > 0.0)) throw DomainError("H_inverse: need y > 1");
  return 0.25 * log_y * log_y;
}

double DeHaanDiagnostics::log_V_from_log(double log_s) const {
  return model_->log_tail_inverse(H_inverse_from_log(log_s));
}

double DeHaanDiagnostics::log_g_p(double p, double log_s) const {
  return p * log_V_from_log(log_s) + std::log(0.5 * log_s);
}

double DeHaanDiagnostics::log_pi_p(double p, double log_s) const {
  // pi_p at argument s equals the truncated p-th moment at t = V(s).
  double log_t = log_V_from_log(log_s);
  return truncated_moment_log(*model_, p, log_t).log_value;
}

double dehaan_v_check(const LevyTailModel& model, double x, double log_s) {
  if (!(x > 0.0)) throw DomainError("dehaan_v_check: x must be positive");
  if (!(log_s > 0.0)) throw DomainError("dehaan_v_check: need s > 1");
  double log_sx = log_s + std::log(x);
  if (!(log_sx > 0.0)) {
    throw DomainError("dehaan_v_check: s x must stay above 1");
  }
  double t = 0.25 * log_s * log_s;
  double log_v_s = model.log_tail_inverse(t);
  double log_v_sx = model.log_tail_inverse(0.25 * log_sx * log_sx);
  NormingSequences ns = norming_sequences(model, t);
  // (V(sx) - V(s)) / a_t with V(s) = b_t, assembled in log scale.
  return std::expm1(log_v_sx - log_v_s) * std::exp(ns.log_b - ns.log_a);
}

}  // namespace tlp
