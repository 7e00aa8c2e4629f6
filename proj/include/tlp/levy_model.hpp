#pragma once

#include <json.hpp>

#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace tlp {

// Optional closed-form norming override a model may supply.
struct NormingPair {
  double a = 0.0;
  double b = 0.0;
  double log_a = 0.0;
  double log_b = 0.0;
};

// Decreasing tail x -> measure of (x, inf) of a driftless subordinator's jump
// measure. Instances are immutable after construction and safe to share
// across threads.
//
// Everything is evaluated in log scale internally: for steep tails the scale
// constants underflow double range long before the math becomes ill-posed
// (e.g. an exp(-sqrt(y)) inverse underflows once y exceeds ~5e5), so the
// log-scale entry points are the primitive ones and the linear-scale calls
// are wrappers.
class LevyTailModel {
 public:
  virtual ~LevyTailModel() = default;

  // tail(exp(log_x)); defined for all real log_x up to the support edge.
  virtual double tail_from_log(double log_x) const = 0;

  // log of the generalized inverse, as a function of log(y).
  virtual double log_tail_inverse_from_log(double log_y) const = 0;

  // Linear-scale wrappers. Overridable where a direct form is cheaper.
  virtual double tail(double x) const;
  virtual double tail_inverse(double y) const;
  double log_tail_inverse(double y) const;

  // Extreme-value regime of the small-jump tail: 0 or negative.
  virtual double gamma() const = 0;

  // Right edge of the jump-size support (+inf if unbounded).
  virtual double support_edge() const = 0;

  // Log of the highest measure level the model can evaluate: +inf for
  // analytic models, the tail at the left end of the grid for tabulated ones.
  virtual double log_max_tail_level() const {
    return std::numeric_limits<double>::infinity();
  }

  // log(support_edge()), overridable where an exact value avoids round-trip
  // error at a grid boundary.
  virtual double log_support_edge() const;

  // Limit of sigma^2(x) / (x^2 tail(x)) as x -> 0, when known analytically.
  virtual std::optional<double> known_c_alpha() const { return std::nullopt; }

  // log of int_0^t u^p Pi(du) when a closed form exists; log_t is log(t)
  // already clamped to the support edge by the caller.
  virtual std::optional<double> analytic_log_moment(double p,
                                                    double log_t) const {
    (void)p;
    (void)log_t;
    return std::nullopt;
  }

  // Optional closed-form norming sequences; models without one fall back to
  // the generic per-regime construction.
  virtual std::optional<NormingPair> analytic_norming(double r) const {
    (void)r;
    return std::nullopt;
  }

  virtual std::string label() const = 0;

  // The JSON spec this model was built from (round-trips through make_model).
  virtual nlohmann::json spec() const = 0;
};

using ModelPtr = std::shared_ptr<const LevyTailModel>;

ModelPtr make_stable(double alpha);
ModelPtr make_logpower(double gamma);
ModelPtr make_slowtail();
// points: (x, tail) pairs, x strictly increasing, tail strictly decreasing,
// all positive. gamma must be <= 0 and is declared, not inferred.
ModelPtr make_tabulated(std::vector<std::pair<double, double>> points,
                        double gamma = 0.0, std::string source_path = "");
ModelPtr make_tabulated_from_csv(const std::string& path, double gamma = 0.0);

// Factory from a JSON spec: {"model":"stable","alpha":0.5},
// {"model":"logpower","gamma":-1.0}, {"model":"slowtail"},
// {"model":"tabulated","path":"grid.csv"[,"gamma":-1.0]}.
// Unknown keys or models are ConfigErrors.
ModelPtr make_model(const nlohmann::json& spec);

struct ValidationReport {
  std::string label;
  double gamma = 0.0;
  double support_edge = 0.0;
  // (check name, outcome note) pairs; all passing if this returned at all.
  std::vector<std::pair<std::string, std::string>> checks;
};

// Probes tail monotonicity, divergence at 0, integrability of u near 0 and
// the regime sign. Throws ModelError on violation.
ValidationReport validate_model(const LevyTailModel& model);

}  // namespace tlp
