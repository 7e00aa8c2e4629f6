#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <vector>

#include "tlp/rng.hpp"
#include "tlp/simulate.hpp"

namespace tlp {

struct MomentSummary {
  double mean1 = 0.0;
  double var1 = 0.0;
  double mean2 = 0.0;
  double var2 = 0.0;
  double corr = 0.0;
  bool col1_degenerate = false;  // DELTA_ONLY has no first component
};

// A limiting pair distribution: the pushforward of two independent standard
// normals (N_X, N_G) under the scheme's map. Immutable; samplers take the
// stream explicitly, so shared use across threads is safe.
class LimitLaw {
 public:
  LimitLaw(Scheme scheme, double gamma, std::optional<double> c_alpha,
           double t);

  Scheme scheme() const { return scheme_; }
  double gamma() const { return gamma_; }
  std::optional<double> c_alpha() const { return c_alpha_; }
  double horizon() const { return t_; }

  // One draw of the pair; first component is NaN for DELTA_ONLY.
  std::array<double, 2> sample(RngStream& stream) const;

  // Marginal CDF of component 1 or 2. All marginals are closed-form except
  // NEG_DET_SCALE component 1 (normal-lognormal mixture), which is evaluated
  // by quadrature to ~1e-10.
  double marginal_cdf(int component, double x) const;

  // Inverse of marginal_cdf for p in (0,1); closed form where available,
  // bisection otherwise.
  double marginal_quantile(int component, double p) const;

  MomentSummary moments() const;

 private:
  Scheme scheme_;
  double gamma_;
  std::optional<double> c_alpha_;
  double t_;
};

// Builds the limiting pair for a scheme, validating regime compatibility:
// NEG_* need gamma < 0; G0/RV/SLOW need gamma = 0; RV_DET_CENTER needs
// c_alpha in (0,1], SLOW_DET_CENTER accepts only c_alpha = 0; horizons
// t != 1 are DELTA_ONLY-only.
LimitLaw make_limit_law(Scheme scheme, double gamma,
                        std::optional<double> c_alpha = std::nullopt,
                        double t = 1.0);

// CDF of the normalized r-th largest jump limit: Phi(sqrt(t) * h_gamma(x)),
// extended by 0 below the support edge -1/|gamma| when gamma < 0.
double delta_limit_cdf(double gamma, double x, double t);

// n iid draws; deterministic for a fixed stream.
std::vector<std::array<double, 2>> limit_sample(const LimitLaw& law,
                                                RngStream& stream,
                                                std::size_t n);

}  // namespace tlp
