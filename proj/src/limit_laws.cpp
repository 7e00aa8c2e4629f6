#include "tlp/limit_laws.hpp"

#include <cmath>
#include <limits>

#include "tlp/errors.hpp"
#include "tlp/norming.hpp"
#include "tlp/numeric.hpp"

namespace tlp {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double lognormal_mean(double sigma_log) {
  return std::exp(0.5 * sigma_log * sigma_log);
}

double lognormal_var(double sigma_log) {
  double s2 = sigma_log * sigma_log;
  return std::exp(2.0 * s2) - std::exp(s2);
}
}  // namespace

LimitLaw::LimitLaw(Scheme scheme, double gamma, std::optional<double> c_alpha,
                   double t)
    : scheme_(scheme), gamma_(gamma), c_alpha_(c_alpha), t_(t) {}

LimitLaw make_limit_law(Scheme scheme, double gamma,
                        std::optional<double> c_alpha, double t) {
  if (!(gamma <= 0.0) || !std::isfinite(gamma)) {
    throw ConfigError("limit law: gamma must be finite and <= 0");
  }
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw ConfigError("limit law: t must be positive and finite");
  }
  if (t != 1.0 && scheme != Scheme::DELTA_ONLY) {
    throw ConfigError("limit law: t != 1 is only supported with DELTA_ONLY");
  }
  switch (scheme) {
    case Scheme::NEG_DET_SCALE:
    case Scheme::NEG_DET_CENTER:
      if (!(gamma < 0.0)) {
        throw ConfigError(scheme_to_string(scheme) + " requires gamma < 0");
      }
      break;
    case Scheme::G0_DET_SCALE:
    case Scheme::RV_DET_CENTER:
    case Scheme::SLOW_DET_CENTER:
      if (gamma != 0.0) {
        throw ConfigError(scheme_to_string(scheme) + " requires gamma = 0");
      }
      break;
    default:
      break;
  }
  if (scheme == Scheme::RV_DET_CENTER) {
    if (!c_alpha || !(*c_alpha > 0.0 && *c_alpha <= 1.0)) {
      throw ConfigError("RV_DET_CENTER requires c_alpha in (0, 1]");
    }
  } else if (scheme == Scheme::SLOW_DET_CENTER) {
    if (c_alpha && *c_alpha != 0.0) {
      throw ConfigError("SLOW_DET_CENTER requires c_alpha = 0");
    }
  } else if (c_alpha) {
    throw ConfigError("c_alpha is only meaningful for RV_DET_CENTER and "
                      "SLOW_DET_CENTER");
  }
  return LimitLaw(scheme, gamma, c_alpha, t);
}

std::array<double, 2> LimitLaw::sample(RngStream& stream) const {
  double ag = -gamma_;  // |gamma| in the gamma < 0 regimes
  switch (scheme_) {
    case Scheme::COND_CLT:
    case Scheme::JOINT_RANDOM: {
      double nx = stream.next_normal();
      double ng = stream.next_normal();
      return {nx, h_inverse_fn(gamma_, ng)};
    }
    case Scheme::NEG_DET_SCALE: {
      double nx = stream.next_normal();
      double w = std::exp(-0.5 * ag * stream.next_normal());
      return {nx * w, w};
    }
    case Scheme::NEG_DET_CENTER: {
      // Both components ride on the same lognormal factor.
      stream.next_normal();  // keep the (N_X, N_G) draw order of the family
      double w = std::exp(-0.5 * ag * stream.next_normal());
      return {(2.0 / ag) * (w - 1.0), w};
    }
    case Scheme::G0_DET_SCALE:
    case Scheme::SLOW_DET_CENTER: {
      double nx = stream.next_normal();
      double ng = stream.next_normal();
      return {nx, 0.5 * ng};
    }
    case Scheme::RV_DET_CENTER: {
      double nx = stream.next_normal();
      double ng = stream.next_normal();
      return {nx + ng / std::sqrt(*c_alpha_), 0.5 * ng};
    }
    case Scheme::DELTA_ONLY: {
      double ng = stream.next_normal();
      return {kNaN, h_inverse_fn(gamma_, ng / std::sqrt(t_))};
    }
  }
  return {kNaN, kNaN};
}

double LimitLaw::marginal_cdf(int component, double x) const {
  if (component != 1 && component != 2) {
    throw DomainError("marginal_cdf: component must be 1 or 2");
  }
  double ag = -gamma_;
  if (component == 2) {
    switch (scheme_) {
      case Scheme::COND_CLT:
      case Scheme::JOINT_RANDOM:
        return delta_limit_cdf(gamma_, x, 1.0);
      case Scheme::DELTA_ONLY:
        return delta_limit_cdf(gamma_, x, t_);
      case Scheme::NEG_DET_SCALE:
      case Scheme::NEG_DET_CENTER:
        // lognormal: log W ~ N(0, gamma^2/4)
        if (x <= 0.0) return 0.0;
        return normal_cdf(2.0 * std::log(x) / ag);
      default:
        // N_G / 2
        return normal_cdf(2.0 * x);
    }
  }
  switch (scheme_) {
    case Scheme::COND_CLT:
    case Scheme::JOINT_RANDOM:
    case Scheme::G0_DET_SCALE:
    case Scheme::SLOW_DET_CENTER:
      return normal_cdf(x);
    case Scheme::RV_DET_CENTER:
      return normal_cdf(x / std::sqrt(1.0 + 1.0 / *c_alpha_));
    case Scheme::NEG_DET_CENTER:
      // P((2/|g|)(W-1) <= x) = Phi((2/|g|) log(1 + |g| x / 2))
      if (x <= -2.0 / ag) return 0.0;
      return normal_cdf((2.0 / ag) * std::log1p(0.5 * ag * x));
    case Scheme::NEG_DET_SCALE: {
      // Normal-lognormal mixture: E_z[Phi(x e^{|g| z / 2})], z ~ N(0,1).
      if (x == 0.0) return 0.5;
      double v = adaptive_simpson(
          [&](double z) { return normal_pdf(z) * normal_cdf(x * std::exp(0.5 * ag * z)); },
          -9.0, 9.0, 1e-10);
      return std::min(1.0, std::max(0.0, v));
    }
    case Scheme::DELTA_ONLY:
      throw DomainError("marginal_cdf: DELTA_ONLY has no first component");
  }
  return kNaN;
}

double LimitLaw::marginal_quantile(int component, double p) const {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("marginal_quantile: p must lie in (0,1)");
  }
  if (component != 1 && component != 2) {
    throw DomainError("marginal_quantile: component must be 1 or 2");
  }
  double z = normal_quantile(p);
  double ag = -gamma_;
  if (component == 2) {
    switch (scheme_) {
      case Scheme::COND_CLT:
      case Scheme::JOINT_RANDOM:
        return h_inverse_fn(gamma_, z);
      case Scheme::DELTA_ONLY:
        return h_inverse_fn(gamma_, z / std::sqrt(t_));
      case Scheme::NEG_DET_SCALE:
      case Scheme::NEG_DET_CENTER:
        return std::exp(0.5 * ag * z);
      default:
        return 0.5 * z;
    }
  }
  switch (scheme_) {
    case Scheme::COND_CLT:
    case Scheme::JOINT_RANDOM:
    case Scheme::G0_DET_SCALE:
    case Scheme::SLOW_DET_CENTER:
      return z;
    case Scheme::RV_DET_CENTER:
      return z * std::sqrt(1.0 + 1.0 / *c_alpha_);
    case Scheme::NEG_DET_CENTER:
      return (2.0 / ag) * std::expm1(0.5 * ag * z);
    case Scheme::NEG_DET_SCALE: {
      // Numeric CDF; expand a bracket, then bisect.
      double lo = -1.0, hi = 1.0;
      while (marginal_cdf(1, lo) > p) lo *= 2.0;
      while (marginal_cdf(1, hi) < p) hi *= 2.0;
      return bisect_increasing([&](double x) { return marginal_cdf(1, x) - p; },
                               lo, hi, 1e-10);
    }
    case Scheme::DELTA_ONLY:
      throw DomainError("marginal_quantile: DELTA_ONLY has no first component");
  }
  return kNaN;
}

MomentSummary LimitLaw::moments() const {
  MomentSummary m;
  double ag = -gamma_;
  double sl = 0.5 * ag;  // sigma of log W
  switch (scheme_) {
    case Scheme::COND_CLT:
    case Scheme::JOINT_RANDOM:
      m.mean1 = 0.0;
      m.var1 = 1.0;
      if (gamma_ == 0.0) {
        m.mean2 = 0.0;
        m.var2 = 0.25;
      } else {
        // h_inverse(N) = (W - 1)/|g| with W lognormal(0, g^2/4)
        m.mean2 = (lognormal_mean(sl) - 1.0) / ag;
        m.var2 = lognormal_var(sl) / (ag * ag);
      }
      m.corr = 0.0;
      break;
    case Scheme::NEG_DET_SCALE:
      m.mean1 = 0.0;
      m.var1 = std::exp(2.0 * sl * sl);  // E[N^2] E[W^2]
      m.mean2 = lognormal_mean(sl);
      m.var2 = lognormal_var(sl);
      m.corr = 0.0;  // uncorrelated, though dependent
      break;
    case Scheme::NEG_DET_CENTER:
      m.mean1 = (2.0 / ag) * (lognormal_mean(sl) - 1.0);
      m.var1 = 4.0 * lognormal_var(sl) / (ag * ag);
      m.mean2 = lognormal_mean(sl);
      m.var2 = lognormal_var(sl);
      m.corr = 1.0;  // both components are the same monotone map of W
      break;
    case Scheme::G0_DET_SCALE:
    case Scheme::SLOW_DET_CENTER:
      m.mean1 = 0.0;
      m.var1 = 1.0;
      m.mean2 = 0.0;
      m.var2 = 0.25;
      m.corr = 0.0;
      break;
    case Scheme::RV_DET_CENTER: {
      double c = *c_alpha_;
      m.mean1 = 0.0;
      m.var1 = 1.0 + 1.0 / c;
      m.mean2 = 0.0;
      m.var2 = 0.25;
      m.corr = 1.0 / std::sqrt(1.0 + c);
      break;
    }
    case Scheme::DELTA_ONLY: {
      m.mean1 = kNaN;
      m.var1 = kNaN;
      m.col1_degenerate = true;
      if (gamma_ == 0.0) {
        m.mean2 = 0.0;
        m.var2 = 0.25 / t_;
      } else {
        double slt = sl / std::sqrt(t_);
        m.mean2 = (lognormal_mean(slt) - 1.0) / ag;
        m.var2 = lognormal_var(slt) / (ag * ag);
      }
      m.corr = kNaN;
      break;
    }
  }
  return m;
}

double delta_limit_cdf(double gamma, double x, double t) {
  if (!(gamma <= 0.0) || !std::isfinite(gamma)) {
    throw DomainError("delta_limit_cdf: gamma must be finite and <= 0");
  }
  if (!(t > 0.0) || !std::isfinite(t)) {
    throw DomainError("delta_limit_cdf: t must be positive and finite");
  }
  if (gamma < 0.0 && x <= -1.0 / (-gamma)) return 0.0;
  return normal_cdf(std::sqrt(t) * h_fn(gamma, x));
}

std::vector<std::array<double, 2>> limit_sample(const LimitLaw& law,
                                                RngStream& stream,
                                                std::size_t n) {
  if (n < 1) throw DomainError("limit_sample: n must be >= 1");
  std::vector<std::array<double, 2>> out;
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) out.push_back(law.sample(stream));
  return out;
}

}  // namespace tlp
