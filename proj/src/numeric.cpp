#include "tlp/numeric.hpp"

#include <algorithm>
#include <cstddef>

#include "tlp/errors.hpp"

namespace tlp {

namespace {

// Acklam's rational approximation to the normal quantile.
double quantile_seed(double p) {
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425;

  if (p < plow) {
    double q = std::sqrt(-2.0 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
            c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  if (p > 1.0 - plow) {
    double q = std::sqrt(-2.0 * std::log(1.0 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q +
             c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }
  double q = p - 0.5;
  double r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) *
         q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

}  // namespace

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("normal_quantile: p must lie in (0,1)");
  }
  double x = quantile_seed(p);
  // One Halley step against the exact cdf.
  double e = normal_cdf(x) - p;
  double u = e / normal_pdf(x);
  x -= u / (1.0 + 0.5 * x * u);
  return x;
}

namespace {

struct SimpsonCtx {
  const std::function<double(double)>* f;
  double rel_tol;
  double err = 0.0;
};

double simpson_rec(SimpsonCtx& ctx, double a, double b, double fa, double fm,
                   double fb, double whole, double eps, int depth) {
  double m = 0.5 * (a + b);
  double lm = 0.5 * (a + m);
  double rm = 0.5 * (m + b);
  double flm = (*ctx.f)(lm);
  double frm = (*ctx.f)(rm);
  double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
  double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
  double delta = left + right - whole;
  // Second clause: delta at the panel's own rounding floor. Splitting further
  // only chases noise (and can cascade when eps was scaled off an initial
  // whole-interval estimate that badly underestimates a peaked integrand).
  if (depth <= 0 || std::fabs(delta) <= 15.0 * eps ||
      std::fabs(delta) <= 1e-15 * (std::fabs(left) + std::fabs(right))) {
    ctx.err += std::fabs(delta) / 15.0;
    return left + right + delta / 15.0;
  }
  return simpson_rec(ctx, a, m, fa, flm, fm, left, 0.5 * eps, depth - 1) +
         simpson_rec(ctx, m, b, fm, frm, fb, right, 0.5 * eps, depth - 1);
}

}  // namespace

double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double rel_tol, double* est_error) {
  SimpsonCtx ctx;
  ctx.f = &f;
  ctx.rel_tol = rel_tol;
  double m = 0.5 * (a + b);
  double fa = f(a), fm = f(m), fb = f(b);
  double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  // The 3-point estimate can undershoot a peaked integrand by many orders of
  // magnitude, which would turn rel_tol into an unreachable absolute target.
  // Anchor the tolerance to a coarse composite L1 mass instead.
  double l1 = 0.0;
  {
    double h = (b - a) / 32.0;
    double prev = std::fabs(fa);
    for (int i = 1; i <= 32; ++i) {
      double cur = i == 16 ? std::fabs(fm)
                 : i == 32 ? std::fabs(fb)
                           : std::fabs(f(a + i * h));
      l1 += 0.5 * h * (prev + cur);
      prev = cur;
    }
  }
  double scale = std::max(std::fabs(whole), l1);
  if (scale == 0.0) scale = 1e-300;
  double v = simpson_rec(ctx, a, b, fa, fm, fb, whole, rel_tol * scale, 48);
  if (est_error) *est_error = ctx.err;
  return v;
}

double sample_mean(const std::vector<double>& v) {
  if (v.empty()) throw DomainError("sample_mean: empty input");
  NeumaierSum s;
  for (double x : v) s.add(x);
  return s.value() / static_cast<double>(v.size());
}

double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) throw DomainError("sample_variance: need at least 2 points");
  double m = sample_mean(v);
  NeumaierSum s;
  for (double x : v) s.add((x - m) * (x - m));
  return s.value() / static_cast<double>(v.size() - 1);
}

double sample_correlation(const std::vector<double>& a,
                          const std::vector<double>& b) {
  if (a.size() != b.size()) {
    throw DomainError("sample_correlation: length mismatch");
  }
  if (a.size() < 2) {
    throw DomainError("sample_correlation: need at least 2 points");
  }
  double ma = sample_mean(a), mb = sample_mean(b);
  NeumaierSum sab, saa, sbb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double da = a[i] - ma, db = b[i] - mb;
    sab.add(da * db);
    saa.add(da * da);
    sbb.add(db * db);
  }
  double denom = std::sqrt(saa.value()) * std::sqrt(sbb.value());
  if (denom == 0.0) throw DomainError("sample_correlation: zero variance");
  return sab.value() / denom;
}

double bisect_increasing(const std::function<double(double)>& g, double lo,
                         double hi, double x_tol) {
  double glo = g(lo);
  double ghi = g(hi);
  if (glo > 0.0 || ghi < 0.0) {
    throw DomainError("bisect_increasing: root not bracketed");
  }
  while (hi - lo > x_tol) {
    double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // hit float resolution
    if (g(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace tlp
