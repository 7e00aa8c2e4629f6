#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace tlp {

inline double normal_pdf(double x) {
  return 0.3989422804014327 * std::exp(-0.5 * x * x);
}

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x * 0.7071067811865476);
}

// Inverse of normal_cdf, accurate to ~1e-15 (rational approximation plus one
// Halley refinement step).
double normal_quantile(double p);

// Compensated accumulation (Neumaier variant of Kahan summation). The
// correction also handles the case |x| > |sum|, so terms may arrive in any
// magnitude order.
struct NeumaierSum {
  double sum = 0.0;
  double comp = 0.0;

  void add(double x) {
    double t = sum + x;
    if (std::fabs(sum) >= std::fabs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }

  double value() const { return sum + comp; }
};

// Adaptive Simpson quadrature on [a, b]. If est_error is non-null it receives
// an (approximate) absolute error bound accumulated over subintervals.
double adaptive_simpson(const std::function<double(double)>& f, double a,
                        double b, double rel_tol, double* est_error = nullptr);

double sample_mean(const std::vector<double>& v);
// Unbiased (n-1) sample variance.
double sample_variance(const std::vector<double>& v);
double sample_correlation(const std::vector<double>& a,
                          const std::vector<double>& b);

// Root of a monotone increasing g on [lo, hi], assuming g(lo) <= 0 <= g(hi).
// Bisects until the bracket is narrower than x_tol.
double bisect_increasing(const std::function<double(double)>& g, double lo,
                         double hi, double x_tol);

}  // namespace tlp
