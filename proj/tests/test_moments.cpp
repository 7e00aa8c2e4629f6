#include <doctest.h>

#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "tlp/errors.hpp"
#include "tlp/levy_model.hpp"
#include "tlp/moments.hpp"
#include "tlp/norming.hpp"

using namespace tlp;

TEST_CASE("stable truncated moments: closed form values") {
  ModelPtr m = make_stable(0.5);
  // int_0^t u^p Pi(du) = alpha/(p-alpha) t^(p-alpha)
  TruncatedMoment m1 = truncated_moment(*m, 1.0, 1.0);
  CHECK(m1.method == "analytic");
  CHECK(m1.value == doctest::Approx(1.0).epsilon(1e-14));
  TruncatedMoment m2 = truncated_moment(*m, 2.0, 1.0);
  CHECK(m2.value == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
  CHECK(truncated_moment(*m, 1.0, 0.25).value ==
        doctest::Approx(0.5).epsilon(1e-14));

  CHECK_THROWS_AS(truncated_moment(*m, 0.5, 1.0), DomainError);  // p < 1
  CHECK_THROWS_AS(truncated_moment(*m, 1.0, -1.0), DomainError);
  CHECK_THROWS_AS(truncated_moment(*m, 1.0, 0.0), DomainError);
}

TEST_CASE("quadrature route reproduces the stable closed forms") {
  for (double alpha : {0.3, 0.5, 0.8}) {
    ModelPtr m = make_stable(alpha);
    for (int k = 0; k < 25; ++k) {
      double t = std::exp(-6.0 + 12.0 * k / 24.0);
      for (double p : {1.0, 2.0}) {
        TruncatedMoment a = truncated_moment(*m, p, t);
        TruncatedMoment q =
            truncated_moment(*m, p, t, MomentRoute::force_quadrature);
        REQUIRE(a.method == "analytic");
        REQUIRE(q.method == "quadrature");
        CHECK(std::exp(q.log_value - a.log_value) ==
              doctest::Approx(1.0).epsilon(1e-8));
        CHECK(q.est_error < 1e-8);
        CHECK(!q.grid_truncated);
      }
    }
  }
}

TEST_CASE("logpower and slowtail closed forms match quadrature") {
  for (const ModelPtr& m :
       {make_logpower(-1.0), make_logpower(-0.5), make_slowtail()}) {
    for (double t : {0.9, 0.1, 1e-3, 1e-6}) {
      for (double p : {1.0, 2.0}) {
        TruncatedMoment a = truncated_moment(*m, p, t);
        TruncatedMoment q =
            truncated_moment(*m, p, t, MomentRoute::force_quadrature);
        REQUIRE(a.method == "analytic");
        CHECK(std::exp(q.log_value - a.log_value) ==
              doctest::Approx(1.0).epsilon(1e-8));
      }
    }
  }
}

TEST_CASE("moments vanish as t -> 0 and grow with t") {
  ModelPtr m = make_slowtail();
  double prev = -std::numeric_limits<double>::infinity();
  for (double log_t : {-600.0, -100.0, -10.0, -1.0, -0.1}) {
    double lv = truncated_moment_log(*m, 1.0, log_t).log_value;
    CHECK(lv > prev);
    prev = lv;
  }
  // Deep in the tail: m1(t) = 4 t (l^3 + 3 l^2 + 6 l + 6), l = log(1/t),
  // so log m1(e^-600) ~ -600 + 20.6.
  double deep = truncated_moment_log(*m, 1.0, -600.0).log_value;
  CHECK(deep < -570.0);
  CHECK(deep > -600.0);
  // Constant beyond the support edge.
  CHECK(truncated_moment(*m, 1.0, 5.0).log_value ==
        doctest::Approx(truncated_moment(*m, 1.0, 1.0).log_value)
            .epsilon(1e-12));
}

TEST_CASE("second-moment ratio is exactly constant for stable tails") {
  for (double alpha : {0.3, 0.5, 1.0 - 1e-9}) {
    ModelPtr m = make_stable(alpha);
    double expected = alpha / (2.0 - alpha);
    for (double x : {1e-6, 1e-2, 1.0, 100.0}) {
      CHECK(c_alpha_ratio(*m, x) == doctest::Approx(expected).epsilon(1e-12));
    }
  }
  // alpha near 1: the ratio approaches 1 from below.
  CHECK(c_alpha_ratio(*make_stable(1.0 - 1e-9), 0.5) ==
        doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("slowly varying tails have vanishing ratio") {
  ModelPtr m = make_slowtail();
  double prev = std::numeric_limits<double>::infinity();
  for (int k = 4; k <= 10; ++k) {
    double ratio = c_alpha_ratio_log(*m, -std::pow(2.0, k));
    CHECK(ratio < prev);
    CHECK(ratio > 0.0);
    prev = ratio;
  }
  // sigma^2(x) / (x^2 tail(x)) = (2 l^3 + 3 l^2 + 3 l + 1.5) / l^4 with
  // l = log(1/x).
  double l = 256.0;
  double expected =
      (2 * l * l * l + 3 * l * l + 3 * l + 1.5) / (l * l * l * l);
  CHECK(c_alpha_ratio_log(*m, -256.0) ==
        doctest::Approx(expected).epsilon(1e-9));
}

TEST_CASE("ratio limit extrapolation") {
  CAlphaEstimate st = c_alpha_limit(*make_stable(0.5));
  CHECK(st.converged);
  CHECK(st.estimate == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
  CHECK(st.ratios.size() == st.log_x.size());

  CAlphaEstimate sl = c_alpha_limit(*make_slowtail());
  CHECK(sl.converged);
  CHECK(std::fabs(sl.estimate) < 2e-3);

  CHECK_THROWS_AS(c_alpha_limit(*make_stable(0.5), {-1.0, -2.0}), DomainError);
}

TEST_CASE("negative-regime moment scaling (general p)") {
  // m_p(b_r) * p |gamma| / (2 b_r^p sqrt(r)) -> 1 with an O(1/sqrt(r)) gap.
  for (double gamma : {-1.0, -2.0}) {
    ModelPtr m = make_logpower(gamma);
    NormingSequences ns = norming_sequences(*m, 1e6);
    for (double p : {1.0, 2.0, 3.0}) {
      double lv = truncated_moment_log(*m, p, ns.log_b).log_value;
      double scaled = std::exp(lv - p * ns.log_b) * p * std::fabs(gamma) /
                      (2.0 * std::sqrt(1e6));
      CHECK(scaled == doctest::Approx(1.0).epsilon(0.01));
    }
  }
}

TEST_CASE("variance over scale grows like sqrt(r) for stable tails") {
  ModelPtr m = make_stable(0.5);
  double prev = 0.0;
  for (double r : {1e2, 1e3, 1e4}) {
    NormingSequences ns = norming_sequences(*m, r);
    double lv = truncated_moment_log(*m, 2.0, ns.log_b).log_value;
    double ratio = std::exp(lv - 2.0 * ns.log_b) / std::sqrt(r);
    CHECK(ratio > prev);
    prev = ratio;
    // Exactly c_alpha tail(b_r) / sqrt(r) = sqrt(r) / 3 here.
    CHECK(ratio == doctest::Approx(std::sqrt(r) / 3.0).epsilon(1e-10));
  }
}

TEST_CASE("tabulated grids flag truncation instead of guessing") {
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < 40; ++i) {
    double lx = -8.0 + 8.0 * i / 39.0;
    pts.emplace_back(std::exp(lx), std::exp(-0.5 * lx));
  }
  ModelPtr tab = make_tabulated(pts);
  TruncatedMoment m = truncated_moment(*tab, 1.0, 0.5);
  CHECK(m.method == "quadrature");
  CHECK(m.grid_truncated);
  // The covered slice stays below the untruncated reference, and the grid
  // reaches deep enough that most of the mass is in view.
  TruncatedMoment ref = truncated_moment(*make_stable(0.5), 1.0, 0.5);
  CHECK(m.value < ref.value * 1.0001);
  CHECK(m.value > 0.5 * ref.value);
}

namespace {

// tail(x) = 1/x: the boundary case where int_0^t u Pi(du) diverges, so the
// transformed integrand is exactly 1 on every panel and the sweep must hit
// the panel budget instead of converging.
struct DivergentStub final : LevyTailModel {
  double tail_from_log(double log_x) const override {
    return std::exp(-log_x);
  }
  double log_tail_inverse_from_log(double log_y) const override {
    return -log_y;
  }
  double gamma() const override { return 0.0; }
  double support_edge() const override {
    return std::numeric_limits<double>::infinity();
  }
  std::string label() const override { return "divergent-stub"; }
  nlohmann::json spec() const override { return {{"model", "divergent-stub"}}; }
};

}  // namespace

TEST_CASE("non-convergent quadrature raises a budget error with partials") {
  DivergentStub stub;
  try {
    truncated_moment(stub, 1.0, 1.0, MomentRoute::force_quadrature);
    FAIL("expected BudgetError");
  } catch (const BudgetError& e) {
    CHECK(e.points_used == 4000);
    // Each unit panel contributes exactly 1, starting at measure level 1.
    CHECK(e.partial_sum == doctest::Approx(4000.0).epsilon(1e-9));
    CHECK(e.achieved_rel_tol < 1e-6);
  }
}
