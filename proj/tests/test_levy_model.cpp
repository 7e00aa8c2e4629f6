#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <vector>

#include "tlp/errors.hpp"
#include "tlp/levy_model.hpp"

using namespace tlp;

TEST_CASE("stable tail and inverse closed forms") {
  ModelPtr m = make_stable(0.5);
  CHECK(m->tail(0.25) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(m->tail_inverse(4.0) == doctest::Approx(1.0 / 16.0).epsilon(1e-15));
  CHECK(m->gamma() == 0.0);
  CHECK(std::isinf(m->support_edge()));
  CHECK(m->known_c_alpha().value() == doctest::Approx(1.0 / 3.0).epsilon(1e-15));

  CHECK_THROWS_AS(make_stable(0.0), ModelError);
  CHECK_THROWS_AS(make_stable(1.0), ModelError);
  CHECK_THROWS_AS(make_stable(1.5), ModelError);
  CHECK_THROWS_AS((void)m->tail(-1.0), DomainError);
}

TEST_CASE("tail / inverse round trips on every built-in model") {
  std::vector<ModelPtr> models{make_stable(0.3), make_stable(0.5),
                               make_stable(0.9), make_logpower(-0.5),
                               make_logpower(-1.0), make_logpower(-2.0),
                               make_slowtail()};
  for (const ModelPtr& m : models) {
    // 100 log-spaced measure levels spanning moderate to extreme.
    for (int k = 0; k < 100; ++k) {
      double log_y = -2.0 + 10.0 * k / 99.0;  // y in [e^-2, e^8]
      double y = std::exp(log_y);
      double back = m->tail(m->tail_inverse(y));
      CHECK(back == doctest::Approx(y).epsilon(1e-10));
      // Log-scale entry points agree with the linear ones.
      double lx = m->log_tail_inverse_from_log(log_y);
      CHECK(std::exp(lx) == doctest::Approx(m->tail_inverse(y)).epsilon(1e-12));
    }
  }
}

TEST_CASE("logpower tail closed form and support") {
  ModelPtr m = make_logpower(-1.0);
  // tail(x) = (log(1/x))^2 / gamma^2 on (0,1)
  CHECK(m->tail(std::exp(-3.0)) == doctest::Approx(9.0).epsilon(1e-14));
  CHECK(m->tail_inverse(25.0) == doctest::Approx(std::exp(-5.0)).epsilon(1e-14));
  CHECK(m->support_edge() == 1.0);
  CHECK(m->gamma() == -1.0);

  ModelPtr m2 = make_logpower(-2.0);
  // inverse is exp(-|gamma| sqrt(y))
  CHECK(m2->tail_inverse(9.0) == doctest::Approx(std::exp(-6.0)).epsilon(1e-14));
  CHECK_THROWS_AS(make_logpower(0.0), ModelError);
  CHECK_THROWS_AS(make_logpower(0.5), ModelError);
}

TEST_CASE("slowtail closed form") {
  ModelPtr m = make_slowtail();
  CHECK(m->tail(std::exp(-2.0)) == doctest::Approx(16.0).epsilon(1e-14));
  CHECK(m->tail_inverse(16.0) == doctest::Approx(std::exp(-2.0)).epsilon(1e-14));
  CHECK(m->gamma() == 0.0);
  CHECK(m->support_edge() == 1.0);
  CHECK(m->known_c_alpha().value() == 0.0);
}

TEST_CASE("validation accepts the built-ins") {
  for (const ModelPtr& m :
       {make_stable(0.5), make_logpower(-1.0), make_slowtail()}) {
    ValidationReport rep = validate_model(*m);
    CHECK(rep.checks.size() >= 4);
  }
}

namespace {
std::vector<std::pair<double, double>> power_law_grid(double alpha, int n,
                                                      double lo, double hi) {
  std::vector<std::pair<double, double>> pts;
  for (int i = 0; i < n; ++i) {
    double lx = std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1);
    double x = std::exp(lx);
    pts.emplace_back(x, std::pow(x, -alpha));
  }
  return pts;
}
}  // namespace

TEST_CASE("tabulated model interpolates a power law almost exactly") {
  // log-log linear data: the monotone cubic reduces to the exact line.
  ModelPtr tab = make_tabulated(power_law_grid(0.5, 200, 1e-8, 1e3));
  ModelPtr ref = make_stable(0.5);
  for (double x : {2e-8, 1e-6, 3.7e-4, 0.029, 0.5, 1.0, 17.0, 900.0}) {
    CHECK(tab->tail(x) == doctest::Approx(ref->tail(x)).epsilon(1e-12));
    double y = ref->tail(x);
    CHECK(tab->tail_inverse(y) == doctest::Approx(x).epsilon(1e-10));
  }
  ValidationReport rep = validate_model(*tab);
  CHECK(rep.gamma == 0.0);
}

TEST_CASE("tabulated model rejects bad grids") {
  auto good = power_law_grid(0.5, 10, 0.01, 1.0);

  auto few = good;
  few.resize(3);
  CHECK_THROWS_AS(make_tabulated(few), ModelError);

  auto flat = good;
  flat[3].second = flat[2].second;  // repeated tail value
  CHECK_THROWS_AS(make_tabulated(flat), ModelError);

  auto unordered = good;
  std::swap(unordered[2].first, unordered[3].first);
  CHECK_THROWS_AS(make_tabulated(unordered), ModelError);

  CHECK_THROWS_AS(make_tabulated(good, 0.5), ModelError);  // gamma > 0
  CHECK_NOTHROW(make_tabulated(good, -1.0));
}

TEST_CASE("tabulated model refuses to extrapolate") {
  ModelPtr tab = make_tabulated(power_law_grid(0.5, 50, 0.01, 1.0));
  CHECK_NOTHROW((void)tab->tail(0.5));
  CHECK_THROWS_AS((void)tab->tail(0.001), DomainError);
  CHECK_THROWS_AS((void)tab->tail(2.0), DomainError);
  CHECK_THROWS_AS((void)tab->tail_inverse(1e9), DomainError);
}

TEST_CASE("tabulated csv loader") {
  std::string path = "test_tab_grid.csv";
  {
    std::ofstream out(path);
    out << "x,tail\n";
    for (auto [x, tail] : power_law_grid(0.5, 50, 1e-6, 10.0)) {
      char buf[80];
      std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", x, tail);
      out << buf;
    }
  }
  ModelPtr tab = make_tabulated_from_csv(path);
  CHECK(tab->tail(1e-4) == doctest::Approx(100.0).epsilon(1e-10));
  std::remove(path.c_str());

  CHECK_THROWS_AS(make_tabulated_from_csv("no_such_file.csv"), ModelError);
}

TEST_CASE("model factory round-trips JSON specs") {
  for (const nlohmann::json& spec :
       {nlohmann::json{{"model", "stable"}, {"alpha", 0.5}},
        nlohmann::json{{"model", "logpower"}, {"gamma", -1.0}},
        nlohmann::json{{"model", "slowtail"}}}) {
    ModelPtr m = make_model(spec);
    CHECK(m->spec() == spec);
    ModelPtr again = make_model(m->spec());
    CHECK(again->tail(0.5) == m->tail(0.5));
  }
  CHECK_THROWS_AS(make_model(nlohmann::json{{"model", "cauchy"}}), ConfigError);
  CHECK_THROWS_AS(
      make_model(nlohmann::json{{"model", "stable"}, {"alpha", 0.5}, {"x", 1}}),
      ConfigError);
  CHECK_THROWS_AS(make_model(nlohmann::json{{"model", "stable"}}), ConfigError);
}
