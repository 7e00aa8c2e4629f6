#include "tlp/levy_model.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "tlp/errors.hpp"
#include "tlp/numeric.hpp"

namespace tlp {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

// ============================================================================
// Base class wrappers
// ============================================================================

double LevyTailModel::tail(double x) const {
  if (!(x > 0.0) || !std::isfinite(x)) {
    throw DomainError("tail: x must be positive and finite");
  }
  return tail_from_log(std::log(x));
}

double LevyTailModel::tail_inverse(double y) const {
  return std::exp(log_tail_inverse(y));
}

double LevyTailModel::log_tail_inverse(double y) const {
  if (!(y > 0.0) || !std::isfinite(y)) {
    throw DomainError("tail_inverse: y must be positive and finite");
  }
  return log_tail_inverse_from_log(std::log(y));
}

double LevyTailModel::log_support_edge() const {
  return std::log(support_edge());
}

// ============================================================================
// stable(alpha): tail(x) = x^-alpha, inverse y^(-1/alpha), regime 0
// ============================================================================

class StableModel final : public LevyTailModel {
 public:
  explicit StableModel(double alpha) : alpha_(alpha), inv_alpha_(1.0 / alpha) {
    if (!(alpha > 0.0 && alpha < 1.0)) {
      throw ModelError("stable: alpha must lie in (0,1)");
    }
  }

  double tail_from_log(double log_x) const override {
    return std::exp(-alpha_ * log_x);
  }

  double tail(double x) const override {
    if (!(x > 0.0) || !std::isfinite(x)) {
      throw DomainError("tail: x must be positive and finite");
    }
    return std::pow(x, -alpha_);
  }

  double log_tail_inverse_from_log(double log_y) const override {
    return -inv_alpha_ * log_y;
  }

  double tail_inverse(double y) const override {
    if (!(y > 0.0) || !std::isfinite(y)) {
      throw DomainError("tail_inverse: y must be positive and finite");
    }
    // alpha = 1/2 is the workhorse in simulation loops; skip the pow.
    if (inv_alpha_ == 2.0) return 1.0 / (y * y);
    return std::pow(y, -inv_alpha_);
  }

  double gamma() const override { return 0.0; }
  double support_edge() const override { return kInf; }

  std::optional<double> known_c_alpha() const override {
    return alpha_ / (2.0 - alpha_);
  }

  std::optional<double> analytic_log_moment(double p,
                                            double log_t) const override {
    // int_0^t u^p alpha u^(-alpha-1) du = alpha/(p-alpha) t^(p-alpha)
    return std::log(alpha_ / (p - alpha_)) + (p - alpha_) * log_t;
  }

  std::string label() const override {
    std::ostringstream os;
    os << "stable(alpha=" << alpha_ << ")";
    return os.str();
  }

  nlohmann::json spec() const override {
    return {{"model", "stable"}, {"alpha", alpha_}};
  }

 private:
  double alpha_;
  double inv_alpha_;
};

// ============================================================================
// logpower(gamma<0): tail(x) = (log(1/x))^2 / gamma^2 on (0,1),
// inverse exp(-|gamma| sqrt(y))
// ============================================================================

class LogPowerModel final : public LevyTailModel {
 public:
  explicit LogPowerModel(double gamma) : gamma_(gamma), ag_(-gamma) {
    if (!(gamma < 0.0) || !std::isfinite(gamma)) {
      throw ModelError("logpower: gamma must be negative");
    }
  }

  double tail_from_log(double log_x) const override {
    if (log_x >= 0.0) return 0.0;
    return (log_x * log_x) / (gamma_ * gamma_);
  }

  double log_tail_inverse_from_log(double log_y) const override {
    return -ag_ * std::exp(0.5 * log_y);
  }

  double tail_inverse(double y) const override {
    if (!(y > 0.0) || !std::isfinite(y)) {
      throw DomainError("tail_inverse: y must be positive and finite");
    }
    return std::exp(-ag_ * std::sqrt(y));
  }

  double gamma() const override { return gamma_; }
  double support_edge() const override { return 1.0; }

  // The tail is slowly varying at 0, so the second-moment ratio drains to 0.
  std::optional<double> known_c_alpha() const override { return 0.0; }

  std::optional<double> analytic_log_moment(double p,
                                            double log_t) const override {
    // With s = log(1/t)/|gamma| and c = p|gamma|:
    //   int = 2 e^{-cs} (s/c + 1/c^2)
    double s = log_t >= 0.0 ? 0.0 : -log_t / ag_;
    double c = p * ag_;
    return std::log(2.0) - c * s + std::log(s / c + 1.0 / (c * c));
  }

  std::string label() const override {
    std::ostringstream os;
    os << "logpower(gamma=" << gamma_ << ")";
    return os.str();
  }

  nlohmann::json spec() const override {
    return {{"model", "logpower"}, {"gamma", gamma_}};
  }

 private:
  double gamma_;
  double ag_;  // |gamma|
};

// ============================================================================
// slowtail: tail(x) = (log(1/x))^4 on (0,1), inverse exp(-y^(1/4)), regime 0
// ============================================================================

class SlowTailModel final : public LevyTailModel {
 public:
  double tail_from_log(double log_x) const override {
    if (log_x >= 0.0) return 0.0;
    double s = log_x * log_x;
    return s * s;
  }

  double log_tail_inverse_from_log(double log_y) const override {
    return -std::exp(0.25 * log_y);
  }

  double tail_inverse(double y) const override {
    if (!(y > 0.0) || !std::isfinite(y)) {
      throw DomainError("tail_inverse: y must be positive and finite");
    }
    return std::exp(-std::pow(y, 0.25));
  }

  double gamma() const override { return 0.0; }
  double support_edge() const override { return 1.0; }

  std::optional<double> known_c_alpha() const override { return 0.0; }

  std::optional<double> analytic_log_moment(double p,
                                            double log_t) const override {
    // With s = log(1/t) and c = p:
    //   int = 4 e^{-cs} (s^3/c + 3 s^2/c^2 + 6 s/c^3 + 6/c^4)
    double s = log_t >= 0.0 ? 0.0 : -log_t;
    double c = p;
    double poly = ((s / c + 3.0 / (c * c)) * s + 6.0 / (c * c * c)) * s +
                  6.0 / (c * c * c * c);
    return std::log(4.0) - c * s + std::log(poly);
  }

  std::string label() const override { return "slowtail"; }

  nlohmann::json spec() const override { return {{"model", "slowtail"}}; }
};

// ============================================================================
// tabulated: monotone piecewise-cubic interpolation of (log x, log tail)
// ============================================================================

class TabulatedModel final : public LevyTailModel {
 public:
  TabulatedModel(std::vector<std::pair<double, double>> points, double gamma,
                 std::string source_path)
      : gamma_(gamma), path_(std::move(source_path)) {
    if (gamma > 0.0 || !std::isfinite(gamma)) {
      throw ModelError("tabulated: gamma must be <= 0");
    }
    if (points.size() < 4) {
      throw ModelError("tabulated: need at least 4 grid points");
    }
    lx_.reserve(points.size());
    lt_.reserve(points.size());
    for (const auto& [x, t] : points) {
      if (!(x > 0.0) || !(t > 0.0) || !std::isfinite(x) || !std::isfinite(t)) {
        throw ModelError("tabulated: grid values must be positive and finite");
      }
      if (!lx_.empty()) {
        if (!(std::log(x) > lx_.back())) {
          throw ModelError("tabulated: x column must be strictly increasing");
        }
        if (!(std::log(t) < lt_.back())) {
          throw ModelError("tabulated: tail column must be strictly decreasing");
        }
      }
      lx_.push_back(std::log(x));
      lt_.push_back(std::log(t));
    }
    build_slopes();
  }

  double tail_from_log(double log_x) const override {
    if (log_x < lx_.front() || log_x > lx_.back()) {
      throw DomainError("tabulated tail: x outside the grid (no extrapolation)");
    }
    return std::exp(eval(log_x));
  }

  double log_tail_inverse_from_log(double log_y) const override {
    if (log_y > lt_.front() || log_y < lt_.back()) {
      throw DomainError(
          "tabulated tail_inverse: y outside the grid (no extrapolation)");
    }
    // Bracket on grid nodes (lt_ is strictly decreasing in lx_).
    auto it = std::lower_bound(lt_.begin(), lt_.end(), log_y,
                               [](double a, double b) { return a > b; });
    std::size_t hi = static_cast<std::size_t>(it - lt_.begin());
    if (hi == 0) return lx_.front();
    if (hi >= lx_.size()) hi = lx_.size() - 1;
    std::size_t lo = hi - 1;
    if (lt_[hi] == log_y) return lx_[hi];
    // eval() decreases in log_x; bisect eval(lx) - log_y as increasing in -lx.
    double a = lx_[lo], b = lx_[hi];
    double root = bisect_increasing(
        [&](double u) { return log_y - eval(u); }, a, b, 1e-12);
    return root;
  }

  double gamma() const override { return gamma_; }
  double support_edge() const override { return std::exp(lx_.back()); }
  double log_support_edge() const override { return lx_.back(); }
  double log_max_tail_level() const override { return lt_.front(); }

  std::string label() const override {
    std::ostringstream os;
    os << "tabulated(" << (path_.empty() ? "inline" : path_) << ")";
    return os.str();
  }

  nlohmann::json spec() const override {
    nlohmann::json j{{"model", "tabulated"}, {"path", path_}};
    if (gamma_ != 0.0) j["gamma"] = gamma_;
    return j;
  }

  double grid_min_x() const { return std::exp(lx_.front()); }
  double grid_max_tail() const { return std::exp(lt_.front()); }

 private:
  // Fritsch-Butland monotone cubic slopes on (lx, lt).
  void build_slopes() {
    std::size_t n = lx_.size();
    std::vector<double> d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
      d[i] = (lt_[i + 1] - lt_[i]) / (lx_[i + 1] - lx_[i]);
    }
    m_.assign(n, 0.0);
    m_.front() = d.front();
    m_.back() = d.back();
    for (std::size_t i = 1; i + 1 < n; ++i) {
      if (d[i - 1] * d[i] <= 0.0) {
        m_[i] = 0.0;  // cannot happen with strict data, kept for safety
      } else {
        double h0 = lx_[i] - lx_[i - 1];
        double h1 = lx_[i + 1] - lx_[i];
        double w0 = 2.0 * h1 + h0;
        double w1 = h1 + 2.0 * h0;
        m_[i] = (w0 + w1) / (w0 / d[i - 1] + w1 / d[i]);
      }
    }
  }

  double eval(double log_x) const {
    auto it = std::upper_bound(lx_.begin(), lx_.end(), log_x);
    std::size_t hi = static_cast<std::size_t>(it - lx_.begin());
    if (hi == 0) hi = 1;
    if (hi >= lx_.size()) hi = lx_.size() - 1;
    std::size_t lo = hi - 1;
    double h = lx_[hi] - lx_[lo];
    double u = (log_x - lx_[lo]) / h;
    double u2 = u * u;
    double u3 = u2 * u;
    double h00 = 2.0 * u3 - 3.0 * u2 + 1.0;
    double h10 = u3 - 2.0 * u2 + u;
    double h01 = -2.0 * u3 + 3.0 * u2;
    double h11 = u3 - u2;
    return h00 * lt_[lo] + h10 * h * m_[lo] + h01 * lt_[hi] + h11 * h * m_[hi];
  }

  std::vector<double> lx_;
  std::vector<double> lt_;
  std::vector<double> m_;
  double gamma_;
  std::string path_;
};

// ============================================================================
// Factories
// ============================================================================

ModelPtr make_stable(double alpha) {
  return std::make_shared<StableModel>(alpha);
}

ModelPtr make_logpower(double gamma) {
  return std::make_shared<LogPowerModel>(gamma);
}

ModelPtr make_slowtail() { return std::make_shared<SlowTailModel>(); }

ModelPtr make_tabulated(std::vector<std::pair<double, double>> points,
                        double gamma, std::string source_path) {
  return std::make_shared<TabulatedModel>(std::move(points), gamma,
                                          std::move(source_path));
}

ModelPtr make_tabulated_from_csv(const std::string& path, double gamma) {
  std::ifstream in(path);
  if (!in) throw ModelError("tabulated: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw ModelError("tabulated: empty file " + path);
  // Tolerate surrounding whitespace and a trailing CR in the header.
  std::string header = line;
  header.erase(std::remove_if(header.begin(), header.end(),
                              [](char c) { return c == ' ' || c == '\r'; }),
               header.end());
  if (header != "x,tail") {
    throw ModelError("tabulated: expected header 'x,tail' in " + path);
  }
  std::vector<std::pair<double, double>> points;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line == "\r") continue;
    std::istringstream ls(line);
    double x, t;
    char comma;
    if (!(ls >> x >> comma >> t) || comma != ',') {
      throw ModelError("tabulated: bad row at line " + std::to_string(lineno) +
                       " in " + path);
    }
    points.emplace_back(x, t);
  }
  return make_tabulated(std::move(points), gamma, path);
}

ModelPtr make_model(const nlohmann::json& spec) {
  if (!spec.is_object() || !spec.contains("model")) {
    throw ConfigError("model spec must be an object with a 'model' key");
  }
  auto require_keys = [&](std::initializer_list<const char*> allowed) {
    for (auto it = spec.begin(); it != spec.end(); ++it) {
      bool ok = false;
      for (const char* k : allowed) {
        if (it.key() == k) ok = true;
      }
      if (!ok) throw ConfigError("model spec: unknown key '" + it.key() + "'");
    }
  };
  std::string kind = spec.at("model").get<std::string>();
  if (kind == "stable") {
    require_keys({"model", "alpha"});
    if (!spec.contains("alpha")) throw ConfigError("stable: missing 'alpha'");
    return make_stable(spec.at("alpha").get<double>());
  }
  if (kind == "logpower") {
    require_keys({"model", "gamma"});
    if (!spec.contains("gamma")) throw ConfigError("logpower: missing 'gamma'");
    return make_logpower(spec.at("gamma").get<double>());
  }
  if (kind == "slowtail") {
    require_keys({"model"});
    return make_slowtail();
  }
  if (kind == "tabulated") {
    require_keys({"model", "path", "gamma"});
    if (!spec.contains("path")) throw ConfigError("tabulated: missing 'path'");
    double gamma = spec.value("gamma", 0.0);
    return make_tabulated_from_csv(spec.at("path").get<std::string>(), gamma);
  }
  throw ConfigError("unknown model kind '" + kind + "'");
}

}  // namespace tlp
