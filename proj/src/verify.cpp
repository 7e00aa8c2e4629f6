#include "tlp/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "tlp/errors.hpp"
#include "tlp/moments.hpp"
#include "tlp/numeric.hpp"

namespace tlp {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

void require_keys(const nlohmann::json& j,
                  std::initializer_list<const char*> allowed,
                  const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool ok = false;
    for (const char* k : allowed) {
      if (it.key() == k) {
        ok = true;
        break;
      }
    }
    if (!ok) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

double require_positive(double v, const std::string& what) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ConfigError(what + " must be positive and finite");
  }
  return v;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}
}  // namespace

double ks_statistic(const std::vector<double>& sorted,
                    const std::function<double(double)>& cdf) {
  const std::size_t n = sorted.size();
  if (n == 0) throw DomainError("ks_statistic: empty sample");
  const double inv_n = 1.0 / static_cast<double>(n);
  double d = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double x = sorted[i];
    if (std::isnan(x)) throw DomainError("ks_statistic: NaN in sample");
    if (i > 0 && x < sorted[i - 1]) {
      throw DomainError("ks_statistic: input not sorted");
    }
    double f = cdf(x);
    d = std::max(d, static_cast<double>(i + 1) * inv_n - f);
    d = std::max(d, f - static_cast<double>(i) * inv_n);
  }
  return d;
}

ExperimentConfig parse_experiment_config(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw ConfigError("experiment config must be a JSON object");
  }
  require_keys(j,
               {"model", "scheme", "r_grid", "t", "n", "seed", "rel_tol",
                "mode", "source", "exec", "threads", "max_points",
                "keep_samples", "ks", "trend", "moment_checks"},
               "config");
  ExperimentConfig c;

  for (const char* k : {"model", "scheme", "r_grid", "n", "seed", "ks"}) {
    if (!j.contains(k)) {
      throw ConfigError(std::string("config: missing '") + k + "'");
    }
  }
  c.model_spec = j.at("model");
  c.scheme = scheme_from_string(j.at("scheme").get<std::string>());

  const auto& rg = j.at("r_grid");
  if (!rg.is_array() || rg.empty()) {
    throw ConfigError("config: r_grid must be a non-empty array");
  }
  std::size_t prev = 0;
  for (const auto& el : rg) {
    if (!el.is_number_integer() && !el.is_number_unsigned()) {
      throw ConfigError("config: r_grid entries must be integers");
    }
    long long v = el.get<long long>();
    if (v < 1) throw ConfigError("config: r_grid entries must be >= 1");
    auto r = static_cast<std::size_t>(v);
    if (r <= prev) throw ConfigError("config: r_grid must be strictly increasing");
    c.r_grid.push_back(r);
    prev = r;
  }

  c.t = j.value("t", 1.0);
  require_positive(c.t, "config: t");
  if (c.t != 1.0 && c.scheme != Scheme::DELTA_ONLY) {
    throw ConfigError("config: t != 1 is only supported with DELTA_ONLY");
  }

  long long n = j.at("n").get<long long>();
  if (n < 100) throw ConfigError("config: n must be >= 100");
  c.n = static_cast<std::size_t>(n);
  c.seed = j.at("seed").get<std::uint64_t>();

  c.rel_tol = j.value("rel_tol", 1e-4);
  require_positive(c.rel_tol, "config: rel_tol");
  c.mode = residual_mode_from_string(j.value("mode", std::string("gaussian")));

  std::string source = j.value("source", std::string("simulator"));
  if (source == "limit_law") {
    c.limit_law_source = true;
  } else if (source != "simulator") {
    throw ConfigError("config: source must be 'simulator' or 'limit_law'");
  }

  std::string exec = j.value("exec", std::string("openmp"));
  if (exec == "serial") {
    c.exec = Exec::serial;
  } else if (exec == "openmp") {
    c.exec = Exec::openmp;
  } else {
    throw ConfigError("config: exec must be 'serial' or 'openmp'");
  }

  c.threads = j.value("threads", 0);
  if (c.threads < 0) throw ConfigError("config: threads must be >= 0");
  long long mp = j.value("max_points", static_cast<long long>(10'000'000));
  if (mp < 1) throw ConfigError("config: max_points must be >= 1");
  c.max_points = static_cast<std::size_t>(mp);
  c.keep_samples = j.value("keep_samples", false);

  const auto& ks = j.at("ks");
  if (!ks.is_object()) throw ConfigError("config: ks must be an object");
  require_keys(ks, {"null_coeff", "slack", "columns"}, "config.ks");
  c.ks.null_coeff = ks.value("null_coeff", 1.36);
  require_positive(c.ks.null_coeff, "config.ks: null_coeff");
  if (!ks.contains("slack")) {
    c.ks.slack.assign(c.r_grid.size(), 0.0);
  } else if (ks.at("slack").is_number()) {
    c.ks.slack.assign(c.r_grid.size(), ks.at("slack").get<double>());
  } else if (ks.at("slack").is_array()) {
    for (const auto& s : ks.at("slack")) c.ks.slack.push_back(s.get<double>());
    if (c.ks.slack.size() != c.r_grid.size()) {
      throw ConfigError("config.ks: slack array must match r_grid length");
    }
  } else {
    throw ConfigError("config.ks: slack must be a number or an array");
  }
  for (double s : c.ks.slack) {
    if (!(s >= 0.0) || !std::isfinite(s)) {
      throw ConfigError("config.ks: slack entries must be >= 0");
    }
  }
  if (!ks.contains("columns") || !ks.at("columns").is_array() ||
      ks.at("columns").empty()) {
    throw ConfigError("config.ks: columns must be a non-empty array");
  }
  for (const auto& col : ks.at("columns")) {
    int v = col.get<int>();
    if (v != 1 && v != 2) throw ConfigError("config.ks: columns must be 1 or 2");
    if (std::find(c.ks.columns.begin(), c.ks.columns.end(), v) !=
        c.ks.columns.end()) {
      throw ConfigError("config.ks: duplicate column");
    }
    c.ks.columns.push_back(v);
  }
  if (c.scheme == Scheme::DELTA_ONLY &&
      std::find(c.ks.columns.begin(), c.ks.columns.end(), 1) !=
          c.ks.columns.end()) {
    throw ConfigError("config.ks: DELTA_ONLY has no first component to test");
  }

  if (j.contains("trend")) {
    const auto& tr = j.at("trend");
    require_keys(tr, {"column", "kind"}, "config.trend");
    TrendConfig t;
    t.column = tr.value("column", 2);
    if (t.column != 1 && t.column != 2) {
      throw ConfigError("config.trend: column must be 1 or 2");
    }
    if (std::find(c.ks.columns.begin(), c.ks.columns.end(), t.column) ==
        c.ks.columns.end()) {
      throw ConfigError("config.trend: trend column must be KS-tested");
    }
    std::string kind = tr.value("kind", std::string("non_increasing"));
    if (kind == "strict_decreasing") {
      t.strict = true;
    } else if (kind != "non_increasing") {
      throw ConfigError(
          "config.trend: kind must be 'strict_decreasing' or 'non_increasing'");
    }
    if (c.r_grid.size() < 2) {
      throw ConfigError("config.trend: needs at least two r_grid cells");
    }
    c.trend = t;
  }

  if (j.contains("moment_checks")) {
    const auto& mc = j.at("moment_checks");
    require_keys(mc, {"mean1", "var1", "mean2", "var2", "corr"},
                 "config.moment_checks");
    auto parse_range = [&](const char* key) -> std::optional<std::array<double, 2>> {
      if (!mc.contains(key)) return std::nullopt;
      const auto& r = mc.at(key);
      if (!r.is_array() || r.size() != 2) {
        throw ConfigError(std::string("config.moment_checks: ") + key +
                          " must be [lo, hi]");
      }
      std::array<double, 2> out{r[0].get<double>(), r[1].get<double>()};
      if (!(out[0] <= out[1])) {
        throw ConfigError(std::string("config.moment_checks: ") + key +
                          " range is inverted");
      }
      return out;
    };
    c.moment_checks.mean1 = parse_range("mean1");
    c.moment_checks.var1 = parse_range("var1");
    c.moment_checks.mean2 = parse_range("mean2");
    c.moment_checks.var2 = parse_range("var2");
    c.moment_checks.corr = parse_range("corr");
    if (c.scheme == Scheme::DELTA_ONLY &&
        (c.moment_checks.mean1 || c.moment_checks.var1 ||
         c.moment_checks.corr)) {
      throw ConfigError(
          "config.moment_checks: DELTA_ONLY has no first component");
    }
  }
  return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  return parse_experiment_config(j);
}

nlohmann::json ExperimentConfig::resolved() const {
  nlohmann::json j{
      {"model", model_spec},
      {"scheme", scheme_to_string(scheme)},
      {"r_grid", r_grid},
      {"t", t},
      {"n", n},
      {"seed", seed},
      {"rel_tol", rel_tol},
      {"mode", residual_mode_to_string(mode)},
      {"source", limit_law_source ? "limit_law" : "simulator"},
      {"exec", exec == Exec::openmp ? "openmp" : "serial"},
      {"threads", threads},
      {"max_points", max_points},
      {"keep_samples", keep_samples},
      {"ks",
       {{"null_coeff", ks.null_coeff},
        {"slack", ks.slack},
        {"columns", ks.columns}}},
  };
  if (trend) {
    j["trend"] = {
        {"column", trend->column},
        {"kind", trend->strict ? "strict_decreasing" : "non_increasing"}};
  }
  if (moment_checks.any()) {
    nlohmann::json mc = nlohmann::json::object();
    auto put = [&](const char* key,
                   const std::optional<std::array<double, 2>>& r) {
      if (r) mc[key] = {(*r)[0], (*r)[1]};
    };
    put("mean1", moment_checks.mean1);
    put("var1", moment_checks.var1);
    put("mean2", moment_checks.mean2);
    put("var2", moment_checks.var2);
    put("corr", moment_checks.corr);
    j["moment_checks"] = mc;
  }
  return j;
}

LimitLaw limit_law_for(const ExperimentConfig& config,
                       const LevyTailModel& model) {
  double gamma = model.gamma();
  std::optional<double> c;
  if (config.scheme == Scheme::RV_DET_CENTER) {
    if (auto k = model.known_c_alpha()) {
      if (!(*k > 0.0)) {
        throw ConfigError(
            "RV_DET_CENTER: the model's tail is slowly varying (c_alpha = 0)");
      }
      c = *k;
    } else {
      CAlphaEstimate est = c_alpha_limit(model);
      if (!est.converged || !(est.estimate > 0.0)) {
        throw ConfigError(
            "RV_DET_CENTER: no positive c_alpha limit detected for this model");
      }
      c = std::min(est.estimate, 1.0);
    }
  } else if (config.scheme == Scheme::SLOW_DET_CENTER) {
    double chat;
    if (auto k = model.known_c_alpha()) {
      chat = *k;
    } else {
      chat = c_alpha_limit(model).estimate;
    }
    if (!(std::fabs(chat) <= 1e-3)) {
      throw ConfigError(
          "SLOW_DET_CENTER requires a slowly varying tail (c_alpha = 0)");
    }
    c = 0.0;
  }
  return make_limit_law(config.scheme, gamma, c, config.t);
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  auto t0 = std::chrono::steady_clock::now();
  auto elapsed = [&] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
  };

  ModelPtr model = make_model(config.model_spec);
  LimitLaw law = limit_law_for(config, *model);

  ExperimentReport rep;
  rep.config = config;
  const std::size_t n_cells = config.r_grid.size();
  const std::size_t n = config.n;

  std::vector<std::vector<NormalizedRow>> rows;
  try {
    if (config.limit_law_source) {
      rows.assign(n_cells, std::vector<NormalizedRow>(n));
      for (std::size_t k = 0; k < n_cells; ++k) {
        for (std::size_t i = 0; i < n; ++i) {
          RngStream stream(config.seed, k * n + i);
          auto pair = law.sample(stream);
          NormalizedRow& row = rows[k][i];
          row.replicate = i;
          row.col1 = pair[0];
          row.col2 = pair[1];
          row.delta = kNaN;
          row.trimmed_x = kNaN;
        }
      }
    } else {
      SimOptions so;
      so.sweep.rel_tol = config.rel_tol;
      so.sweep.mode = config.mode;
      so.sweep.max_points = config.max_points;
      so.exec = config.exec;
      so.threads = config.threads;
      rows = sample_normalized_sweep(*model, config.scheme, config.r_grid,
                                     config.t, n, config.seed, so);
    }
  } catch (const BudgetError& e) {
    rep.error = e.what();
    rep.verdict = false;
    rep.runtime_seconds = elapsed();
    return rep;
  }

  const bool col1_defined = config.scheme != Scheme::DELTA_ONLY;

  for (std::size_t k = 0; k < n_cells; ++k) {
    CellReport cell;
    cell.r = config.r_grid[k];
    cell.ks_col1 = cell.ks_col2 = kNaN;
    cell.threshold_col1 = cell.threshold_col2 = kNaN;
    cell.mean1 = cell.var1 = cell.corr = kNaN;

    std::vector<double> c1, c2;
    c2.reserve(n);
    for (const NormalizedRow& row : rows[k]) c2.push_back(row.col2);
    if (col1_defined) {
      c1.reserve(n);
      for (const NormalizedRow& row : rows[k]) c1.push_back(row.col1);
      cell.mean1 = sample_mean(c1);
      cell.var1 = sample_variance(c1);
      cell.corr = sample_correlation(c1, c2);
    }
    cell.mean2 = sample_mean(c2);
    cell.var2 = sample_variance(c2);

    double thr =
        config.ks.null_coeff / std::sqrt(static_cast<double>(n)) +
        config.ks.slack[k];
    for (int col : config.ks.columns) {
      std::vector<double> sorted = col == 1 ? c1 : c2;
      std::sort(sorted.begin(), sorted.end());
      double d = ks_statistic(
          sorted, [&](double x) { return law.marginal_cdf(col, x); });
      bool pass = d <= thr;
      if (col == 1) {
        cell.ks_col1 = d;
        cell.threshold_col1 = thr;
        cell.ks_col1_pass = pass;
      } else {
        cell.ks_col2 = d;
        cell.threshold_col2 = thr;
        cell.ks_col2_pass = pass;
      }
      if (!pass) {
        cell.failures.push_back("ks_col" + std::to_string(col) + "=" + fmt(d) +
                                " exceeds threshold " + fmt(thr));
      }
    }

    auto check = [&](const char* name,
                     const std::optional<std::array<double, 2>>& range,
                     double value) {
      if (!range) return;
      if (!(value >= (*range)[0] && value <= (*range)[1])) {
        cell.moments_pass = false;
        cell.failures.push_back(std::string(name) + "=" + fmt(value) +
                                " outside [" + fmt((*range)[0]) + ", " +
                                fmt((*range)[1]) + "]");
      }
    };
    check("mean1", config.moment_checks.mean1, cell.mean1);
    check("var1", config.moment_checks.var1, cell.var1);
    check("mean2", config.moment_checks.mean2, cell.mean2);
    check("var2", config.moment_checks.var2, cell.var2);
    check("corr", config.moment_checks.corr, cell.corr);

    rep.cells.push_back(std::move(cell));
  }

  if (config.trend) {
    rep.trend_checked = true;
    for (const CellReport& cell : rep.cells) {
      rep.trend_values.push_back(config.trend->column == 1 ? cell.ks_col1
                                                           : cell.ks_col2);
    }
    for (std::size_t k = 1; k < rep.trend_values.size(); ++k) {
      bool ok = config.trend->strict
                    ? rep.trend_values[k] < rep.trend_values[k - 1]
                    : rep.trend_values[k] <= rep.trend_values[k - 1];
      if (!ok) rep.trend_pass = false;
    }
  }

  const CellReport& last = rep.cells.back();
  rep.verdict = last.ks_col1_pass && last.ks_col2_pass && last.moments_pass &&
                (!rep.trend_checked || rep.trend_pass);
  if (config.keep_samples) rep.samples = std::move(rows);
  rep.runtime_seconds = elapsed();
  return rep;
}

namespace {

nlohmann::json report_to_json(const ExperimentReport& rep) {
  nlohmann::json cells = nlohmann::json::array();
  for (const CellReport& cell : rep.cells) {
    nlohmann::json jc{{"r", cell.r}};
    nlohmann::json ks = nlohmann::json::object();
    if (!std::isnan(cell.ks_col1)) {
      ks["1"] = {{"stat", cell.ks_col1},
                 {"threshold", cell.threshold_col1},
                 {"pass", cell.ks_col1_pass}};
    }
    if (!std::isnan(cell.ks_col2)) {
      ks["2"] = {{"stat", cell.ks_col2},
                 {"threshold", cell.threshold_col2},
                 {"pass", cell.ks_col2_pass}};
    }
    jc["ks"] = ks;
    nlohmann::json mom = nlohmann::json::object();
    if (!std::isnan(cell.mean1)) {
      mom["mean1"] = cell.mean1;
      mom["var1"] = cell.var1;
      mom["corr"] = cell.corr;
    }
    mom["mean2"] = cell.mean2;
    mom["var2"] = cell.var2;
    jc["moments"] = mom;
    jc["moments_pass"] = cell.moments_pass;
    jc["failures"] = cell.failures;
    cells.push_back(jc);
  }
  nlohmann::json j{{"schema_version", 1},
                   {"config", rep.config.resolved()},
                   {"cells", cells},
                   {"verdict", rep.verdict},
                   {"runtime_seconds", rep.runtime_seconds}};
  if (rep.trend_checked) {
    j["trend"] = {{"column", rep.config.trend->column},
                  {"kind", rep.config.trend->strict ? "strict_decreasing"
                                                    : "non_increasing"},
                  {"values", rep.trend_values},
                  {"pass", rep.trend_pass}};
  }
  if (!rep.error.empty()) j["error"] = rep.error;
  return j;
}

std::string report_to_csv(const ExperimentReport& rep) {
  std::ostringstream os;
  os << "r,ks_col1,threshold_col1,ks_col1_pass,ks_col2,threshold_col2,"
        "ks_col2_pass,corr,mean1,var1,mean2,var2,moments_pass,verdict\n";
  char buf[400];
  for (const CellReport& cell : rep.cells) {
    std::snprintf(buf, sizeof(buf),
                  "%zu,%.17g,%.17g,%d,%.17g,%.17g,%d,%.17g,%.17g,%.17g,%.17g,"
                  "%.17g,%d,%d\n",
                  cell.r, cell.ks_col1, cell.threshold_col1,
                  cell.ks_col1_pass ? 1 : 0, cell.ks_col2,
                  cell.threshold_col2, cell.ks_col2_pass ? 1 : 0, cell.corr,
                  cell.mean1, cell.var1, cell.mean2, cell.var2,
                  cell.moments_pass ? 1 : 0, rep.verdict ? 1 : 0);
    os << buf;
  }
  return os.str();
}

std::string report_to_plotdata(const ExperimentReport& rep) {
  if (rep.samples.empty()) {
    throw ConfigError("plotdata output requires keep_samples=true");
  }
  ModelPtr model = make_model(rep.config.model_spec);
  LimitLaw law = limit_law_for(rep.config, *model);
  std::ostringstream os;
  os << "r,component,x,ecdf,cdf\n";
  char buf[160];
  const double n = static_cast<double>(rep.config.n);
  for (std::size_t k = 0; k < rep.samples.size(); ++k) {
    for (int col : rep.config.ks.columns) {
      std::vector<double> sorted;
      sorted.reserve(rep.samples[k].size());
      for (const NormalizedRow& row : rep.samples[k]) {
        sorted.push_back(col == 1 ? row.col1 : row.col2);
      }
      std::sort(sorted.begin(), sorted.end());
      for (std::size_t i = 0; i < sorted.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%zu,%d,%.17g,%.17g,%.17g\n",
                      rep.config.r_grid[k], col, sorted[i],
                      (static_cast<double>(i) + 0.5) / n,
                      law.marginal_cdf(col, sorted[i]));
        os << buf;
      }
    }
  }
  return os.str();
}

}  // namespace

std::string emit_report(const ExperimentReport& report,
                        const std::string& format) {
  if (format == "json") return report_to_json(report).dump(2) + "\n";
  if (format == "csv") return report_to_csv(report);
  if (format == "plotdata") return report_to_plotdata(report);
  throw ConfigError("emit_report: format must be json, csv or plotdata");
}

void write_text_atomic(const std::string& path, const std::string& content) {
  std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open " + tmp + " for writing");
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp);
  }
  if (std::rename(tmp.c_str(), path.c_str()) != 0) {
    throw std::runtime_error("cannot rename " + tmp + " to " + path);
  }
}

CalibrationResult null_calibration(const ExperimentConfig& config,
                                   int n_seeds) {
  if (n_seeds < 1) throw DomainError("null_calibration: n_seeds must be >= 1");
  CalibrationResult res;
  res.n_seeds = n_seeds;
  ExperimentConfig c = config;
  c.limit_law_source = true;
  c.keep_samples = false;
  for (int i = 0; i < n_seeds; ++i) {
    c.seed = config.seed + static_cast<std::uint64_t>(i);
    ExperimentReport rep = run_experiment(c);
    bool all = rep.error.empty();
    for (const CellReport& cell : rep.cells) {
      all = all && cell.ks_col1_pass && cell.ks_col2_pass;
    }
    if (all) {
      ++res.n_pass;
    } else {
      res.failing_seeds.push_back(c.seed);
    }
  }
  return res;
}

}  // namespace tlp
