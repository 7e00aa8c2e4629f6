// Command line front end: model inspection, norming/moment queries, path
// simulation, limit-law evaluation, experiment verification, repro presets.
//
// Exit codes: 0 success / verified, 1 runtime failure (budget, IO),
// 2 usage/config/model/domain error, 3 verification verdict false.
#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "tlp/errors.hpp"
#include "tlp/levy_model.hpp"
#include "tlp/limit_laws.hpp"
#include "tlp/moments.hpp"
#include "tlp/norming.hpp"
#include "tlp/rng.hpp"
#include "tlp/simulate.hpp"
#include "tlp/verify.hpp"

namespace {

using nlohmann::json;

int env_threads() {
  const char* s = std::getenv("TLP_THREADS");
  if (!s || !*s) return 0;
  int v = std::atoi(s);
  return v > 0 ? v : 0;
}

// Shared --model/--alpha/--gamma/--path flag group -> JSON model spec.
struct ModelFlags {
  std::string model;
  double alpha = 0.0;
  double gamma = 0.0;
  double tab_gamma = 0.0;
  std::string path;
  CLI::Option* alpha_opt = nullptr;
  CLI::Option* gamma_opt = nullptr;
  CLI::Option* path_opt = nullptr;

  void attach(CLI::App* sub) {
    sub->add_option("--model", model,
                    "model family: stable, logpower, slowtail, tabulated")
        ->required();
    alpha_opt = sub->add_option("--alpha", alpha, "stable index in (0,1)");
    gamma_opt =
        sub->add_option("--gamma", gamma, "regime parameter (<= 0)");
    path_opt = sub->add_option("--path", path, "tabulated tail CSV (x,tail)");
  }

  json spec() const {
    json j{{"model", model}};
    if (alpha_opt->count() > 0) j["alpha"] = alpha;
    if (gamma_opt->count() > 0) j["gamma"] = gamma;
    if (path_opt->count() > 0) j["path"] = path;
    return j;
  }
};

void echo_config(const json& j) { std::cerr << j.dump() << "\n"; }

void emit_text(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
  } else {
    tlp::write_text_atomic(out_path, content);
  }
}

std::string rows_to_csv(const std::vector<tlp::NormalizedRow>& rows) {
  std::ostringstream os;
  os << "replicate,col1,col2,delta_r,trimmed_x,truncation_index,tail_sd\n";
  char buf[260];
  for (const tlp::NormalizedRow& row : rows) {
    std::snprintf(buf, sizeof(buf), "%zu,%.17g,%.17g,%.17g,%.17g,%zu,%.17g\n",
                  row.replicate, row.col1, row.col2, row.delta, row.trimmed_x,
                  row.truncation_index, row.tail_sd);
    os << buf;
  }
  return os.str();
}

// Reads a samples CSV (the simulate output layout, or any file with col1/col2
// columns) and returns the two columns; missing values come back as NaN.
std::pair<std::vector<double>, std::vector<double>> read_samples_csv(
    const std::string& path) {
  std::ifstream in(path);
  if (!in) throw tlp::ConfigError("cannot open samples file " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw tlp::ConfigError("samples file " + path + " is empty");
  }
  int idx1 = -1, idx2 = -1, idx = 0;
  std::stringstream header(line);
  std::string tok;
  while (std::getline(header, tok, ',')) {
    if (tok == "col1") idx1 = idx;
    if (tok == "col2") idx2 = idx;
    ++idx;
  }
  if (idx1 < 0 || idx2 < 0) {
    throw tlp::ConfigError("samples file " + path +
                           " needs col1 and col2 columns");
  }
  std::vector<double> c1, c2;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::stringstream row(line);
    int i = 0;
    double v1 = std::nan(""), v2 = std::nan("");
    while (std::getline(row, tok, ',')) {
      if (i == idx1) v1 = std::strtod(tok.c_str(), nullptr);
      if (i == idx2) v2 = std::strtod(tok.c_str(), nullptr);
      ++i;
    }
    c1.push_back(v1);
    c2.push_back(v2);
  }
  if (c1.empty()) {
    throw tlp::ConfigError("samples file " + path + " has no data rows");
  }
  return {std::move(c1), std::move(c2)};
}

// Empirical CDF overlay and QQ columns for one component of a sample file.
std::string plot_from_samples(const tlp::LimitLaw& law,
                              const std::vector<double>& col1,
                              const std::vector<double>& col2) {
  std::ostringstream os;
  os << "component,x,ecdf,cdf,qq_theoretical\n";
  char buf[200];
  for (int component = 1; component <= 2; ++component) {
    std::vector<double> sorted;
    for (double v : component == 1 ? col1 : col2) {
      if (!std::isnan(v)) sorted.push_back(v);
    }
    if (sorted.empty()) continue;
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      double p = (static_cast<double>(i) + 0.5) / n;
      std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g,%.17g\n",
                    component, sorted[i], p, law.marginal_cdf(component, sorted[i]),
                    law.marginal_quantile(component, p));
      os << buf;
    }
  }
  return os.str();
}

// Runs a parsed experiment config and writes the requested artifacts.
// Returns the process exit code.
int run_verify(tlp::ExperimentConfig config, const std::string& out_path,
               const std::string& csv_path, const std::string& plot_path,
               std::optional<int> calibrate) {
  if (!plot_path.empty()) config.keep_samples = true;
  echo_config(config.resolved());

  if (calibrate) {
    tlp::CalibrationResult cal = tlp::null_calibration(config, *calibrate);
    json j{{"n_pass", cal.n_pass},
           {"n_seeds", cal.n_seeds},
           {"failing_seeds", cal.failing_seeds}};
    emit_text(out_path, j.dump(2) + "\n");
    return 0;
  }

  tlp::ExperimentReport rep = tlp::run_experiment(config);
  emit_text(out_path, tlp::emit_report(rep, "json"));
  if (!csv_path.empty()) {
    tlp::write_text_atomic(csv_path, tlp::emit_report(rep, "csv"));
  }
  if (!plot_path.empty()) {
    tlp::write_text_atomic(plot_path, tlp::emit_report(rep, "plotdata"));
  }
  if (!rep.error.empty()) {
    std::cerr << "error: " << rep.error << "\n";
    return 1;
  }
  return rep.verdict ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Trimmed subordinator laboratory: simulate trimmed small-jump sums, "
      "evaluate their limiting laws and verify the match."};
  app.require_subcommand(1);
  int rc = 0;

  // ---- model ----
  auto* sub_model = app.add_subcommand("model", "build and validate a model");
  auto model_flags = std::make_shared<ModelFlags>();
  model_flags->attach(sub_model);
  auto model_json = std::make_shared<bool>(false);
  sub_model->add_flag("--json", *model_json, "machine-readable report");
  sub_model->callback([model_flags, model_json, &rc] {
    json spec = model_flags->spec();
    echo_config(json{{"cmd", "model"}, {"model", spec}});
    tlp::ModelPtr model = tlp::make_model(spec);
    tlp::ValidationReport rep = tlp::validate_model(*model);
    if (*model_json) {
      json checks = json::array();
      for (const auto& [name, note] : rep.checks) {
        checks.push_back({{"name", name}, {"note", note}});
      }
      json j{{"label", rep.label},
             {"gamma", rep.gamma},
             {"support_edge", rep.support_edge},
             {"checks", checks}};
      std::cout << j.dump(2) << "\n";
    } else {
      std::cout << "label: " << rep.label << "\n";
      std::cout << "gamma: " << rep.gamma << "\n";
      std::cout << "support_edge: " << rep.support_edge << "\n";
      for (const auto& [name, note] : rep.checks) {
        std::cout << "  [ok] " << name << ": " << note << "\n";
      }
    }
    rc = 0;
  });

  // ---- norming ----
  auto* sub_norm =
      app.add_subcommand("norming", "centering and scale at trimming depth r");
  auto norm_flags = std::make_shared<ModelFlags>();
  norm_flags->attach(sub_norm);
  auto norm_r = std::make_shared<double>(0.0);
  sub_norm->add_option("--r", *norm_r, "trimming depth (> 1)")->required();
  auto norm_json = std::make_shared<bool>(false);
  sub_norm->add_flag("--json", *norm_json, "machine-readable output");
  sub_norm->callback([norm_flags, norm_r, norm_json, &rc] {
    json spec = norm_flags->spec();
    echo_config(json{{"cmd", "norming"}, {"model", spec}, {"r", *norm_r}});
    tlp::ModelPtr model = tlp::make_model(spec);
    tlp::NormingSequences ns = tlp::norming_sequences(*model, *norm_r);
    if (*norm_json) {
      json j{{"r", ns.r},       {"a", ns.a},         {"b", ns.b},
             {"log_a", ns.log_a}, {"log_b", ns.log_b}, {"gamma", ns.gamma}};
      std::cout << j.dump(2) << "\n";
    } else {
      std::printf("a=%.6g b=%.6g log_b=%.6g gamma=%.6g\n", ns.a, ns.b,
                  ns.log_b, ns.gamma);
    }
    rc = 0;
  });

  // ---- moments ----
  auto* sub_mom =
      app.add_subcommand("moments", "truncated moment int_0^t u^p Pi(du)");
  auto mom_flags = std::make_shared<ModelFlags>();
  mom_flags->attach(sub_mom);
  auto mom_p = std::make_shared<double>(1.0);
  auto mom_t = std::make_shared<double>(1.0);
  auto mom_force = std::make_shared<bool>(false);
  sub_mom->add_option("--p", *mom_p, "moment order (>= 1)");
  sub_mom->add_option("--t", *mom_t, "truncation level (> 0)");
  sub_mom->add_flag("--force-quadrature", *mom_force,
                    "integrate even when a closed form exists");
  sub_mom->callback([mom_flags, mom_p, mom_t, mom_force, &rc] {
    json spec = mom_flags->spec();
    echo_config(json{{"cmd", "moments"},
                     {"model", spec},
                     {"p", *mom_p},
                     {"t", *mom_t},
                     {"force_quadrature", *mom_force}});
    tlp::ModelPtr model = tlp::make_model(spec);
    tlp::TruncatedMoment m = tlp::truncated_moment(
        *model, *mom_p, *mom_t,
        *mom_force ? tlp::MomentRoute::force_quadrature
                   : tlp::MomentRoute::prefer_analytic);
    json j{{"value", m.value}, {"method", m.method}, {"est_error", m.est_error}};
    std::cout << j.dump(2) << "\n";
    rc = 0;
  });

  // ---- simulate ----
  auto* sub_sim = app.add_subcommand(
      "simulate", "normalized trimmed-sum replicates at one trimming depth");
  auto sim_flags = std::make_shared<ModelFlags>();
  sim_flags->attach(sub_sim);
  struct SimArgs {
    std::string scheme;
    std::size_t r = 0;
    double t = 1.0;
    std::size_t n = 0;
    std::uint64_t seed = 1;
    double rel_tol = 1e-4;
    std::string mode = "gaussian";
    std::string exec = "openmp";
    int threads = -1;
    std::size_t max_points = 10'000'000;
    std::string out;
  };
  auto sim = std::make_shared<SimArgs>();
  sub_sim->add_option("--scheme", sim->scheme, "output normalization")
      ->required();
  sub_sim->add_option("--r", sim->r, "trimming depth (>= 1)")->required();
  sub_sim->add_option("--t", sim->t, "time horizon");
  sub_sim->add_option("--n", sim->n, "number of replicates")->required();
  sub_sim->add_option("--seed", sim->seed, "master seed");
  sub_sim->add_option("--rel-tol", sim->rel_tol, "residual sd target");
  sub_sim->add_option("--mode", sim->mode, "residual mode: compensated, gaussian");
  sub_sim->add_option("--exec", sim->exec, "execution: serial, openmp");
  sub_sim->add_option("--threads", sim->threads,
                      "worker threads (default TLP_THREADS or library)");
  sub_sim->add_option("--max-points", sim->max_points,
                      "per-replicate jump budget");
  sub_sim->add_option("--out", sim->out, "output CSV path (default stdout)");
  sub_sim->callback([sim_flags, sim, &rc] {
    json spec = sim_flags->spec();
    tlp::SimOptions opts;
    opts.sweep.rel_tol = sim->rel_tol;
    opts.sweep.mode = tlp::residual_mode_from_string(sim->mode);
    opts.sweep.max_points = sim->max_points;
    if (sim->exec == "serial") {
      opts.exec = tlp::Exec::serial;
    } else if (sim->exec == "openmp") {
      opts.exec = tlp::Exec::openmp;
    } else {
      throw tlp::ConfigError("--exec must be 'serial' or 'openmp'");
    }
    opts.threads = sim->threads >= 0 ? sim->threads : env_threads();
    echo_config(json{{"cmd", "simulate"},
                     {"model", spec},
                     {"scheme", sim->scheme},
                     {"r", sim->r},
                     {"t", sim->t},
                     {"n", sim->n},
                     {"seed", sim->seed},
                     {"rel_tol", opts.sweep.rel_tol},
                     {"mode", tlp::residual_mode_to_string(opts.sweep.mode)},
                     {"exec", sim->exec},
                     {"threads", opts.threads},
                     {"max_points", opts.sweep.max_points},
                     {"out", sim->out}});
    tlp::ModelPtr model = tlp::make_model(spec);
    std::vector<tlp::NormalizedRow> rows = tlp::sample_normalized(
        *model, tlp::scheme_from_string(sim->scheme), sim->r, sim->t, sim->n,
        sim->seed, opts);
    emit_text(sim->out, rows_to_csv(rows));
    rc = 0;
  });

  // ---- limit ----
  auto* sub_lim =
      app.add_subcommand("limit", "evaluate or sample a limiting pair law");
  struct LimArgs {
    std::string scheme;
    double gamma = 0.0;
    double c_alpha = 0.0;
    double t = 1.0;
    double cdf_x = 0.0;
    std::size_t n = 0;
    std::uint64_t seed = 1;
    int component = 2;
    std::string plot_from;
    std::string out;
  };
  auto lim = std::make_shared<LimArgs>();
  sub_lim->add_option("--scheme", lim->scheme, "scheme name")->required();
  sub_lim->add_option("--gamma", lim->gamma, "regime parameter (<= 0)");
  auto* lim_ca = sub_lim->add_option("--c-alpha", lim->c_alpha,
                                     "second-moment ratio limit");
  sub_lim->add_option("--t", lim->t, "time horizon (DELTA_ONLY only)");
  auto* lim_cdf =
      sub_lim->add_option("--cdf", lim->cdf_x, "print the marginal CDF at x");
  auto* lim_n =
      sub_lim->add_option("--sample", lim->n, "print n draws of the pair");
  auto* lim_plot = sub_lim->add_option(
      "--plot-from", lim->plot_from,
      "samples CSV; write empirical-vs-limit overlay and QQ data");
  sub_lim->add_option("--component", lim->component, "marginal for --cdf: 1 or 2");
  sub_lim->add_option("--seed", lim->seed, "master seed for --sample");
  sub_lim->add_option("--out", lim->out, "output path (default stdout)");
  sub_lim->callback([lim, lim_ca, lim_cdf, lim_n, lim_plot, &rc] {
    int modes = (lim_cdf->count() > 0) + (lim_n->count() > 0) +
                (lim_plot->count() > 0);
    if (modes != 1) {
      throw tlp::ConfigError(
          "limit needs exactly one of --cdf, --sample, --plot-from");
    }
    std::optional<double> c_alpha;
    if (lim_ca->count() > 0) c_alpha = lim->c_alpha;
    echo_config(json{{"cmd", "limit"},
                     {"scheme", lim->scheme},
                     {"gamma", lim->gamma},
                     {"c_alpha", c_alpha ? json(*c_alpha) : json()},
                     {"t", lim->t},
                     {"component", lim->component},
                     {"seed", lim->seed},
                     {"out", lim->out}});
    tlp::LimitLaw law = tlp::make_limit_law(
        tlp::scheme_from_string(lim->scheme), lim->gamma, c_alpha, lim->t);
    if (lim->component != 1 && lim->component != 2) {
      throw tlp::ConfigError("--component must be 1 or 2");
    }
    if (lim_cdf->count() > 0) {
      std::printf("%.6f\n", law.marginal_cdf(lim->component, lim->cdf_x));
    } else if (lim_n->count() > 0) {
      tlp::RngStream stream(lim->seed, 0);
      std::ostringstream os;
      os << "col1,col2\n";
      char buf[100];
      for (const auto& pair : tlp::limit_sample(law, stream, lim->n)) {
        std::snprintf(buf, sizeof(buf), "%.17g,%.17g\n", pair[0], pair[1]);
        os << buf;
      }
      emit_text(lim->out, os.str());
    } else {
      if (lim->out.empty()) {
        throw tlp::ConfigError("--plot-from needs --out");
      }
      auto [c1, c2] = read_samples_csv(lim->plot_from);
      tlp::write_text_atomic(lim->out, plot_from_samples(law, c1, c2));
    }
    rc = 0;
  });

  // ---- verify ----
  auto* sub_ver = app.add_subcommand(
      "verify", "run an experiment config and check it against its limit law");
  struct VerArgs {
    std::string config;
    std::string out;
    std::string csv;
    std::string plotdata;
    int calibrate = 0;
    std::uint64_t seed = 0;
    int threads = -1;
    std::string exec;
  };
  auto ver = std::make_shared<VerArgs>();
  sub_ver->add_option("--config", ver->config, "experiment config JSON")
      ->required();
  sub_ver->add_option("--out", ver->out, "report JSON path (default stdout)");
  sub_ver->add_option("--csv", ver->csv, "also write a per-cell CSV");
  sub_ver->add_option("--plotdata", ver->plotdata,
                      "also write CDF overlay data (keeps samples)");
  auto* ver_cal = sub_ver->add_option(
      "--calibrate", ver->calibrate,
      "instead: count limit-law seeds passing all KS thresholds");
  auto* ver_seed = sub_ver->add_option("--seed", ver->seed, "override seed");
  auto* ver_thr =
      sub_ver->add_option("--threads", ver->threads, "override threads");
  auto* ver_exec = sub_ver->add_option("--exec", ver->exec,
                                       "override execution: serial, openmp");
  sub_ver->callback([ver, ver_cal, ver_seed, ver_thr, ver_exec, &rc] {
    tlp::ExperimentConfig config = tlp::load_experiment_config(ver->config);
    if (ver_seed->count() > 0) config.seed = ver->seed;
    if (ver_thr->count() > 0) {
      config.threads = ver->threads;
    } else if (config.threads == 0) {
      config.threads = env_threads();
    }
    if (ver_exec->count() > 0) {
      if (ver->exec == "serial") {
        config.exec = tlp::Exec::serial;
      } else if (ver->exec == "openmp") {
        config.exec = tlp::Exec::openmp;
      } else {
        throw tlp::ConfigError("--exec must be 'serial' or 'openmp'");
      }
    }
    std::optional<int> calibrate;
    if (ver_cal->count() > 0) {
      if (ver->calibrate < 1) {
        throw tlp::ConfigError("--calibrate needs a positive seed count");
      }
      calibrate = ver->calibrate;
    }
    rc = run_verify(std::move(config), ver->out, ver->csv, ver->plotdata,
                    calibrate);
  });

  // ---- repro ----
  auto* sub_rep = app.add_subcommand(
      "repro", "run a canned verification preset by theorem tag");
  struct RepArgs {
    std::string theorem;
    std::string config_dir = "configs";
    std::string out;
  };
  auto rep = std::make_shared<RepArgs>();
  sub_rep
      ->add_option("--theorem", rep->theorem,
                   "one of 1.10, 2.1, 2.2, 2.3i, 2.3ii, 2.4i, 2.4ii, 7.1")
      ->required();
  sub_rep->add_option("--config-dir", rep->config_dir, "preset directory");
  sub_rep->add_option("--out", rep->out, "report JSON path (default stdout)");
  sub_rep->callback([rep, &rc] {
    static const char* kTags[] = {"1.10", "2.1",  "2.2",  "2.3i",
                                  "2.3ii", "2.4i", "2.4ii", "7.1"};
    bool known = false;
    for (const char* tag : kTags) known = known || rep->theorem == tag;
    if (!known) {
      throw tlp::ConfigError("unknown theorem tag '" + rep->theorem + "'");
    }
    std::string path = rep->config_dir + "/repro_" + rep->theorem + ".json";
    tlp::ExperimentConfig config = tlp::load_experiment_config(path);
    if (config.threads == 0) config.threads = env_threads();
    rc = run_verify(std::move(config), rep->out, "", "", std::nullopt);
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const tlp::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const tlp::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const tlp::ModelError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const tlp::BudgetError& e) {
    std::cerr << "error: " << e.what() << " (points used: " << e.points_used
              << ", achieved rel tol: " << e.achieved_rel_tol << ")\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return rc;
}
