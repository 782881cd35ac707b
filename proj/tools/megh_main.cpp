// Command-line front end: fit, test-re, diagnose, simulate, study.
// JSON results + CSV tables; every run writes a manifest next to its outputs.

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "megh/config_json.hpp"
#include "megh/data_io.hpp"
#include "megh/diagnostics.hpp"
#include "megh/errors.hpp"
#include "megh/estimation.hpp"
#include "megh/simulation.hpp"
#include "megh/version.hpp"

using json = nlohmann::ordered_json;
using namespace megh;

namespace {

constexpr int kExitUsage = 2;
constexpr int kExitValidation = 3;
constexpr int kExitNumeric = 4;

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!item.empty()) out.push_back(item);
  return out;
}

std::uint64_t default_seed() {
  if (const char* env = std::getenv("MEGH_SEED")) {
    try {
      return std::stoull(env);
    } catch (const std::exception&) {
      throw ValidationError("MEGH_SEED is not an unsigned integer");
    }
  }
  return 1;
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw ValidationError("cannot write " + path);
  out << text;
}

struct Manifest {
  std::string command;
  json options = json::object();
  std::uint64_t seed = 0;
  std::vector<std::string> outputs;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();

  void write(const std::string& out_prefix) const {
    json m;
    m["command"] = command;
    m["options"] = options;
    m["seed"] = seed;
    m["version"] = kVersion;
    m["wall_time_s"] =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    m["outputs"] = outputs;
    write_text(out_prefix + ".manifest.json", m.dump(2) + "\n");
  }
};

// ---- shared fit flags ----------------------------------------------------

struct FitFlags {
  std::string data_path;
  std::string model = "megh1";
  std::string baseline = "pgw";
  std::string re = "normal";
  std::string time_col = "time", status_col = "status", cluster_col = "cluster";
  std::string hazard_cols, time_cols, standardize;
  std::vector<std::string> truncate;  // name=value
  std::string out = "megh_fit";
  std::uint64_t seed = default_seed();
  int jobs = 1;
  int starts = 3;
  double t_dof = 5.0;

  void add_to(CLI::App* cmd, bool with_fit_options = true) {
    cmd->add_option("--data", data_path, "input CSV file")->required();
    cmd->add_option("--model", model, "hazard structure")
        ->check(CLI::IsMember({"gh", "megh1", "megh2"}));
    cmd->add_option("--baseline", baseline, "baseline hazard family")
        ->check(CLI::IsMember({"pgw", "loglogistic"}));
    cmd->add_option("--re", re, "random-effects family")
        ->check(CLI::IsMember({"normal", "t", "tpn"}));
    cmd->add_option("--time-col", time_col, "time column name");
    cmd->add_option("--status-col", status_col, "status column name");
    cmd->add_option("--cluster-col", cluster_col, "cluster column name");
    cmd->add_option("--hazard-cols", hazard_cols,
                    "comma-separated hazard-scale covariates")->required();
    cmd->add_option("--time-cols", time_cols,
                    "comma-separated time-scale covariates (subset)");
    cmd->add_option("--standardize", standardize,
                    "columns standardized to mean 0, sd 1");
    cmd->add_option("--truncate", truncate,
                    "cap a column before standardization, e.g. wbc=500");
    cmd->add_option("--out", out, "output path prefix");
    cmd->add_option("--seed", seed, "rng seed (falls back to MEGH_SEED)");
    if (with_fit_options) {
      cmd->add_option("--jobs", jobs, "cluster-evaluation threads");
      cmd->add_option("--starts", starts, "number of jittered optimizer starts");
      cmd->add_option("--t-dof", t_dof, "fixed Student-t degrees of freedom");
    }
  }

  ColumnMapping mapping() const {
    ColumnMapping m;
    m.time = time_col;
    m.status = status_col;
    m.cluster = cluster_col;
    m.hazard_covariates = split_csv_list(hazard_cols);
    m.time_covariates = split_csv_list(time_cols);
    m.standardize = split_csv_list(standardize);
    for (const auto& spec : truncate) {
      const auto pos = spec.find('=');
      if (pos == std::string::npos)
        throw ValidationError("--truncate expects name=value, got '" + spec + "'");
      m.truncate[spec.substr(0, pos)] = std::stod(spec.substr(pos + 1));
    }
    return m;
  }

  ModelSpec model_spec() const {
    ModelSpec spec;
    spec.structure = structure_from_name(model);
    spec.baseline = baseline_from_name(baseline);
    spec.re_family = re_family_from_name(re);
    spec.t_dof = t_dof;
    return spec;
  }

  FitConfig fit_config() const {
    FitConfig fc;
    fc.seed = seed;
    fc.threads = jobs;
    fc.n_starts = starts;
    return fc;
  }

  json echo() const {
    json j;
    j["data"] = data_path;
    j["model"] = model;
    j["baseline"] = baseline;
    j["re"] = re;
    j["hazard_cols"] = hazard_cols;
    j["time_cols"] = time_cols;
    j["standardize"] = standardize;
    j["starts"] = starts;
    j["jobs"] = jobs;
    return j;
  }
};

json fit_to_json(const FitResult& f, const ClusteredDataset& data) {
  json j;
  j["model"] = {{"structure", structure_name(f.spec.structure)},
                {"baseline", baseline_name(f.spec.baseline)}};
  if (f.spec.has_random_effects()) {
    j["model"]["random_effects"] = re_family_name(f.spec.re_family);
    if (f.spec.re_family == RandomEffectsFamily::StudentT)
      j["model"]["t_dof"] = f.spec.t_dof;
  }
  j["n"] = data.n();
  j["clusters"] = data.r();
  j["censoring_rate"] = data.censoring_rate();
  j["converged"] = f.converged;
  j["log_marginal"] = f.log_marginal_at_max;
  j["aic"] = f.aic;
  j["n_parameters"] = f.n_parameters;
  j["se_defined"] = f.se_defined;
  const auto est = f.estimates();
  json params = json::array();
  for (std::size_t k = 0; k < f.parameter_names.size(); ++k) {
    json p;
    p["name"] = f.parameter_names[k];
    p["estimate"] = est(k);
    if (f.se_defined && !f.is_fixed[k]) {
      p["se"] = f.standard_errors(k);
      p["ci_lower"] = f.ci_lower(k);
      p["ci_upper"] = f.ci_upper(k);
    }
    // back-map coefficients of standardized columns to the original scale
    if (k < static_cast<std::size_t>(data.p()) &&
        data.scalings[k].standardized)
      p["estimate_original_scale"] = est(k) / data.scalings[k].sd;
    params.push_back(p);
  }
  j["estimates"] = params;
  json scal = json::array();
  for (const auto& s : data.scalings)
    if (s.standardized)
      scal.push_back({{"name", s.name}, {"mean", s.mean}, {"sd", s.sd},
                      {"sample", "pooled"}});
  j["standardization"] = scal;
  return j;
}

void write_coef_csv(const std::string& path, const FitResult& f,
                    const ClusteredDataset& data) {
  std::ostringstream out;
  out << "name,estimate,se,ci_lower,ci_upper,estimate_original_scale\n";
  const auto est = f.estimates();
  char buf[64];
  auto fmt = [&](double v) {
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return std::string(buf);
  };
  for (std::size_t k = 0; k < f.parameter_names.size(); ++k) {
    out << f.parameter_names[k] << "," << fmt(est(k)) << ",";
    if (f.se_defined && !f.is_fixed[k])
      out << fmt(f.standard_errors(k)) << "," << fmt(f.ci_lower(k)) << ","
          << fmt(f.ci_upper(k));
    else
      out << ",,";
    out << ",";
    if (k < static_cast<std::size_t>(data.p()) && data.scalings[k].standardized)
      out << fmt(est(k) / data.scalings[k].sd);
    out << "\n";
  }
  write_text(path, out.str());
}

// ---- commands ------------------------------------------------------------

int cmd_fit(const FitFlags& flags) {
  Manifest manifest;
  manifest.command = "fit";
  manifest.options = flags.echo();
  manifest.seed = flags.seed;

  const ClusteredDataset data = load_dataset(flags.data_path, flags.mapping());
  const FitResult result = fit(flags.model_spec(), data, flags.fit_config());

  const std::string json_path = flags.out + ".json";
  const std::string csv_path = flags.out + "_coef.csv";
  json j = fit_to_json(result, data);
  j["seed"] = flags.seed;
  write_text(json_path, j.dump(2) + "\n");
  write_coef_csv(csv_path, result, data);
  manifest.outputs = {json_path, csv_path};
  manifest.write(flags.out);
  std::cout << (result.converged ? "converged" : "NOT converged")
            << "  log-marginal " << result.log_marginal_at_max << "  AIC "
            << result.aic << "\n";
  return 0;  // a non-converged fit report is still a report
}

int cmd_test_re(const FitFlags& flags) {
  Manifest manifest;
  manifest.command = "test-re";
  manifest.options = flags.echo();
  manifest.seed = flags.seed;

  const ClusteredDataset data = load_dataset(flags.data_path, flags.mapping());
  const ModelSpec spec = flags.model_spec();
  if (!spec.has_random_effects())
    throw ValidationError("test-re needs a mixed model (megh1 or megh2)");
  const LRTResult lrt = lrt_random_effects(spec, data, flags.fit_config());

  json j;
  j["statistic"] = lrt.statistic;
  j["case"] = lrt.mixture == MixtureCase::Case5_one_variance ? "case5" : "case7";
  j["p_value"] = lrt.p_value;
  j["full"] = {{"log_marginal", lrt.full.log_marginal_at_max},
               {"aic", lrt.full.aic},
               {"converged", lrt.full.converged}};
  j["reduced"] = {{"log_marginal", lrt.reduced.log_marginal_at_max},
                  {"aic", lrt.reduced.aic},
                  {"converged", lrt.reduced.converged}};
  const std::string json_path = flags.out + ".json";
  write_text(json_path, j.dump(2) + "\n");
  manifest.outputs = {json_path};
  manifest.write(flags.out);
  std::cout << "R_obs " << lrt.statistic << "  p " << lrt.p_value << "\n";
  return 0;
}

int cmd_diagnose(const FitFlags& flags, int grid_points, int n_boot) {
  Manifest manifest;
  manifest.command = "diagnose";
  manifest.options = flags.echo();
  manifest.options["grid"] = grid_points;
  manifest.options["boot"] = n_boot;
  manifest.seed = flags.seed;

  const ClusteredDataset data = load_dataset(flags.data_path, flags.mapping());
  const ModelSpec spec = flags.model_spec();
  if (!spec.has_random_effects())
    throw ValidationError("diagnose needs a mixed model (megh1 or megh2)");
  const FitResult result = fit(spec, data, flags.fit_config());

  GradientDiagnostic diag = gradient_function(
      result, data, default_gradient_grid(result, grid_points));
  if (n_boot > 0) {
    BandOptions bopts;
    bopts.n_boot = n_boot;
    bopts.seed = flags.seed;
    bopts.jobs = flags.jobs;
    gradient_bands(diag, result, data, bopts);
  }
  const std::string csv_path = flags.out + ".csv";
  write_gradient_csv(csv_path, diag);
  manifest.outputs = {csv_path};
  manifest.options["gradient_identity"] = gradient_identity(result, data);
  manifest.options["exceeds_band"] = diag.exceeds;
  manifest.options["boot_failed"] = diag.n_boot_failed;
  manifest.write(flags.out);
  std::cout << "gradient diagnostic written to " << csv_path
            << (diag.exceeds ? "  (band exceeded)" : "") << "\n";
  return 0;
}

int cmd_simulate(const std::string& truth_path, const std::string& out,
                 std::uint64_t seed) {
  Manifest manifest;
  manifest.command = "simulate";
  manifest.options["truth"] = truth_path;
  manifest.seed = seed;

  const SimTruth truth = load_sim_truth(truth_path);
  const ClusteredDataset data = simulate_times(truth, seed);
  write_dataset_csv(out, data);
  manifest.outputs = {out};
  manifest.options["n"] = data.n();
  manifest.options["clusters"] = data.r();
  manifest.options["censoring_rate"] = data.censoring_rate();
  manifest.write(out);
  std::cout << "wrote " << out << " (n=" << data.n() << ", censoring "
            << data.censoring_rate() << ")\n";
  return 0;
}

int cmd_study(const std::string& truth_path, int reps,
              const std::string& fit_models, std::uint64_t seed, int jobs,
              int starts, const std::string& out) {
  Manifest manifest;
  manifest.command = "study";
  manifest.options["truth"] = truth_path;
  manifest.options["reps"] = reps;
  manifest.options["fit_models"] = fit_models;
  manifest.options["jobs"] = jobs;
  manifest.seed = seed;

  StudyConfig config;
  config.truth = load_sim_truth(truth_path);
  config.n_reps = reps;
  config.seed = seed;
  config.jobs = jobs;
  config.fit.n_starts = starts;
  for (const auto& name : split_csv_list(fit_models)) {
    ModelSpec spec = config.truth.model;
    spec.structure = structure_from_name(name);
    config.fit_models.push_back(spec);
  }
  const StudyReport report = run_study(config);

  json j;
  j["n_reps"] = report.n_reps;
  j["seed"] = report.seed;
  j["models"] = json::array();
  for (const auto& m : report.models) {
    json jm;
    jm["label"] = m.label;
    jm["n_ok"] = m.n_ok;
    jm["n_failed"] = m.n_failed;
    jm["mean_aic"] = m.mean_aic;
    if (m.lrt_rejection_rate >= 0.0)
      jm["lrt_rejection_rate"] = m.lrt_rejection_rate;
    jm["parameters"] = json::array();
    for (const auto& p : m.params)
      jm["parameters"].push_back({{"name", p.name},
                                  {"truth", p.truth},
                                  {"mean", p.mean},
                                  {"bias", p.bias},
                                  {"mean_abs_error", p.mean_abs_error},
                                  {"mc_se", p.mc_se},
                                  {"coverage", p.coverage},
                                  {"n", p.n}});
    j["models"].push_back(jm);
  }
  json jreps = json::array();
  for (const auto& rec : report.reps) {
    json jr;
    jr["rep"] = rec.rep;
    jr["seed"] = rec.seed;
    jr["censoring_rate"] = rec.censoring_rate;
    jr["models"] = json::array();
    for (std::size_t m = 0; m < rec.models.size(); ++m) {
      const auto& mr = rec.models[m];
      json jmr;
      jmr["label"] = report.model_labels[m];
      jmr["ok"] = mr.ok;
      if (mr.ok) {
        jmr["converged"] = mr.converged;
        jmr["log_marginal"] = mr.log_marginal;
        jmr["aic"] = mr.aic;
        jmr["estimates"] = mr.estimates;
        if (mr.has_lrt) {
          jmr["lrt_statistic"] = mr.lrt_statistic;
          jmr["lrt_p"] = mr.lrt_p;
        }
      }
      jr["models"].push_back(jmr);
    }
    jreps.push_back(jr);
  }
  j["replications"] = jreps;

  const std::string json_path = out + "_report.json";
  write_text(json_path, j.dump(2) + "\n");

  std::ostringstream params_csv;
  params_csv << "model,parameter,truth,mean,bias,mean_abs_error,mc_se,coverage,n\n";
  for (const auto& m : report.models)
    for (const auto& p : m.params)
      params_csv << m.label << "," << p.name << "," << p.truth << "," << p.mean
                 << "," << p.bias << "," << p.mean_abs_error << "," << p.mc_se
                 << "," << p.coverage << "," << p.n << "\n";
  const std::string params_path = out + "_params.csv";
  write_text(params_path, params_csv.str());

  std::ostringstream models_csv;
  models_csv << "model,mean_aic,lrt_rejection_rate,n_ok,n_failed\n";
  for (const auto& m : report.models)
    models_csv << m.label << "," << m.mean_aic << "," << m.lrt_rejection_rate
               << "," << m.n_ok << "," << m.n_failed << "\n";
  const std::string models_path = out + "_models.csv";
  write_text(models_path, models_csv.str());

  manifest.outputs = {json_path, params_path, models_path};
  manifest.write(out);
  for (const auto& m : report.models)
    std::cout << m.label << "  mean AIC " << m.mean_aic << "  power "
              << m.lrt_rejection_rate << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mixed-effects general hazard survival models"};
  app.require_subcommand(1);

  FitFlags fit_flags;
  auto* fit_cmd = app.add_subcommand("fit", "fit a model to a dataset");
  fit_flags.add_to(fit_cmd);

  FitFlags test_flags;
  auto* test_cmd =
      app.add_subcommand("test-re", "boundary LRT for zero random-effects variance");
  test_flags.add_to(test_cmd);

  FitFlags diag_flags;
  int grid_points = 101, n_boot = 200;
  auto* diag_cmd =
      app.add_subcommand("diagnose", "gradient-function diagnostic with bootstrap bands");
  diag_flags.add_to(diag_cmd);
  diag_cmd->add_option("--grid", grid_points, "number of grid points");
  diag_cmd->add_option("--boot", n_boot, "bootstrap replications (0 = no bands)");

  std::string truth_path, sim_out = "megh_sim.csv";
  std::uint64_t sim_seed = default_seed();
  auto* sim_cmd = app.add_subcommand("simulate", "simulate one clustered dataset");
  sim_cmd->add_option("--truth", truth_path, "truth config JSON")->required();
  sim_cmd->add_option("--out", sim_out, "output CSV path");
  sim_cmd->add_option("--seed", sim_seed, "rng seed");

  std::string study_truth, study_models = "gh,megh1,megh2",
              study_out = "megh_study";
  int study_reps = 50, study_jobs = 1, study_starts = 3;
  std::uint64_t study_seed = default_seed();
  auto* study_cmd =
      app.add_subcommand("study", "replication study: bias, AIC, coverage, power");
  study_cmd->add_option("--truth", study_truth, "truth config JSON")->required();
  study_cmd->add_option("--reps", study_reps, "number of replications");
  study_cmd->add_option("--fit-models", study_models, "structures to fit");
  study_cmd->add_option("--seed", study_seed, "master seed");
  study_cmd->add_option("--jobs", study_jobs, "parallel replications");
  study_cmd->add_option("--starts", study_starts, "optimizer starts per fit");
  study_cmd->add_option("--out", study_out, "output path prefix");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitUsage;
  }

  try {
    if (fit_cmd->parsed()) return cmd_fit(fit_flags);
    if (test_cmd->parsed()) return cmd_test_re(test_flags);
    if (diag_cmd->parsed()) return cmd_diagnose(diag_flags, grid_points, n_boot);
    if (sim_cmd->parsed()) return cmd_simulate(truth_path, sim_out, sim_seed);
    if (study_cmd->parsed())
      return cmd_study(study_truth, study_reps, study_models, study_seed,
                       study_jobs, study_starts, study_out);
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kExitNumeric;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumeric;
  }
  return 0;
}
