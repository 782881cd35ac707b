// Python bindings for the main operations: baseline hazards, random-effects
// distributions, simulation, fitting, diagnostics, and the boundary test.

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "megh/config_json.hpp"
#include "megh/data_io.hpp"
#include "megh/errors.hpp"
#include "megh/diagnostics.hpp"
#include "megh/estimation.hpp"
#include "megh/simulation.hpp"
#include "megh/version.hpp"

namespace py = pybind11;
using namespace megh;

namespace {

BaselineHazard make_baseline(const std::string& family,
                             const Eigen::VectorXd& theta) {
  BaselineHazard b{baseline_from_name(family), theta};
  check_baseline(b);
  return b;
}

RandomEffectsDist make_re(const std::string& family, const Eigen::VectorXd& xi,
                          double t_dof) {
  RandomEffectsDist d{re_family_from_name(family), xi, t_dof};
  check_reffects(d);
  return d;
}

ModelSpec make_spec(const std::string& structure, const std::string& baseline,
                    const std::string& re, double t_dof) {
  ModelSpec spec;
  spec.structure = structure_from_name(structure);
  spec.baseline = baseline_from_name(baseline);
  spec.re_family = re_family_from_name(re);
  spec.t_dof = t_dof;
  return spec;
}

py::dict fit_to_dict(const FitResult& f) {
  py::dict out;
  out["structure"] = structure_name(f.spec.structure);
  out["baseline"] = baseline_name(f.spec.baseline);
  if (f.spec.has_random_effects())
    out["random_effects"] = re_family_name(f.spec.re_family);
  out["converged"] = f.converged;
  out["log_marginal"] = f.log_marginal_at_max;
  out["aic"] = f.aic;
  out["n_parameters"] = f.n_parameters;
  out["se_defined"] = f.se_defined;
  out["names"] = f.parameter_names;
  out["estimates"] = f.estimates();
  out["se"] = f.standard_errors;
  out["ci_lower"] = f.ci_lower;
  out["ci_upper"] = f.ci_upper;
  return out;
}

}  // namespace

PYBIND11_MODULE(_megh, m) {
  m.doc() = "mixed-effects general hazard survival models";
#ifdef MEGH_VERSION_INFO
  m.attr("__version__") = MEGH_VERSION_INFO;
#else
  m.attr("__version__") = kVersion;
#endif

  py::register_exception<ValidationError>(m, "ValidationError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_RuntimeError);

  // baseline hazards
  m.def("h0", [](double t, const std::string& family, const Eigen::VectorXd& theta) {
          return h0(t, make_baseline(family, theta));
        },
        py::arg("t"), py::arg("family"), py::arg("theta"));
  m.def("H0", [](double t, const std::string& family, const Eigen::VectorXd& theta) {
          return H0(t, make_baseline(family, theta));
        },
        py::arg("t"), py::arg("family"), py::arg("theta"));
  m.def("H0_inv", [](double s, const std::string& family, const Eigen::VectorXd& theta) {
          return H0_inv(s, make_baseline(family, theta));
        },
        py::arg("s"), py::arg("family"), py::arg("theta"));

  // random effects
  m.def("re_log_density",
        [](double u, const std::string& family, const Eigen::VectorXd& xi,
           double t_dof) { return log_density(u, make_re(family, xi, t_dof)); },
        py::arg("u"), py::arg("family"), py::arg("xi"), py::arg("t_dof") = 5.0);
  m.def("re_variance",
        [](const std::string& family, const Eigen::VectorXd& xi, double t_dof) {
          return variance(make_re(family, xi, t_dof));
        },
        py::arg("family"), py::arg("xi"), py::arg("t_dof") = 5.0);
  m.def("re_sample",
        [](std::size_t n, const std::string& family, const Eigen::VectorXd& xi,
           std::uint64_t seed, double t_dof) {
          return sample(n, make_re(family, xi, t_dof), seed);
        },
        py::arg("n"), py::arg("family"), py::arg("xi"), py::arg("seed") = 1,
        py::arg("t_dof") = 5.0);

  // boundary mixture p-value
  m.def("boundary_pvalue",
        [](const std::string& mix, double r_obs) {
          if (mix == "case5")
            return boundary_pvalue(MixtureCase::Case5_one_variance, r_obs);
          if (mix == "case7")
            return boundary_pvalue(MixtureCase::Case7_two_variances, r_obs);
          throw ValidationError("mixture must be 'case5' or 'case7'");
        },
        py::arg("mixture"), py::arg("r_obs"));

  py::class_<ClusteredDataset>(m, "Dataset")
      .def_property_readonly("n", &ClusteredDataset::n)
      .def_property_readonly("r", &ClusteredDataset::r)
      .def_property_readonly("p", &ClusteredDataset::p)
      .def_property_readonly("censoring_rate", &ClusteredDataset::censoring_rate)
      .def_property_readonly("times",
                             [](const ClusteredDataset& d) { return d.times; })
      .def_property_readonly("status",
                             [](const ClusteredDataset& d) { return d.status; })
      .def_property_readonly("cluster",
                             [](const ClusteredDataset& d) { return d.cluster; })
      .def_property_readonly("X", [](const ClusteredDataset& d) { return d.X; })
      .def_property_readonly(
          "covariate_names",
          [](const ClusteredDataset& d) { return d.covariate_names; });

  m.def("load_dataset",
        [](const std::string& path, const std::string& time_col,
           const std::string& status_col, const std::string& cluster_col,
           const std::vector<std::string>& hazard_cols,
           const std::vector<std::string>& time_cols,
           const std::vector<std::string>& standardize,
           const std::map<std::string, double>& truncate) {
          ColumnMapping mcfg;
          mcfg.time = time_col;
          mcfg.status = status_col;
          mcfg.cluster = cluster_col;
          mcfg.hazard_covariates = hazard_cols;
          mcfg.time_covariates = time_cols;
          mcfg.standardize = standardize;
          mcfg.truncate = truncate;
          return load_dataset(path, mcfg);
        },
        py::arg("path"), py::arg("time_col") = "time",
        py::arg("status_col") = "status", py::arg("cluster_col") = "cluster",
        py::arg("hazard_cols"), py::arg("time_cols") = std::vector<std::string>{},
        py::arg("standardize") = std::vector<std::string>{},
        py::arg("truncate") = std::map<std::string, double>{});

  m.def("simulate_dataset",
        [](const std::string& truth_json, std::uint64_t seed) {
          return simulate_times(sim_truth_from_json(truth_json), seed);
        },
        py::arg("truth_json"), py::arg("seed") = 1);

  py::class_<FitResult>(m, "Fit")
      .def_property_readonly("converged",
                             [](const FitResult& f) { return f.converged; })
      .def_property_readonly(
          "log_marginal", [](const FitResult& f) { return f.log_marginal_at_max; })
      .def_property_readonly("aic", [](const FitResult& f) { return f.aic; })
      .def_property_readonly("names",
                             [](const FitResult& f) { return f.parameter_names; })
      .def_property_readonly("estimates",
                             [](const FitResult& f) { return f.estimates(); })
      .def_property_readonly("se",
                             [](const FitResult& f) { return f.standard_errors; })
      .def("to_dict", &fit_to_dict);

  m.def("fit",
        [](const ClusteredDataset& data, const std::string& structure,
           const std::string& baseline, const std::string& re, int starts,
           std::uint64_t seed, double t_dof) {
          FitConfig fc;
          fc.n_starts = starts;
          fc.seed = seed;
          return fit(make_spec(structure, baseline, re, t_dof), data, fc);
        },
        py::arg("data"), py::arg("structure") = "megh1",
        py::arg("baseline") = "pgw", py::arg("re") = "normal",
        py::arg("starts") = 3, py::arg("seed") = 1, py::arg("t_dof") = 5.0);

  m.def("lrt_random_effects",
        [](const ClusteredDataset& data, const std::string& structure,
           const std::string& baseline, const std::string& re, int starts,
           std::uint64_t seed, double t_dof) {
          FitConfig fc;
          fc.n_starts = starts;
          fc.seed = seed;
          const LRTResult res =
              lrt_random_effects(make_spec(structure, baseline, re, t_dof), data, fc);
          py::dict out;
          out["statistic"] = res.statistic;
          out["case"] = res.mixture == MixtureCase::Case5_one_variance ? "case5"
                                                                       : "case7";
          out["p_value"] = res.p_value;
          out["full"] = fit_to_dict(res.full);
          out["reduced"] = fit_to_dict(res.reduced);
          return out;
        },
        py::arg("data"), py::arg("structure") = "megh1",
        py::arg("baseline") = "pgw", py::arg("re") = "normal",
        py::arg("starts") = 3, py::arg("seed") = 1, py::arg("t_dof") = 5.0);

  m.def("gradient_diagnostic",
        [](const FitResult& f, const ClusteredDataset& data, int grid_points,
           int n_boot, std::uint64_t seed, int jobs) {
          GradientDiagnostic diag =
              gradient_function(f, data, default_gradient_grid(f, grid_points));
          if (n_boot > 0) {
            BandOptions opts;
            opts.n_boot = n_boot;
            opts.seed = seed;
            opts.jobs = jobs;
            gradient_bands(diag, f, data, opts);
          }
          py::dict out;
          out["u"] = diag.grid;
          out["delta"] = diag.delta;
          out["identity"] = gradient_identity(f, data);
          if (diag.has_bands) {
            out["lo"] = diag.band_lower;
            out["hi"] = diag.band_upper;
            out["exceeds"] = diag.exceeds;
            out["boot_failed"] = diag.n_boot_failed;
          }
          return out;
        },
        py::arg("fit"), py::arg("data"), py::arg("grid_points") = 101,
        py::arg("n_boot") = 0, py::arg("seed") = 1, py::arg("jobs") = 1);

  m.def("km_by_cluster", [](const ClusteredDataset& data) {
    py::list out;
    for (const auto& c : km_by_cluster(data)) {
      py::dict d;
      d["cluster"] = c.label;
      d["time"] = c.times;
      d["survival"] = c.survival;
      d["at_risk"] = c.at_risk;
      out.append(d);
    }
    return out;
  });
}
