#include "megh/config_json.hpp"

#include <json.hpp>

#include <fstream>

#include "megh/errors.hpp"

namespace megh {

namespace {
using json = nlohmann::json;

SimTruth truth_from_json(const json& j) {
  SimTruth truth;
  truth.model.structure = structure_from_name(j.at("structure").get<std::string>());
  const auto& jb = j.at("baseline");
  truth.model.baseline = baseline_from_name(jb.at("family").get<std::string>());
  const auto theta = jb.at("theta").get<std::vector<double>>();
  truth.truth.theta = Eigen::Map<const Eigen::VectorXd>(theta.data(), theta.size());

  const auto beta = j.at("beta").get<std::vector<double>>();
  truth.truth.beta = Eigen::Map<const Eigen::VectorXd>(beta.data(), beta.size());
  std::vector<double> alpha;
  if (j.contains("alpha")) alpha = j.at("alpha").get<std::vector<double>>();
  truth.truth.alpha = Eigen::Map<const Eigen::VectorXd>(alpha.data(), alpha.size());

  if (truth.model.has_random_effects()) {
    const auto& jre = j.at("random_effects");
    truth.model.re_family =
        re_family_from_name(jre.at("family").get<std::string>());
    if (jre.contains("t_dof")) truth.model.t_dof = jre.at("t_dof").get<double>();
    const auto xi = jre.at("xi").get<std::vector<double>>();
    truth.truth.xi = Eigen::Map<const Eigen::VectorXd>(xi.data(), xi.size());
  } else {
    truth.truth.xi.resize(0);
  }

  for (const auto& jc : j.at("covariates")) {
    CovariateSpec c;
    c.name = jc.at("name").get<std::string>();
    const std::string dist = jc.value("dist", std::string("stdnormal"));
    if (dist == "stdnormal") {
      c.kind = CovariateSpec::Kind::StdNormal;
    } else if (dist == "bernoulli") {
      c.kind = CovariateSpec::Kind::Bernoulli;
      c.prob = jc.value("p", 0.5);
    } else {
      throw ValidationError("unknown covariate dist '" + dist + "'");
    }
    truth.covariates.push_back(c);
  }

  for (const auto& jt : j.at("time_scale_columns")) {
    if (jt.is_string()) {
      const std::string name = jt.get<std::string>();
      int idx = -1;
      for (std::size_t c = 0; c < truth.covariates.size(); ++c)
        if (truth.covariates[c].name == name) idx = static_cast<int>(c);
      if (idx < 0)
        throw ValidationError("time-scale covariate '" + name + "' not declared");
      truth.time_scale_columns.push_back(idx);
    } else {
      truth.time_scale_columns.push_back(jt.get<int>());
    }
  }

  if (j.contains("cluster_sizes")) {
    truth.cluster_sizes = j.at("cluster_sizes").get<std::vector<int>>();
  } else {
    truth.cluster_sizes =
        equal_cluster_sizes(j.at("n").get<int>(), j.at("clusters").get<int>());
  }
  truth.censoring_target = j.value("censoring", 0.0);
  validate_sim_truth(truth);
  return truth;
}

}  // namespace

SimTruth sim_truth_from_json(const std::string& json_text) {
  try {
    return truth_from_json(json::parse(json_text));
  } catch (const json::exception& e) {
    throw ValidationError(std::string("truth config: ") + e.what());
  }
}

SimTruth load_sim_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open truth config " + path);
  std::string text((std::istreambuf_iterator<char>(in)),
                   std::istreambuf_iterator<char>());
  return sim_truth_from_json(text);
}

}  // namespace megh
