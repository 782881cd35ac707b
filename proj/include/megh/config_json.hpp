#pragma once

#include <string>

#include "megh/simulation.hpp"

namespace megh {

// Simulation-truth config: JSON with structure/baseline/random_effects,
// beta/alpha, covariate generators, cluster layout and censoring target.
SimTruth sim_truth_from_json(const std::string& json_text);
SimTruth load_sim_truth(const std::string& path);

}  // namespace megh
