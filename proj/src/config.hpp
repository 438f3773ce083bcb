#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "cstr.hpp"
#include "lifting.hpp"
#include "richards.hpp"
#include "simulate.hpp"
#include "topology.hpp"

namespace kdmhe {

struct SplitSpec {
  int train = 0;
  int validate = 0;
  int test = 0;
  int total() const { return train + validate + test; }
};

// One declarative run description; the cstr/agro presets encode the full
// case-study settings.
struct RunConfig {
  std::string process;  // "cstr" | "agro"
  std::uint64_t seed = 0;
  SplitSpec splits;
  NoiseSpec noise;            // sigmas in physical units
  Eigen::VectorXd x0;         // simulation initial state
  Eigen::VectorXd x0bar;      // estimator initial guess
  double identify_rtol = 1e-10;
  int N = 3;
  double p0 = 1.0, q = 1.0, r = 1.0;  // covariance scalars (per coordinate)
  Eigen::VectorXd lb, ub;     // original-state bounds, physical units
  int settle_steps = 0;       // agro: noise-free settling before collection
  double guess_offset = 0.0;  // agro: x0bar = x0 + offset when x0bar empty
  CstrConfig cstr;
  SoilConfig soil;
  std::string source_path;    // preset file this config was loaded from
  std::string digest;         // content digest of the preset file
};

RunConfig load_config(const std::string& path);

SubsystemTopology make_topology(const RunConfig& cfg);
std::vector<std::vector<std::string>> state_basis_names(const RunConfig& cfg);
std::vector<std::vector<std::string>> input_basis_names(const RunConfig& cfg);
std::vector<LiftingDictionary> make_state_dicts(const RunConfig& cfg);
std::vector<LiftingDictionary> make_input_dicts(const RunConfig& cfg);

// Simulates the configured process over splits.total() samples.
Trajectory simulate_process(const RunConfig& cfg, std::uint64_t seed);

}  // namespace kdmhe
