#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "dcap/experiments.hpp"

namespace dcap {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Fully validated run description. Unknown keys and constraint violations
// are rejected at parse time, before any computation.
struct RunConfig {
  std::string experiment;
  nlohmann::json echo;

  std::string flux_preset = "none";
  double flux_amplitude = 1.0;
  double lambda_box = 2.5;

  std::string noise_preset = "none";
  double noise_amplitude = 0.0;

  SolverConfig solver;

  std::string initial_preset = "sine";
  double initial_amplitude = 1.0;
  double initial_offset = 0.0;
  int initial_mode = 1;
  double initial_value = 0.0;
  double initial_left = 1.0;
  double initial_right = 0.0;
  std::uint64_t initial_seed = 0;
  int initial_band = 0;  // 0: n/4

  EnsembleConfig ensemble;
  std::string out_dir = "out";

  // stability-check
  std::vector<double> stability_magnitudes{1e-1, 1e-2, 1e-3, 1e-4};
  int stability_direction_mode = 2;

  // limit-study
  LimitStudyConfig limit;

  // kinetic-diag
  int m_lambda = 33;
  double kinetic_lambda_box = 0;
  std::vector<int> theta_factors{2, 4, 8, 16};
  int sobolev_order = 4;
  double slope_threshold = 0.4;

  // nondegeneracy
  double nd_lambda_min = -1.0;
  double nd_lambda_max = 1.0;
  std::vector<double> nd_etas{0.1, 0.05, 0.025};
  int nd_directions = 64;
  int nd_lambda_nodes = 2001;
  double nd_min_xi = 0.1;
};

RunConfig parse_config(const nlohmann::json& j);
RunConfig parse_config_file(const std::string& path);

// Initial data preset on the solver grid.
SpectralFieldD make_initial(const RunConfig& cfg, const TorusGrid& grid);

// Runs the configured experiment, writes report.json and CSV outputs into
// cfg.out_dir. Returns 0 on pass, 1 on a failed experiment bound, 2 on a
// runtime abort (blow-up).
int dispatch(const RunConfig& cfg);

}  // namespace dcap
