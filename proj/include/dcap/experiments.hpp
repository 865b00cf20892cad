#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "dcap/finite_volume.hpp"
#include "dcap/galerkin.hpp"
#include "dcap/kinetic.hpp"

namespace dcap {

struct EnsembleConfig {
  int n_paths = 8;
  std::uint64_t seed0 = 1;
  int threads = 0;  // 0: hardware concurrency
  double bound_scale = 1.0;  // scales every analytic bound (forced-failure hook)
};

struct MeanSe {
  double mean = 0;
  double se = 0;  // 0 when n < 2
};

// Monte-Carlo statistics of the norm time series together with the
// closed-form bound constants they are checked against.
struct EnergyReport {
  std::vector<double> times;
  std::vector<MeanSe> l2_sq, h1_sq, h2_sq, dissipation;
  std::vector<MeanSe> energy_lhs;  // (1-d)/2 L2^2 + d/2 H1^2 + eps int ||grad u||^2
  std::vector<double> energy_bound;  // C0(t)
  std::vector<MeanSe> weighted_lhs;  // d(1-d)/2 H1^2 + d^2/2 H2^2 + eps d/2 int H2^2
  std::vector<double> weighted_bound;  // C~0(t)
  bool weighted_applicable = true;     // requires delta <= epsilon
  MeanSe p4_sup;        // sup_t ||u||_{L2}^4
  MeanSe p4_dissipation;  // (eps int int |grad u|^2)^2
  double p4_bound = 0;  // closed-form fourth-moment constant
  int n_paths = 0;
  bool se_applicable = true;
  std::vector<std::uint64_t> seeds;
  std::vector<std::uint64_t> aborted_seeds;
  bool pass_energy = true, pass_weighted = true, pass_p4 = true;
  bool pass() const {
    return pass_energy && (!weighted_applicable || pass_weighted) && pass_p4 &&
           aborted_seeds.empty();
  }
};

EnergyReport run_ensemble(const SolverConfig& config, const FluxModel* flux,
                          const NoiseModel* noise, const SpectralFieldD& u0,
                          const EnsembleConfig& ens);

// Closed-form constants used by the reports.
double energy_bound_constant(double t, double c_phi, double delta, double u0_l2_sq,
                             double u0_h1_sq);
double weighted_bound_constant(double t, double c_phi, double epsilon, double delta,
                               double u0_h1_sq, double u0_h2_sq, double energy_const,
                               double flux_lipschitz, double flux_sup_l2);
double fourth_moment_bound(double y0, double c_phi, double horizon);

struct StabilityReport {
  std::vector<double> magnitudes;
  std::vector<double> distances;  // ||u0 - v0||_{L2}
  std::vector<MeanSe> ratios;     // E sup_t ||u - v||^2 / ||u0 - v0||^2
  bool identical_initial = false;
  double variation = 0;  // max ratio / min ratio over the sweep
  bool pass = false;     // variation < 10
  int n_paths = 0;
};

StabilityReport stability_experiment(const SolverConfig& config, const FluxModel* flux,
                                     const NoiseModel* noise, const SpectralFieldD& u0,
                                     const SpectralFieldD& direction,
                                     const std::vector<double>& magnitudes,
                                     const EnsembleConfig& ens);

struct LimitLevel {
  double epsilon = 0;
  double delta = 0;
};

struct LimitStudyConfig {
  std::vector<LimitLevel> levels;
  bool self_convergence = false;  // false: compare against the FV reference
  int dim = 1;
  int n_per_axis = 64;
  double galerkin_dt = 1e-3;
  double dt_fine = 0;  // 0: finest dt in play
  double horizon = 0.5;
  int snapshots = 50;  // comparison snapshots over (0, T]
  int fv_cells = 1024;
  double fv_dt = 0;  // 0: derived from dt_fine
  double neps_bound = 1.0;
  double final_error_threshold = 0.0;  // 0: skip the threshold flag
  bool regularize_with_level = false;  // level i uses regularize(flux, level_offset + i)
  int level_offset = 2;
  double sigma0 = 0.1;
  int m_lambda = 33;
  double lambda_box = 0;  // 0: auto, 1.25 max |u| over the whole study
};

struct LimitStudyReport {
  std::vector<LimitLevel> levels;
  std::vector<MeanSe> l1_error;          // vs reference, or Cauchy vs next level
  std::vector<MeanSe> velocity_gap;      // <h_k - h_ref, rho> gaps (reference mode)
  std::vector<MeanSe> velocity_gap_pair; // consecutive-level gaps, size levels-1
  double lambda_box_used = 0;
  bool pass_decreasing = false;
  bool pass_threshold = true;
  bool pass_velocity = false;
  int n_paths = 0;
  std::vector<std::uint64_t> aborted_seeds;
  bool pass() const {
    return pass_decreasing && pass_threshold && pass_velocity && aborted_seeds.empty();
  }
};

LimitStudyReport limit_study(const LimitStudyConfig& study, const FluxModel& flux,
                             const NoiseModel* noise, const SpectralFieldD& u0,
                             const EnsembleConfig& ens);

// Consecutive-level velocity-average Cauchy gaps only.
std::vector<MeanSe> kinetic_compactness(const LimitStudyConfig& study, const FluxModel& flux,
                                        const NoiseModel* noise, const SpectralFieldD& u0,
                                        const EnsembleConfig& ens);

// Deterministic worker pool: results are reduced in member order regardless
// of scheduling.
void parallel_for_members(int n_members, int threads, const std::function<void(int)>& work);

}  // namespace dcap
