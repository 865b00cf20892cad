#pragma once

#include <complex>
#include <optional>
#include <stdexcept>
#include <vector>

#include "dcap/errors.hpp"
#include "dcap/flux.hpp"
#include "dcap/noise.hpp"
#include "dcap/wiener.hpp"

namespace dcap {

struct SolverConfig {
  int dim = 1;
  int n_per_axis = 32;
  double epsilon = 0.1;  // diffusion, in (0, 1/2]
  double delta = 0.01;   // capillarity, in (0, 1/2]
  double dt = 1e-3;
  double horizon = 1.0;
  int snapshot_every = 1;        // record every k-th step; must divide the step count
  double blowup_threshold = 1e6; // abort when ||u||_{L2} exceeds this

  void validate() const;
  Eigen::Index steps() const;
};

// One realized trajectory: sampled states plus the running quantities the
// energy estimates need (accumulated by left-endpoint quadrature at every
// step, not just at snapshots).
struct SolutionPath {
  SolverConfig config;
  std::uint64_t seed = 0;
  std::vector<double> times;
  std::vector<SpectralFieldD> snapshots;  // empty when keep_fields = false
  std::vector<double> l2_sq, h1_sq, h2_sq;
  std::vector<double> dissipation;      // eps int_0^t ||grad u||^2
  std::vector<double> h2_time_integral; // int_0^t ||u||_{H2}^2
  double sup_l2_sq = 0;                 // over every step
  Eigen::ArrayXd increments;            // the coarsened increments consumed
};

// Exponential Euler-Maruyama integrator for the spectral coefficient system
//   d[(1 - delta + delta lam_k^2) a_k] + eps (lam_k^2 - 1) a_k dt
//       = F_k(u) dt + Phi_k(u) dW,
// with the linear term integrated exactly per mode and the flux and noise
// projections treated explicitly (pseudospectral, two-thirds dealiased).
class GalerkinSolver {
public:
  GalerkinSolver(const SolverConfig& config, const FluxModel* flux, const NoiseModel* noise);

  const TorusGrid& grid() const { return grid_; }
  const SolverConfig& config() const { return config_; }

  // Sharp projection of the initial data into the dealias band.
  SpectralFieldD project(const SpectralFieldD& u0) const;

  // Coefficients of -div f(x, u), dealiased; the spectral representation of
  // the Galerkin pairing of the flux with every retained mode.
  SpectralFieldD drift_spectrum(const SpectralFieldD& u);
  // Coefficients of Phi(x, u), dealiased.
  SpectralFieldD noise_spectrum(const SpectralFieldD& u);

  std::complex<double> drift_coefficient(const SpectralFieldD& u, int k0, int k1 = 0);
  std::complex<double> noise_coefficient(const SpectralFieldD& u, int k0, int k1 = 0);

  void em_step(SpectralFieldD& u, double dW, double t_for_diagnostics = 0.0);

  // Deterministic function of (u0, path, config); bit-identical reruns.
  SolutionPath simulate(const SpectralFieldD& u0, const WienerPath& fine_path,
                        bool keep_fields = true);

  double decay_factor(std::int64_t flat_index) const { return decay_[flat_index]; }
  double mass_factor(std::int64_t flat_index) const { return mass_[flat_index]; }

private:
  void evaluate_drift(const SpectralFieldD& u);
  void evaluate_noise(const SpectralFieldD& u);

  SolverConfig config_;
  TorusGrid grid_;
  const FluxModel* flux_;
  const NoiseModel* noise_;
  FourierWorkspaceD ws_;

  Eigen::ArrayXd lam_sq_;    // 1 + (2 pi |k|)^2
  Eigen::ArrayXd grad_sq_;   // (2 pi |k|)^2
  Eigen::ArrayXd mass_;      // 1 - delta + delta lam^2
  Eigen::ArrayXd decay_;     // exp(-eps (lam^2 - 1) dt / mass)
  Eigen::ArrayXd diss_w_;    // per-mode step weight for running time integrals,
                             // (1 - decay^2) / (2 eps (lam^2-1) / mass); dt at k = 0
  Eigen::ArrayXd mask_;      // two-thirds dealias multiplier (0/1)
  Eigen::ArrayXd x0_, x1_;   // grid coordinates

  SpectralFieldD drift_buf_;
  SpectralFieldD noise_buf_;
  bool noise_cached_ = false;  // valid for state-independent noise
};

enum class ResidualConvention {
  // Left-endpoint Riemann/Ito sums for every time integral; measures the
  // time-discretization error of the computed path.
  continuum,
  // Per-mode exponential weights for the stiff linear term, under which the
  // integrator satisfies the weak identity exactly (up to roundoff).
  scheme_exact,
};

// Pathwise residual of the weak formulation against a band-limited test
// function. Requires a path recorded with snapshot_every == 1.
double weak_residual(const SolutionPath& path, const SpectralFieldD& testfn,
                     const FluxModel* flux, const NoiseModel* noise,
                     ResidualConvention convention = ResidualConvention::continuum);

}  // namespace dcap
