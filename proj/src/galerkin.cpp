#include "dcap/galerkin.hpp"

#include <cmath>

namespace dcap {

void SolverConfig::validate() const {
  if (dim != 1 && dim != 2) throw std::invalid_argument("solver.dim must be 1 or 2");
  if (n_per_axis < 4 || n_per_axis % 2 != 0)
    throw std::invalid_argument("solver.n_per_axis must be even and >= 4");
  if (!(epsilon > 0) || epsilon > 0.5)
    throw std::invalid_argument("solver.epsilon must lie in (0, 1/2]");
  if (!(delta > 0) || delta > 0.5)
    throw std::invalid_argument("solver.delta must lie in (0, 1/2]");
  if (!(dt > 0)) throw std::invalid_argument("solver.dt must be positive");
  if (!(horizon > 0)) throw std::invalid_argument("solver.horizon must be positive");
  if (snapshot_every < 1) throw std::invalid_argument("solver.snapshot_every must be >= 1");
  double steps_real = horizon / dt;
  auto n = static_cast<Eigen::Index>(std::llround(steps_real));
  if (n < 1 || std::abs(steps_real - static_cast<double>(n)) > 1e-9 * steps_real)
    throw std::invalid_argument("solver.horizon must be an integer multiple of solver.dt");
  if (n % snapshot_every != 0)
    throw std::invalid_argument("solver.snapshot_every must divide the step count");
}

Eigen::Index SolverConfig::steps() const {
  return static_cast<Eigen::Index>(std::llround(horizon / dt));
}

GalerkinSolver::GalerkinSolver(const SolverConfig& config, const FluxModel* flux,
                               const NoiseModel* noise)
    : config_(config), grid_(config.dim, config.n_per_axis), flux_(flux), noise_(noise) {
  config.validate();
  if (flux_ && !flux_->is_null() && flux_->grid() != grid_)
    throw std::invalid_argument("flux model lives on a different grid");

  const auto size = grid_.size();
  lam_sq_.resize(size);
  grad_sq_.resize(size);
  mass_.resize(size);
  decay_.resize(size);
  diss_w_.resize(size);
  mask_.resize(size);
  const int limit = dealias_limit(grid_);
  for (std::int64_t i = 0; i < size; ++i) {
    grad_sq_[i] = two_pi * two_pi * grid_.wavevector_sq(i);
    lam_sq_[i] = 1.0 + grad_sq_[i];
    mass_[i] = 1.0 - config_.delta + config_.delta * lam_sq_[i];
    double a = config_.epsilon * grad_sq_[i] / mass_[i];
    decay_[i] = std::exp(-a * config_.dt);
    // exact per-step integral of e^{-2 a s} over (0, dt): keeps the discrete
    // energy balance telescoping exactly for the unforced flow
    diss_w_[i] = a > 0 ? (1.0 - decay_[i] * decay_[i]) / (2.0 * a) : config_.dt;
    mask_[i] = mode_in_band<double>(grid_, i, limit) ? 1.0 : 0.0;
  }
  x0_ = coordinate_array(grid_, 0);
  x1_ = grid_.dim() == 2 ? coordinate_array(grid_, 1) : Eigen::ArrayXd::Zero(size);
  drift_buf_ = SpectralFieldD(grid_);
  noise_buf_ = SpectralFieldD(grid_);
}

SpectralFieldD GalerkinSolver::project(const SpectralFieldD& u0) const {
  if (u0.grid != grid_) throw std::invalid_argument("initial data lives on a different grid");
  SpectralFieldD out = u0;
  out.coeffs *= mask_.cast<std::complex<double>>();
  return out;
}

void GalerkinSolver::evaluate_drift(const SpectralFieldD& u) {
  if (!flux_ || flux_->is_null()) {
    drift_buf_.coeffs.setZero();
    return;
  }
  Eigen::ArrayXd u_phys = ws_.inverse(u);
  Eigen::ArrayXd g_of_u(u_phys.size());
  for (Eigen::Index i = 0; i < u_phys.size(); ++i) g_of_u[i] = flux_->profile().g(u_phys[i]);
  drift_buf_.coeffs.setZero();
  for (int axis = 0; axis < flux_->components(); ++axis) {
    Eigen::ArrayXd w = flux_->direction_samples(axis) * g_of_u;
    auto w_hat = ws_.forward(grid_, w);
    auto dw = derivative(w_hat, axis);
    drift_buf_.coeffs -= dw.coeffs;
  }
  drift_buf_.coeffs *= mask_.cast<std::complex<double>>();
}

void GalerkinSolver::evaluate_noise(const SpectralFieldD& u) {
  if (!noise_ || noise_->is_null()) {
    noise_buf_.coeffs.setZero();
    return;
  }
  if (!noise_->lambda_dependent()) {
    if (noise_cached_) return;
    noise_cached_ = true;
  }
  Eigen::ArrayXd u_phys = ws_.inverse(u);
  Eigen::ArrayXd w(u_phys.size());
  for (Eigen::Index i = 0; i < u_phys.size(); ++i)
    w[i] = noise_->phi(x0_[i], x1_[i], u_phys[i]);
  noise_buf_ = ws_.forward(grid_, w);
  noise_buf_.coeffs *= mask_.cast<std::complex<double>>();
}

SpectralFieldD GalerkinSolver::drift_spectrum(const SpectralFieldD& u) {
  evaluate_drift(u);
  return drift_buf_;
}

SpectralFieldD GalerkinSolver::noise_spectrum(const SpectralFieldD& u) {
  evaluate_noise(u);
  return noise_buf_;
}

std::complex<double> GalerkinSolver::drift_coefficient(const SpectralFieldD& u, int k0, int k1) {
  evaluate_drift(u);
  return drift_buf_.coeff(k0, k1);
}

std::complex<double> GalerkinSolver::noise_coefficient(const SpectralFieldD& u, int k0, int k1) {
  evaluate_noise(u);
  return noise_buf_.coeff(k0, k1);
}

void GalerkinSolver::em_step(SpectralFieldD& u, double dW, double t_for_diagnostics) {
  if (!std::isfinite(dW)) throw std::invalid_argument("em_step: non-finite increment");
  evaluate_drift(u);
  evaluate_noise(u);
  const bool have_drift = flux_ && !flux_->is_null();
  const bool have_noise = noise_ && !noise_->is_null();
  for (std::int64_t i = 0; i < grid_.size(); ++i) {
    std::complex<double> forcing(0, 0);
    if (have_drift) forcing += drift_buf_.coeffs[i] * config_.dt;
    if (have_noise) forcing += noise_buf_.coeffs[i] * dW;
    u.coeffs[i] = decay_[i] * u.coeffs[i] + forcing / mass_[i];
  }
  double norm_sq = u.l2_norm_sq();
  if (!std::isfinite(norm_sq) || norm_sq > config_.blowup_threshold * config_.blowup_threshold)
    throw BlowUpError(t_for_diagnostics);
}

SolutionPath GalerkinSolver::simulate(const SpectralFieldD& u0, const WienerPath& fine_path,
                                      bool keep_fields) {
  config_.validate();
  const auto n_steps = config_.steps();
  double factor_real = config_.dt / fine_path.dt();
  int factor = static_cast<int>(std::llround(factor_real));
  if (factor < 1 || std::abs(factor_real - factor) > 1e-9)
    throw std::invalid_argument("simulate: solver dt must be an integer multiple of the fine dt");
  if (fine_path.horizon() < config_.horizon - 1e-12)
    throw std::invalid_argument("simulate: path horizon is shorter than the solver horizon");
  WienerPath coarse = fine_path.coarsen(factor);
  if (coarse.steps() < n_steps) throw std::invalid_argument("simulate: path too short");

  SolutionPath out;
  out.config = config_;
  out.seed = fine_path.seed();
  out.increments = coarse.increments().head(n_steps);

  SpectralFieldD u = project(u0);
  double diss = 0, h2int = 0;
  out.sup_l2_sq = u.l2_norm_sq();

  auto record = [&](Eigen::Index step, const SpectralFieldD& state) {
    out.times.push_back(step * config_.dt);
    if (keep_fields) out.snapshots.push_back(state);
    out.l2_sq.push_back(state.l2_norm_sq());
    out.h1_sq.push_back((lam_sq_ * state.coeffs.abs2()).sum());
    out.h2_sq.push_back((lam_sq_ * lam_sq_ * state.coeffs.abs2()).sum());
    out.dissipation.push_back(diss);
    out.h2_time_integral.push_back(h2int);
  };

  record(0, u);
  for (Eigen::Index i = 0; i < n_steps; ++i) {
    diss += config_.epsilon * (grad_sq_ * diss_w_ * u.coeffs.abs2()).sum();
    h2int += (lam_sq_ * lam_sq_ * diss_w_ * u.coeffs.abs2()).sum();
    em_step(u, out.increments[i], (i + 1) * config_.dt);
    out.sup_l2_sq = std::max(out.sup_l2_sq, u.l2_norm_sq());
    if ((i + 1) % config_.snapshot_every == 0) record(i + 1, u);
  }
  return out;
}

double weak_residual(const SolutionPath& path, const SpectralFieldD& testfn,
                     const FluxModel* flux, const NoiseModel* noise,
                     ResidualConvention convention) {
  if (path.config.snapshot_every != 1 || path.snapshots.empty())
    throw std::invalid_argument("weak_residual: path must be recorded at every step");
  const auto& cfg = path.config;
  GalerkinSolver solver(cfg, flux, noise);
  const TorusGrid& grid = solver.grid();
  if (testfn.grid != grid) throw std::invalid_argument("weak_residual: test function grid");

  auto lap_phi = laplacian(testfn);
  const auto n = static_cast<Eigen::Index>(path.snapshots.size()) - 1;

  double flux_term = 0, noise_term = 0, linear_term = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto& u = path.snapshots[i];
    auto fhat = solver.drift_spectrum(u);
    auto phat = solver.noise_spectrum(u);
    flux_term += spectral_inner(fhat, testfn) * cfg.dt;
    noise_term += spectral_inner(phat, testfn) * path.increments[i];
    if (convention == ResidualConvention::continuum) {
      // -eps <u, Delta phi> summed with plain left-endpoint weights
      linear_term += -cfg.epsilon * spectral_inner(u, lap_phi) * cfg.dt;
    } else {
      double acc = 0;
      for (std::int64_t k = 0; k < grid.size(); ++k) {
        double w = solver.mass_factor(k) * (1.0 - solver.decay_factor(k));
        acc += w * (u.coeffs[k] * std::conj(testfn.coeffs[k])).real();
      }
      linear_term += acc;
    }
  }

  const auto& u_end = path.snapshots.back();
  const auto& u_start = path.snapshots.front();
  double r = spectral_inner(u_end, testfn) - spectral_inner(u_start, testfn);
  r -= flux_term;
  r += linear_term;  // equals -eps int <u, Delta phi> moved to the left side
  r -= cfg.delta * (spectral_inner(u_end, lap_phi) - spectral_inner(u_start, lap_phi));
  r -= noise_term;
  return std::abs(r);
}

}  // namespace dcap
