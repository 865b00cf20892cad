#include "dcap/flux.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dcap {

FluxProfile FluxProfile::quadratic() {
  FluxProfile p;
  p.name = "quadratic";
  p.g = [](double l) { return 0.5 * l * l; };
  p.dg = [](double l) { return l; };
  p.eo_pos = [](double u) { double v = std::max(u, 0.0); return 0.5 * v * v; };
  p.eo_neg = [](double u) { double v = std::min(u, 0.0); return 0.5 * v * v; };
  return p;
}

FluxProfile FluxProfile::linear() {
  FluxProfile p;
  p.name = "linear";
  p.g = [](double l) { return l; };
  p.dg = [](double) { return 1.0; };
  p.eo_pos = [](double u) { return u; };
  p.eo_neg = [](double) { return 0.0; };
  return p;
}

FluxProfile FluxProfile::zero() {
  FluxProfile p;
  p.name = "zero";
  p.g = [](double) { return 0.0; };
  p.dg = [](double) { return 0.0; };
  p.eo_pos = [](double) { return 0.0; };
  p.eo_neg = [](double) { return 0.0; };
  return p;
}

namespace {

// Stream functions for the shipped 2D presets. Both are evaluated on the
// grid and then differentiated spectrally, so div a = 0 holds exactly for
// the band-limited interpolant either way.
double smooth_stream(double x0, double x1) {
  return std::sin(two_pi * x0) * std::sin(two_pi * x1) / two_pi;
}

double tent(double t) { return std::min(t, 1.0 - t); }

// Continuous, piecewise-linear stream function; its gradient (and hence the
// direction field) is x-discontinuous along the fold lines.
double rough_stream(double x0, double x1) { return tent(x0) * tent(x1); }

}  // namespace

void FluxModel::finalize_from_spectra(FourierWorkspaceD& ws) {
  direction_.clear();
  for (auto& hat : direction_hat_) direction_.push_back(ws.inverse(hat));
  compute_bounds();
}

void FluxModel::compute_bounds() {
  max_dir_norm_ = 0;
  if (null_) {
    lipschitz_bound_ = growth_bound_ = sup_profile_l2_ = 0;
    return;
  }
  Eigen::ArrayXd norm_sq = Eigen::ArrayXd::Zero(grid_.size());
  for (const auto& comp : direction_) norm_sq += comp * comp;
  Eigen::ArrayXd norms = norm_sq.sqrt();
  max_dir_norm_ = norms.maxCoeff();

  const int m = 513;
  double max_g = 0, max_dg = 0, growth = 0;
  for (int i = 0; i < m; ++i) {
    double l = -lambda_box_ + 2.0 * lambda_box_ * i / (m - 1);
    max_g = std::max(max_g, std::abs(profile_.g(l)));
    max_dg = std::max(max_dg, std::abs(profile_.dg(l)));
    growth = std::max(growth, std::abs(profile_.g(l)) / (1.0 + std::abs(l)));
  }
  lipschitz_bound_ = max_dir_norm_ * max_dg;
  growth_bound_ = max_dir_norm_ * growth;
  sup_profile_l2_ = max_g * std::sqrt(quadrature(grid_, norm_sq));
}

FluxModel FluxModel::none(const TorusGrid& grid) {
  FluxModel f(grid);
  f.null_ = true;
  f.profile_ = FluxProfile::zero();
  f.compute_bounds();
  return f;
}

FluxModel FluxModel::constant_direction_1d(const TorusGrid& grid, double a, FluxProfile profile,
                                           double lambda_box) {
  if (grid.dim() != 1)
    throw std::invalid_argument("constant_direction_1d: grid must be one-dimensional");
  FluxModel f(grid);
  f.profile_ = std::move(profile);
  f.lambda_box_ = lambda_box;
  SpectralFieldD hat(grid);
  hat.coeff(0) = std::complex<double>(a, 0);
  f.direction_hat_ = {hat};
  FourierWorkspaceD ws;
  f.finalize_from_spectra(ws);
  return f;
}

FluxModel FluxModel::from_stream_function(const TorusGrid& grid,
                                          const Eigen::ArrayXd& psi_samples, FluxProfile profile,
                                          double lambda_box) {
  if (grid.dim() != 2)
    throw std::invalid_argument("from_stream_function: grid must be two-dimensional");
  FluxModel f(grid);
  f.profile_ = std::move(profile);
  f.lambda_box_ = lambda_box;
  FourierWorkspaceD ws;
  auto psi = ws.forward(grid, psi_samples);
  // a = rot90(grad psi) = (-d_1 psi, d_0 psi)
  auto d0 = derivative(psi, 0);
  auto d1 = derivative(psi, 1);
  d1.coeffs *= -1.0;
  f.direction_hat_ = {d1, d0};
  f.finalize_from_spectra(ws);
  return f;
}

FluxModel FluxModel::preset(const std::string& name, const TorusGrid& grid, double amplitude,
                            double lambda_box) {
  if (name == "none") return none(grid);
  if (name == "burgers1d")
    return constant_direction_1d(grid, amplitude, FluxProfile::quadratic(), lambda_box);
  if (name == "linear1d")
    return constant_direction_1d(grid, amplitude, FluxProfile::linear(), lambda_box);
  if (name == "stream2d-smooth" || name == "stream2d-rough") {
    Eigen::ArrayXd psi(grid.size());
    for (std::int64_t i = 0; i < grid.size(); ++i) {
      double x0 = grid.coord(grid.axis_bin(i, 0));
      double x1 = grid.coord(grid.axis_bin(i, 1));
      psi[i] = amplitude *
               (name == "stream2d-smooth" ? smooth_stream(x0, x1) : rough_stream(x0, x1));
    }
    return from_stream_function(grid, psi, FluxProfile::quadratic(), lambda_box);
  }
  throw std::invalid_argument("unknown flux preset: " + name);
}

Eigen::Vector2d FluxModel::direction_at(double x0, double x1) const {
  Eigen::Vector2d out = Eigen::Vector2d::Zero();
  if (null_) return out;
  const TorusGrid& g = grid_;
  for (int axis = 0; axis < components(); ++axis) {
    const auto& hat = direction_hat_[axis];
    std::complex<double> acc(0, 0);
    for (std::int64_t i = 0; i < g.size(); ++i) {
      if (hat.coeffs[i] == std::complex<double>(0, 0)) continue;
      double k0 = g.wavenumber(g.axis_bin(i, 0));
      double phase = two_pi * k0 * x0;
      if (g.dim() == 2) {
        double k1 = g.wavenumber(g.axis_bin(i, 1));
        phase += two_pi * k1 * x1;
      }
      acc += hat.coeffs[i] * std::complex<double>(std::cos(phase), std::sin(phase));
    }
    out[axis] = acc.real();
  }
  return out;
}

double max_divergence(const FluxModel& flux, int lambda_nodes) {
  if (flux.is_null()) return 0.0;
  std::vector<SpectralFieldD> comps;
  for (int axis = 0; axis < flux.components(); ++axis)
    comps.push_back(flux.direction_spectrum(axis));
  auto div_hat = divergence(comps);
  FourierWorkspaceD ws;
  double max_div_a = ws.inverse(div_hat).abs().maxCoeff();
  double max_g = 0;
  for (int i = 0; i < lambda_nodes; ++i) {
    double l = -flux.lambda_box() + 2.0 * flux.lambda_box() * i / (lambda_nodes - 1);
    max_g = std::max(max_g, std::abs(flux.profile().g(l)));
  }
  return max_div_a * max_g;
}

double stokes_residual(const FluxModel& flux, const SpectralFieldD& u, FourierWorkspaceD& ws) {
  if (flux.is_null()) return 0.0;
  auto u_phys = ws.inverse(u);
  auto grad = gradient(u);
  double acc = 0;
  Eigen::ArrayXd integrand = Eigen::ArrayXd::Zero(u.grid.size());
  for (int axis = 0; axis < flux.components(); ++axis) {
    auto du = ws.inverse(grad[axis]);
    integrand += flux.direction_samples(axis) * du;
  }
  for (std::int64_t i = 0; i < u.grid.size(); ++i)
    acc += integrand[i] * flux.profile().g(u_phys[i]);
  return std::abs(acc * u.grid.quad_weight());
}

FluxModel mollify(const FluxModel& flux, double sigma) {
  if (flux.is_null() || sigma <= 0) return flux;
  FluxModel out = flux;
  const TorusGrid& g = flux.grid();
  for (auto& hat : out.direction_hat_) {
    for (std::int64_t i = 0; i < g.size(); ++i) {
      double ksq = two_pi * two_pi * g.wavevector_sq(i);
      hat.coeffs[i] *= std::exp(-0.5 * sigma * sigma * ksq);
    }
  }
  out.sigma_reg_ = std::sqrt(flux.regularization_width() * flux.regularization_width() +
                             sigma * sigma);
  FourierWorkspaceD ws;
  out.finalize_from_spectra(ws);
  return out;
}

FluxModel regularize(const FluxModel& flux, int k_level, double sigma0) {
  if (k_level < 0) throw std::invalid_argument("regularize: k_level must be >= 0");
  return mollify(flux, sigma0 * std::pow(2.0, -k_level));
}

double flux_l1_gap(const FluxModel& f, const FluxModel& fk) {
  if (f.is_null()) return 0.0;
  const TorusGrid& g = f.grid();
  Eigen::ArrayXd diff_sq = Eigen::ArrayXd::Zero(g.size());
  for (int axis = 0; axis < f.components(); ++axis) {
    Eigen::ArrayXd d = f.direction_samples(axis) - fk.direction_samples(axis);
    diff_sq += d * d;
  }
  const int m = 513;
  double max_g = 0;
  for (int i = 0; i < m; ++i) {
    double l = -f.lambda_box() + 2.0 * f.lambda_box() * i / (m - 1);
    max_g = std::max(max_g, std::abs(f.profile().g(l)));
  }
  return max_g * quadrature(g, diff_sq.sqrt().eval());
}

NondegeneracyResult nondegeneracy_measure(const FluxModel& flux, double lambda_min,
                                          double lambda_max, double eta, int direction_samples,
                                          int lambda_nodes, double min_xi_prime) {
  if (lambda_nodes < 2) throw std::invalid_argument("nondegeneracy_measure: empty lambda grid");
  if (eta < 0) throw std::invalid_argument("nondegeneracy_measure: eta must be >= 0");
  if (!(lambda_max > lambda_min))
    throw std::invalid_argument("nondegeneracy_measure: empty lambda interval");

  const TorusGrid& g = flux.grid();
  const int d = g.dim();
  const double dl = (lambda_max - lambda_min) / (lambda_nodes - 1);

  // Deterministic direction sample on the unit sphere in R^{d+1}, keeping
  // |xi'| >= min_xi_prime; the complement is degenerate for every flux
  // (constant symbol xi_0).
  std::vector<Eigen::Vector3d> dirs;  // (xi0, xi1[, xi2])
  if (d == 1) {
    for (int i = 0; i < direction_samples; ++i) {
      double th = M_PI * (i + 0.5) / direction_samples;
      Eigen::Vector3d v(std::cos(th), std::sin(th), 0.0);
      if (std::abs(v[1]) >= min_xi_prime) dirs.push_back(v);
    }
  } else {
    const double golden = M_PI * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < direction_samples; ++i) {
      double z = 1.0 - 2.0 * (i + 0.5) / direction_samples;
      double r = std::sqrt(std::max(0.0, 1.0 - z * z));
      double th = golden * i;
      Eigen::Vector3d v(z, r * std::cos(th), r * std::sin(th));
      if (v.segment<2>(1).norm() >= min_xi_prime) dirs.push_back(v);
    }
  }
  if (dirs.empty()) throw std::invalid_argument("nondegeneracy_measure: no admissible directions");

  Eigen::ArrayXd dg_values(lambda_nodes);
  for (int i = 0; i < lambda_nodes; ++i)
    dg_values[i] = flux.profile().dg(lambda_min + i * dl);

  std::vector<double> symbol(lambda_nodes);
  double acc = 0;
  for (std::int64_t xi = 0; xi < g.size(); ++xi) {
    double ax0 = flux.is_null() ? 0.0 : flux.direction_samples(0)[xi];
    double ax1 = (d == 2 && !flux.is_null()) ? flux.direction_samples(1)[xi] : 0.0;
    double sup = 0;
    for (const auto& v : dirs) {
      double proj = ax0 * v[1] + ax1 * v[2];  // <a(x), xi'>
      for (int i = 0; i < lambda_nodes; ++i) symbol[i] = v[0] + proj * dg_values[i];
      std::sort(symbol.begin(), symbol.end());
      // Exact sup over the level C: widest window of width 2 eta.
      int best = 1;
      int lo = 0;
      for (int hi = 0; hi < lambda_nodes; ++hi) {
        while (symbol[hi] - symbol[lo] > 2 * eta) ++lo;
        best = std::max(best, hi - lo + 1);
      }
      sup = std::max(sup, (best - 1) * dl);
      if (sup >= lambda_max - lambda_min) break;
    }
    acc += sup;
  }
  NondegeneracyResult res;
  res.measure = acc * g.quad_weight();
  res.worst_fraction = res.measure / (lambda_max - lambda_min);
  return res;
}

}  // namespace dcap
