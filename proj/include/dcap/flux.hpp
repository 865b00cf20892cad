#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "dcap/spectral_field.hpp"
#include "dcap/spectral_ops.hpp"

namespace dcap {

// Scalar profile g(lambda) of a separable flux a(x) g(lambda), with the
// antiderivative splitting of g' needed by the Engquist-Osher flux.
struct FluxProfile {
  std::string name;
  std::function<double(double)> g;
  std::function<double(double)> dg;
  // eo_pos(u) = int_0^u max(g'(s),0) ds, eo_neg(u) = int_0^u min(g'(s),0) ds
  std::function<double(double)> eo_pos;
  std::function<double(double)> eo_neg;

  static FluxProfile quadratic();  // g = lambda^2 / 2
  static FluxProfile linear();     // g = lambda
  static FluxProfile zero();
};

// Separable geometry-compatible flux f(x,lambda) = a(x) g(lambda) on the
// torus. The direction field a is stored as the band-limited interpolant of
// its samples; in 2D it is the perpendicular gradient of a stream function,
// so its spectral divergence vanishes identically.
class FluxModel {
public:
  static FluxModel none(const TorusGrid& grid);
  static FluxModel constant_direction_1d(const TorusGrid& grid, double a, FluxProfile profile,
                                         double lambda_box = 2.5);
  static FluxModel from_stream_function(const TorusGrid& grid, const Eigen::ArrayXd& psi_samples,
                                        FluxProfile profile, double lambda_box = 2.5);
  // Presets: burgers1d, linear1d, stream2d-smooth, stream2d-rough, none.
  static FluxModel preset(const std::string& name, const TorusGrid& grid, double amplitude = 1.0,
                          double lambda_box = 2.5);

  bool is_null() const { return null_; }
  const TorusGrid& grid() const { return grid_; }
  const FluxProfile& profile() const { return profile_; }
  int components() const { return static_cast<int>(direction_.size()); }
  const Eigen::ArrayXd& direction_samples(int axis) const { return direction_.at(axis); }
  const SpectralFieldD& direction_spectrum(int axis) const { return direction_hat_.at(axis); }

  // Band-limited interpolant of the direction field at an arbitrary point.
  Eigen::Vector2d direction_at(double x0, double x1 = 0.0) const;

  double lambda_box() const { return lambda_box_; }
  double lipschitz_bound() const { return lipschitz_bound_; }  // sup |a| |g'| over the box
  double growth_bound() const { return growth_bound_; }        // |f| <= C (1 + |lambda|)
  // || sup_lambda |f(.,lambda)| ||_{L^2(M)} over the validation box
  double sup_profile_l2() const { return sup_profile_l2_; }
  double regularization_width() const { return sigma_reg_; }
  double max_direction_norm() const { return max_dir_norm_; }

private:
  FluxModel(const TorusGrid& grid) : grid_(grid) {}
  void finalize_from_spectra(FourierWorkspaceD& ws);
  void compute_bounds();

  TorusGrid grid_;
  bool null_ = false;
  std::vector<Eigen::ArrayXd> direction_;
  std::vector<SpectralFieldD> direction_hat_;
  FluxProfile profile_;
  double lambda_box_ = 2.5;
  double sigma_reg_ = 0.0;
  double lipschitz_bound_ = 0.0;
  double growth_bound_ = 0.0;
  double sup_profile_l2_ = 0.0;
  double max_dir_norm_ = 0.0;

  friend FluxModel mollify(const FluxModel&, double);
};

// Max over the grid and a lambda lattice of |div f(x,lambda)|, computed
// spectrally.
double max_divergence(const FluxModel& flux, int lambda_nodes = 33);

// | int_M <f(x,u), grad u> dV | for a given band-limited field u; vanishes
// for geometry-compatible fluxes up to quadrature aliasing.
double stokes_residual(const FluxModel& flux, const SpectralFieldD& u, FourierWorkspaceD& ws);

// Gaussian mollification of the direction field in Fourier space by the
// multiplier exp(-sigma^2 |2 pi k|^2 / 2). Preserves div a = 0 exactly.
FluxModel mollify(const FluxModel& flux, double sigma);

// f_k with mollification width sigma0 * 2^{-k_level}.
FluxModel regularize(const FluxModel& flux, int k_level, double sigma0 = 0.1);

// || sup_lambda |f - f_k| ||_{L^1(M)} over the validation box.
double flux_l1_gap(const FluxModel& f, const FluxModel& fk);

struct NondegeneracyResult {
  double measure = 0;        // integral over x of the sup thickened level-set measure
  double worst_fraction = 0; // measure / |Lambda|, 1.0 flags a degenerate symbol
};

// Thickened-level-set estimator for the non-degeneracy of the flux symbol
// xi_0 + <a(x), xi'> g'(lambda). Directions are sampled on the unit sphere
// restricted to |xi'| >= min_xi_prime; the sup over the level C is exact
// (sliding window over sorted symbol values on the lambda lattice).
NondegeneracyResult nondegeneracy_measure(const FluxModel& flux, double lambda_min,
                                          double lambda_max, double eta, int direction_samples,
                                          int lambda_nodes, double min_xi_prime = 0.1);

}  // namespace dcap
