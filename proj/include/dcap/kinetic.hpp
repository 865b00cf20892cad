#pragma once

#include <vector>

#include "dcap/galerkin.hpp"

namespace dcap {

// Sampled kinetic function h(t, x, lambda) = sign(u(t,x) - lambda) on an
// inclusive uniform lambda lattice over [-L, L], with sign(0) := +1.
// Values are stored as int8 in {-1, +1}, nonincreasing along lambda.
struct KineticField {
  std::vector<double> times;
  TorusGrid grid{1, 4};
  double L = 1;
  Eigen::ArrayXd lambda_nodes;
  // one (grid.size() x m_lambda) block per sample time
  std::vector<Eigen::Array<std::int8_t, Eigen::Dynamic, Eigen::Dynamic>> values;
  bool clipped = false;  // true when max|u| exceeded L

  int m_lambda() const { return static_cast<int>(lambda_nodes.size()); }
  double lambda_cell() const { return lambda_nodes[1] - lambda_nodes[0]; }
  // trapezoid weights on the inclusive lattice
  Eigen::ArrayXd lambda_weights() const;
};

// Build the kinetic function from physical-space sample series.
// L <= 0 selects the automatic box 1.25 * max|u| over the series.
KineticField kinetic_from_samples(const std::vector<double>& times, const TorusGrid& grid,
                                  const std::vector<Eigen::ArrayXd>& series, double L,
                                  int m_lambda);

// Convenience wrapper over a recorded spectral path.
KineticField kinetic_of(const SolutionPath& path, double L, int m_lambda);

// T_L(u)(x) = 1/2 int_{-L}^{L} h dlambda; equals clamp(u, -L, L) up to half
// a lambda cell, pointwise.
Eigen::ArrayXd truncation_reconstruct(const KineticField& h, int time_index);

// int h(t, x, lambda) rho(lambda) dlambda on the lattice.
Eigen::ArrayXd velocity_average(const KineticField& h, const Eigen::ArrayXd& rho_nodes,
                                int time_index);

struct DissipationDensity {
  std::vector<double> times;
  std::vector<Eigen::ArrayXd> density;  // eps |grad u|^2 per snapshot
  Eigen::ArrayXd bin_edges;             // m_lambda + 1 edges over [-L, L]
  Eigen::ArrayXd bin_mass;              // mass binned by the local value of u
  double total = 0;                     // eps int_0^T ||grad u||^2 dt
};

DissipationDensity dissipation_density(const SolutionPath& path, double L, int m_lambda);

// || g ||^2 in the negative-order norm on M x [-L, L]:
// sum over (k, l) of (1 + (2 pi |k|)^2 + (pi l / L)^2)^{-N} |G(k, l)|^2,
// Fourier in x and an even-extension cosine transform in lambda, both
// normalized so the weights-free sum reproduces the L2 norm.
double neg_sobolev_norm_sq(const TorusGrid& grid, double L,
                           const Eigen::ArrayXXd& g_samples, int N);
double neg_sobolev_norm_sq(const TorusGrid& grid, double L,
                           const Eigen::ArrayXXd& g_samples, int N, FourierWorkspaceD& ws);

// sup over lags tau in {spacing, 2 spacing, ..., theta} of
// int_0^{T - tau} || h(t + tau) - h(t) ||_{H^{-N}} dt.
double translation_modulus(const KineticField& h, double theta, int N);

}  // namespace dcap
