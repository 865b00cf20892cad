#include "dcap/kinetic.hpp"

#include <cmath>
#include <stdexcept>

namespace dcap {

Eigen::ArrayXd KineticField::lambda_weights() const {
  const int m = m_lambda();
  Eigen::ArrayXd w = Eigen::ArrayXd::Constant(m, lambda_cell());
  w[0] *= 0.5;
  w[m - 1] *= 0.5;
  return w;
}

KineticField kinetic_from_samples(const std::vector<double>& times, const TorusGrid& grid,
                                  const std::vector<Eigen::ArrayXd>& series, double L,
                                  int m_lambda) {
  if (m_lambda < 3) throw std::invalid_argument("kinetic: m_lambda must be >= 3");
  if (times.size() != series.size() || series.empty())
    throw std::invalid_argument("kinetic: times and samples disagree");

  double umax = 0;
  for (const auto& s : series) umax = std::max(umax, s.abs().maxCoeff());
  KineticField h;
  h.times = times;
  h.grid = grid;
  h.L = L > 0 ? L : 1.25 * std::max(umax, 1e-12);
  h.clipped = umax > h.L;
  h.lambda_nodes = Eigen::ArrayXd::LinSpaced(m_lambda, -h.L, h.L);
  h.values.reserve(series.size());
  for (const auto& s : series) {
    Eigen::Array<std::int8_t, Eigen::Dynamic, Eigen::Dynamic> block(grid.size(), m_lambda);
    for (Eigen::Index x = 0; x < s.size(); ++x)
      for (int l = 0; l < m_lambda; ++l)
        block(x, l) = s[x] >= h.lambda_nodes[l] ? std::int8_t(1) : std::int8_t(-1);
    h.values.push_back(std::move(block));
  }
  return h;
}

KineticField kinetic_of(const SolutionPath& path, double L, int m_lambda) {
  if (path.snapshots.empty())
    throw std::invalid_argument("kinetic_of: path must keep its snapshot fields");
  FourierWorkspaceD ws;
  std::vector<Eigen::ArrayXd> series;
  series.reserve(path.snapshots.size());
  for (const auto& f : path.snapshots) series.push_back(ws.inverse(f));
  return kinetic_from_samples(path.times, path.snapshots.front().grid, series, L, m_lambda);
}

Eigen::ArrayXd truncation_reconstruct(const KineticField& h, int time_index) {
  Eigen::ArrayXd w = h.lambda_weights();
  const auto& block = h.values.at(time_index);
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(block.rows());
  for (int l = 0; l < h.m_lambda(); ++l)
    out += 0.5 * w[l] * block.col(l).cast<double>();
  return out;
}

Eigen::ArrayXd velocity_average(const KineticField& h, const Eigen::ArrayXd& rho_nodes,
                                int time_index) {
  if (rho_nodes.size() != h.m_lambda())
    throw std::invalid_argument("velocity_average: rho sampled on a different lattice");
  Eigen::ArrayXd w = h.lambda_weights();
  const auto& block = h.values.at(time_index);
  Eigen::ArrayXd out = Eigen::ArrayXd::Zero(block.rows());
  for (int l = 0; l < h.m_lambda(); ++l)
    out += w[l] * rho_nodes[l] * block.col(l).cast<double>();
  return out;
}

DissipationDensity dissipation_density(const SolutionPath& path, double L, int m_lambda) {
  if (path.snapshots.empty())
    throw std::invalid_argument("dissipation_density: path must keep its snapshot fields");
  if (m_lambda < 2) throw std::invalid_argument("dissipation_density: need at least two bins");
  const TorusGrid& grid = path.snapshots.front().grid;
  FourierWorkspaceD ws;

  DissipationDensity out;
  out.times = path.times;
  double umax = 0;
  std::vector<Eigen::ArrayXd> phys;
  for (const auto& f : path.snapshots) {
    phys.push_back(ws.inverse(f));
    umax = std::max(umax, phys.back().abs().maxCoeff());
  }
  double box = L > 0 ? L : 1.25 * std::max(umax, 1e-12);
  out.bin_edges = Eigen::ArrayXd::LinSpaced(m_lambda + 1, -box, box);
  out.bin_mass = Eigen::ArrayXd::Zero(m_lambda);

  const double eps = path.config.epsilon;
  for (std::size_t t = 0; t < path.snapshots.size(); ++t) {
    auto grad = gradient(path.snapshots[t]);
    Eigen::ArrayXd d = Eigen::ArrayXd::Zero(grid.size());
    for (const auto& comp : grad) {
      Eigen::ArrayXd dp = ws.inverse(comp);
      d += dp * dp;
    }
    d *= eps;
    out.density.push_back(d);
  }
  // left-endpoint time quadrature with the snapshot spacing
  double dt_snap = out.times.size() > 1 ? out.times[1] - out.times[0] : 0;
  const double wq = grid.quad_weight();
  for (std::size_t t = 0; t + 1 < out.density.size(); ++t) {
    const auto& d = out.density[t];
    const auto& u = phys[t];
    for (Eigen::Index x = 0; x < d.size(); ++x) {
      double pos = (u[x] + box) / (2 * box) * m_lambda;
      int bin = std::clamp(static_cast<int>(std::floor(pos)), 0, m_lambda - 1);
      out.bin_mass[bin] += d[x] * wq * dt_snap;
    }
  }
  out.total = out.bin_mass.sum();
  return out;
}

namespace {

// Orthonormal even-extension cosine basis on the inclusive lattice,
// weighted by the trapezoid rule; rows are the analysis functionals.
Eigen::MatrixXd cosine_analysis_matrix(int m, double L) {
  const double cell = 2.0 * L / (m - 1);
  Eigen::VectorXd w = Eigen::VectorXd::Constant(m, cell);
  w[0] *= 0.5;
  w[m - 1] *= 0.5;
  Eigen::MatrixXd B(m, m);
  for (int l = 0; l < m; ++l) {
    double norm = (l == 0 || l == m - 1) ? 1.0 / std::sqrt(2.0 * L) : 1.0 / std::sqrt(L);
    for (int j = 0; j < m; ++j)
      B(l, j) = norm * std::cos(M_PI * l * j / (m - 1)) * w[j];
  }
  return B;
}

}  // namespace

double neg_sobolev_norm_sq(const TorusGrid& grid, double L, const Eigen::ArrayXXd& g_samples,
                           int N, FourierWorkspaceD& ws) {
  const int m = static_cast<int>(g_samples.cols());
  if (g_samples.rows() != grid.size())
    throw std::invalid_argument("neg_sobolev_norm_sq: sample rows must match the grid");
  if (m < 2 || !(L > 0)) throw std::invalid_argument("neg_sobolev_norm_sq: bad lambda box");

  Eigen::MatrixXd B = cosine_analysis_matrix(m, L);
  // lambda transform: rows x, columns l
  Eigen::MatrixXd lam_coeffs = g_samples.matrix() * B.transpose();

  double acc = 0;
  Eigen::ArrayXd slice(grid.size());
  for (int l = 0; l < m; ++l) {
    slice = lam_coeffs.col(l).array();
    auto hat = ws.forward(grid, slice);
    double wl = M_PI * l / L;
    for (std::int64_t k = 0; k < grid.size(); ++k) {
      double weight = 1.0 + two_pi * two_pi * grid.wavevector_sq(k) + wl * wl;
      acc += std::pow(weight, -N) * std::norm(hat.coeffs[k]);
    }
  }
  return acc;
}

double neg_sobolev_norm_sq(const TorusGrid& grid, double L, const Eigen::ArrayXXd& g_samples,
                           int N) {
  FourierWorkspaceD ws;
  return neg_sobolev_norm_sq(grid, L, g_samples, N, ws);
}

double translation_modulus(const KineticField& h, double theta, int N) {
  if (theta == 0) return 0.0;
  if (h.times.size() < 2) throw std::invalid_argument("translation_modulus: need >= 2 snapshots");
  const double spacing = h.times[1] - h.times[0];
  const double horizon = h.times.back();
  if (theta > horizon + 1e-12)
    throw std::invalid_argument("translation_modulus: theta exceeds the horizon");
  double lags_real = theta / spacing;
  int lags = static_cast<int>(std::llround(lags_real));
  if (lags < 1 || std::abs(lags_real - lags) > 1e-9)
    throw std::invalid_argument("translation_modulus: theta must be a multiple of the spacing");

  FourierWorkspaceD ws;
  const auto n_times = static_cast<int>(h.times.size());
  double sup = 0;
  for (int p = 1; p <= lags; ++p) {
    double integral = 0;
    for (int i = 0; i + p < n_times; ++i) {
      Eigen::ArrayXXd diff = h.values[i + p].cast<double>() - h.values[i].cast<double>();
      integral += std::sqrt(neg_sobolev_norm_sq(h.grid, h.L, diff, N, ws)) * spacing;
    }
    sup = std::max(sup, integral);
  }
  return sup;
}

}  // namespace dcap
