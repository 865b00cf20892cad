#include "dcap/finite_volume.hpp"

#include <cmath>
#include <stdexcept>

namespace dcap {

void FvConfig::validate() const {
  if (dim != 1 && dim != 2) throw std::invalid_argument("fv.dim must be 1 or 2");
  if (cells < 4) throw std::invalid_argument("fv.cells must be >= 4");
  if (!(dt > 0) || !(horizon > 0)) throw std::invalid_argument("fv.dt and fv.horizon must be positive");
  double steps_real = horizon / dt;
  auto n = static_cast<Eigen::Index>(std::llround(steps_real));
  if (n < 1 || std::abs(steps_real - static_cast<double>(n)) > 1e-9 * steps_real)
    throw std::invalid_argument("fv.horizon must be an integer multiple of fv.dt");
  if (snapshot_every < 1 || n % snapshot_every != 0)
    throw std::invalid_argument("fv.snapshot_every must divide the step count");
}

Eigen::Index FvConfig::steps() const {
  return static_cast<Eigen::Index>(std::llround(horizon / dt));
}

FvSolver::FvSolver(const FvConfig& config, const FluxModel* flux, const NoiseModel* noise)
    : config_(config), flux_(flux), noise_(noise), h_(1.0 / config.cells) {
  config_.validate();
  const int n = config_.cells;
  const bool have_flux = flux_ && !flux_->is_null();
  if (have_flux) {
    if (flux_->grid().dim() != config_.dim)
      throw std::invalid_argument("FvSolver: flux dimension mismatch");
    double max_speed = flux_->lipschitz_bound();
    if (max_speed > 0 && config_.dt > config_.cfl * h_ / max_speed)
      throw std::invalid_argument(
          "fv.dt violates the CFL condition dt <= cfl * h / max|f'| (max|f'| = " +
          std::to_string(max_speed) + ")");
    // face-normal direction samples: axis 0 faces at (i0 h, (i1+1/2) h), etc.
    if (config_.dim == 1) {
      Eigen::ArrayXd a(n);
      for (int i = 0; i < n; ++i) a[i] = flux_->direction_at(i * h_)[0];
      face_a_.push_back(a);
    } else {
      Eigen::ArrayXd a0(static_cast<Eigen::Index>(n) * n), a1(static_cast<Eigen::Index>(n) * n);
      for (int i0 = 0; i0 < n; ++i0)
        for (int i1 = 0; i1 < n; ++i1) {
          a0[static_cast<Eigen::Index>(i0) * n + i1] =
              flux_->direction_at(i0 * h_, (i1 + 0.5) * h_)[0];
          a1[static_cast<Eigen::Index>(i0) * n + i1] =
              flux_->direction_at((i0 + 0.5) * h_, i1 * h_)[1];
        }
      face_a_ = {a0, a1};
    }
  }
  const auto size = config_.dim == 1 ? Eigen::Index(n) : Eigen::Index(n) * n;
  cx0_.resize(size);
  cx1_.resize(size);
  for (Eigen::Index i = 0; i < size; ++i) {
    if (config_.dim == 1) {
      cx0_[i] = (static_cast<double>(i) + 0.5) * h_;
      cx1_[i] = 0;
    } else {
      cx0_[i] = (static_cast<double>(i / n) + 0.5) * h_;
      cx1_[i] = (static_cast<double>(i % n) + 0.5) * h_;
    }
  }
}

namespace {

// Engquist-Osher numerical flux for q(u) = a g(u) through one face.
inline double eo_flux(double a, double uL, double uR, const FluxProfile& p) {
  double pos = a >= 0 ? a * p.eo_pos(uL) : a * p.eo_neg(uL);
  double neg = a >= 0 ? a * p.eo_neg(uR) : a * p.eo_pos(uR);
  return a * p.g(0.0) + pos + neg;
}

}  // namespace

void FvSolver::deterministic_step(Eigen::ArrayXd& u) const {
  const bool have_flux = flux_ && !flux_->is_null();
  if (!have_flux) return;
  const int n = config_.cells;
  const FluxProfile& p = flux_->profile();
  const double lam = config_.dt / h_;
  if (config_.dim == 1) {
    const auto& a = face_a_[0];
    Eigen::ArrayXd face(n);
    for (int i = 0; i < n; ++i) {
      int left = (i + n - 1) % n;
      face[i] = eo_flux(a[i], u[left], u[i], p);
    }
    for (int i = 0; i < n; ++i) {
      int right = (i + 1) % n;
      u[i] -= lam * (face[right] - face[i]);
    }
    return;
  }
  Eigen::ArrayXd f0(u.size()), f1(u.size());
  auto idx = [n](int i0, int i1) {
    return static_cast<Eigen::Index>((i0 + n) % n) * n + (i1 + n) % n;
  };
  for (int i0 = 0; i0 < n; ++i0)
    for (int i1 = 0; i1 < n; ++i1) {
      f0[idx(i0, i1)] = eo_flux(face_a_[0][idx(i0, i1)], u[idx(i0 - 1, i1)], u[idx(i0, i1)], p);
      f1[idx(i0, i1)] = eo_flux(face_a_[1][idx(i0, i1)], u[idx(i0, i1 - 1)], u[idx(i0, i1)], p);
    }
  for (int i0 = 0; i0 < n; ++i0)
    for (int i1 = 0; i1 < n; ++i1)
      u[idx(i0, i1)] -= lam * (f0[idx(i0 + 1, i1)] - f0[idx(i0, i1)] + f1[idx(i0, i1 + 1)] -
                               f1[idx(i0, i1)]);
}

void FvSolver::noise_step(Eigen::ArrayXd& u, double dW) const {
  if (!noise_ || noise_->is_null()) return;
  const double corr = 0.5 * (dW * dW - config_.dt);
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    double phi = noise_->phi(cx0_[i], cx1_[i], u[i]);
    double dphi = noise_->dphi(cx0_[i], cx1_[i], u[i]);
    u[i] += phi * dW + phi * dphi * corr;
  }
}

FvPath FvSolver::simulate(const Eigen::ArrayXd& u0, const WienerPath& fine_path,
                          bool keep_fields) const {
  const auto n_steps = config_.steps();
  double factor_real = config_.dt / fine_path.dt();
  int factor = static_cast<int>(std::llround(factor_real));
  if (factor < 1 || std::abs(factor_real - factor) > 1e-9)
    throw std::invalid_argument("fv: dt must be an integer multiple of the fine dt");
  WienerPath coarse = fine_path.coarsen(factor);
  if (coarse.steps() < n_steps) throw std::invalid_argument("fv: path too short");

  const auto size = config_.dim == 1 ? Eigen::Index(config_.cells)
                                     : Eigen::Index(config_.cells) * config_.cells;
  if (u0.size() != size) throw std::invalid_argument("fv: initial data size mismatch");

  FvPath out;
  out.config = config_;
  out.seed = fine_path.seed();
  Eigen::ArrayXd u = u0;
  out.times.push_back(0.0);
  if (keep_fields) out.snapshots.push_back(u);
  for (Eigen::Index i = 0; i < n_steps; ++i) {
    deterministic_step(u);
    noise_step(u, coarse.increments()[i]);
    if (!u.isFinite().all())
      throw BlowUpError((i + 1) * config_.dt);
    if ((i + 1) % config_.snapshot_every == 0) {
      out.times.push_back((i + 1) * config_.dt);
      if (keep_fields) out.snapshots.push_back(u);
    }
  }
  return out;
}

Eigen::ArrayXd cell_average(const SpectralFieldD& field, int cells_per_axis) {
  const TorusGrid& g = field.grid;
  const int nc = cells_per_axis;
  if (nc < g.n())
    throw std::invalid_argument("cell_average: mesh must be at least as fine as the spectral grid");
  const double h = 1.0 / nc;
  TorusGrid target(g.dim(), nc);
  std::vector<std::complex<double>> spec(target.size(), std::complex<double>(0, 0));
  auto axis_factor = [&](int k) {
    if (k == 0) return std::complex<double>(1, 0);
    double z = M_PI * k * h;
    return std::polar(std::sin(z) / z, z);
  };
  for (std::int64_t i = 0; i < g.size(); ++i) {
    if (field.coeffs[i] == std::complex<double>(0, 0)) continue;
    int k0 = g.wavenumber(g.axis_bin(i, 0));
    std::complex<double> c = field.coeffs[i] * axis_factor(k0);
    std::int64_t t;
    if (g.dim() == 1) {
      t = target.bin(k0);
    } else {
      int k1 = g.wavenumber(g.axis_bin(i, 1));
      c *= axis_factor(k1);
      t = target.flat(target.bin(k0), target.bin(k1));
    }
    spec[t] = c;
  }
  FourierWorkspaceD ws;
  ws.synthesize(target, spec);
  Eigen::ArrayXd out(target.size());
  for (std::int64_t i = 0; i < target.size(); ++i) out[i] = spec[i].real();
  return out;
}

namespace {

Eigen::ArrayXd block_average(const Eigen::ArrayXd& fine, int dim, int factor) {
  if (factor == 1) return fine;
  if (dim == 1) {
    Eigen::ArrayXd out(fine.size() / factor);
    for (Eigen::Index i = 0; i < out.size(); ++i) {
      double acc = 0;
      for (int j = 0; j < factor; ++j) acc += fine[i * factor + j];
      out[i] = acc / factor;
    }
    return out;
  }
  auto nf = static_cast<int>(std::llround(std::sqrt(static_cast<double>(fine.size()))));
  int nc = nf / factor;
  Eigen::ArrayXd out(static_cast<Eigen::Index>(nc) * nc);
  for (int i0 = 0; i0 < nc; ++i0)
    for (int i1 = 0; i1 < nc; ++i1) {
      double acc = 0;
      for (int j0 = 0; j0 < factor; ++j0)
        for (int j1 = 0; j1 < factor; ++j1)
          acc += fine[static_cast<Eigen::Index>(i0 * factor + j0) * nf + i1 * factor + j1];
      out[static_cast<Eigen::Index>(i0) * nc + i1] = acc / (factor * factor);
    }
  return out;
}

}  // namespace

double l1_distance(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b, int dim) {
  if (a.size() == b.size()) return (a - b).abs().mean();
  const Eigen::ArrayXd& fine = a.size() > b.size() ? a : b;
  const Eigen::ArrayXd& coarse = a.size() > b.size() ? b : a;
  double per_axis = dim == 1 ? static_cast<double>(fine.size()) / coarse.size()
                             : std::sqrt(static_cast<double>(fine.size()) / coarse.size());
  int factor = static_cast<int>(std::llround(per_axis));
  double check = dim == 1 ? static_cast<double>(coarse.size()) * factor
                          : static_cast<double>(coarse.size()) * factor * factor;
  if (factor < 1 || std::llround(check) != fine.size())
    throw std::invalid_argument("l1_distance: mesh sizes are not nested");
  return (block_average(fine, dim, factor) - coarse).abs().mean();
}

}  // namespace dcap
