#pragma once

#include <array>
#include <vector>

#include "dcap/spectral_field.hpp"

namespace dcap {

// Discrete integral over the torus (trapezoid rule, exact for band-limited
// integrands below the aliasing threshold).
template <typename Scalar>
Scalar quadrature(const TorusGrid& grid, const Eigen::Array<Scalar, Eigen::Dynamic, 1>& samples) {
  return samples.sum() * Scalar(grid.quad_weight());
}

template <typename Scalar>
Scalar l2_inner(const TorusGrid& grid, const Eigen::Array<Scalar, Eigen::Dynamic, 1>& u,
                const Eigen::Array<Scalar, Eigen::Dynamic, 1>& v) {
  return (u * v).sum() * Scalar(grid.quad_weight());
}

// Spectral L2 pairing <u, v> = sum_k u_k conj(v_k); real for Hermitian pairs.
template <typename Scalar>
Scalar spectral_inner(const SpectralField<Scalar>& u, const SpectralField<Scalar>& v) {
  return (u.coeffs * v.coeffs.conjugate()).real().sum();
}

// ||u||^2_{H^s} = sum_k (1 + (2 pi |k|)^2)^s |u_k|^2.
template <typename Scalar>
Scalar sobolev_norm_sq(const SpectralField<Scalar>& f, double s) {
  Scalar acc = 0;
  for (std::int64_t i = 0; i < f.grid.size(); ++i) {
    double w = lambda_sq(f.grid, i);
    acc += Scalar(std::pow(w, s)) * std::norm(f.coeffs[i]);
  }
  return acc;
}

// ||grad u||^2_{L2} = sum_k (2 pi |k|)^2 |u_k|^2 (equals ||u||_{H^1}^2 - ||u||_{L2}^2).
template <typename Scalar>
Scalar grad_norm_sq(const SpectralField<Scalar>& f) {
  Scalar acc = 0;
  for (std::int64_t i = 0; i < f.grid.size(); ++i)
    acc += Scalar(two_pi * two_pi * f.grid.wavevector_sq(i)) * std::norm(f.coeffs[i]);
  return acc;
}

// Partial derivative along one axis: multiply by 2 pi i k. The unpaired
// Nyquist mode is zeroed, the standard symmetric convention for odd-order
// symbols on real fields.
template <typename Scalar>
SpectralField<Scalar> derivative(const SpectralField<Scalar>& f, int axis) {
  using Complex = std::complex<Scalar>;
  SpectralField<Scalar> out(f.grid);
  const TorusGrid& g = f.grid;
  for (std::int64_t i = 0; i < g.size(); ++i) {
    int m = g.axis_bin(i, axis);
    int k = g.wavenumber(m);
    if (m == g.n() / 2) {
      out.coeffs[i] = Complex(0, 0);
    } else {
      out.coeffs[i] = f.coeffs[i] * Complex(0, Scalar(two_pi * k));
    }
  }
  return out;
}

template <typename Scalar>
std::vector<SpectralField<Scalar>> gradient(const SpectralField<Scalar>& f) {
  std::vector<SpectralField<Scalar>> out;
  for (int axis = 0; axis < f.grid.dim(); ++axis) out.push_back(derivative(f, axis));
  return out;
}

template <typename Scalar>
SpectralField<Scalar> laplacian(const SpectralField<Scalar>& f) {
  SpectralField<Scalar> out(f.grid);
  for (std::int64_t i = 0; i < f.grid.size(); ++i)
    out.coeffs[i] = f.coeffs[i] * Scalar(-two_pi * two_pi * f.grid.wavevector_sq(i));
  return out;
}

template <typename Scalar>
SpectralField<Scalar> divergence(const std::vector<SpectralField<Scalar>>& v) {
  SpectralField<Scalar> out(v.at(0).grid);
  for (int axis = 0; axis < out.grid.dim(); ++axis) {
    auto d = derivative(v.at(axis), axis);
    out.coeffs += d.coeffs;
  }
  return out;
}

// Two-thirds rule: retain modes with |k_i| <= floor(n/3) on every axis.
inline int dealias_limit(const TorusGrid& grid) { return grid.n() / 3; }

template <typename Scalar>
bool mode_in_band(const TorusGrid& g, std::int64_t flat, int limit) {
  for (int axis = 0; axis < g.dim(); ++axis) {
    int k = g.wavenumber(g.axis_bin(flat, axis));
    if (std::abs(k) > limit) return false;
  }
  return true;
}

template <typename Scalar>
void dealias_in_place(SpectralField<Scalar>& f) {
  int limit = dealias_limit(f.grid);
  for (std::int64_t i = 0; i < f.grid.size(); ++i)
    if (!mode_in_band<Scalar>(f.grid, i, limit)) f.coeffs[i] = 0;
}

// Zero all modes with |k_i| > m on some axis (sharp spectral projection).
template <typename Scalar>
SpectralField<Scalar> truncate_modes(const SpectralField<Scalar>& f, int m) {
  SpectralField<Scalar> out = f;
  for (std::int64_t i = 0; i < f.grid.size(); ++i)
    if (!mode_in_band<Scalar>(f.grid, i, m)) out.coeffs[i] = 0;
  return out;
}

// Grid-point coordinate along one axis for every flat sample index.
inline Eigen::ArrayXd coordinate_array(const TorusGrid& grid, int axis) {
  Eigen::ArrayXd out(grid.size());
  for (std::int64_t i = 0; i < grid.size(); ++i)
    out[i] = grid.coord(grid.axis_bin(i, axis));
  return out;
}

}  // namespace dcap
