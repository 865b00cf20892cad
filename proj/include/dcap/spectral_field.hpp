#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "dcap/torus_grid.hpp"

namespace dcap {

// Complex Fourier coefficients of a real field on the torus, in full FFT
// layout (bin m per axis holds wavenumber m or m-n). Physical fields keep
// the Hermitian symmetry coeff(-k) = conj(coeff(k)).
template <typename Scalar>
struct SpectralField {
  using Complex = std::complex<Scalar>;
  using CoeffArray = Eigen::Array<Complex, Eigen::Dynamic, 1>;

  SpectralField() : grid(1, 4) { coeffs = CoeffArray::Zero(4); }
  explicit SpectralField(const TorusGrid& g) : grid(g) {
    coeffs = CoeffArray::Zero(g.size());
  }

  TorusGrid grid;
  CoeffArray coeffs;

  Complex coeff(int k0, int k1 = 0) const {
    return coeffs[grid.flat(grid.bin(k0), grid.dim() == 2 ? grid.bin(k1) : 0)];
  }
  Complex& coeff(int k0, int k1 = 0) {
    return coeffs[grid.flat(grid.bin(k0), grid.dim() == 2 ? grid.bin(k1) : 0)];
  }

  Scalar l2_norm_sq() const { return coeffs.abs2().sum(); }
};

using SpectralFieldD = SpectralField<double>;

template <typename Scalar>
Scalar hermitian_defect(const SpectralField<Scalar>& f) {
  Scalar worst = 0;
  const auto& g = f.grid;
  for (std::int64_t i = 0; i < g.size(); ++i) {
    int m0 = g.axis_bin(i, 0);
    int m1 = g.dim() == 2 ? g.axis_bin(i, 1) : 0;
    int c0 = (g.n() - m0) % g.n();
    int c1 = (g.n() - m1) % g.n();
    auto mirror = f.coeffs[g.flat(c0, c1)];
    worst = std::max(worst, std::abs(f.coeffs[i] - std::conj(mirror)));
  }
  return worst;
}

template <typename Scalar>
bool is_hermitian(const SpectralField<Scalar>& f, Scalar tol = Scalar(1e-12)) {
  return hermitian_defect(f) <= tol;
}

// FFT plans and scratch buffers for one grid family. Not safe to share
// across threads; each worker owns one.
template <typename Scalar>
class FourierWorkspace {
public:
  using Complex = std::complex<Scalar>;
  using RealArray = Eigen::Array<Scalar, Eigen::Dynamic, 1>;
  using CoeffArray = Eigen::Array<Complex, Eigen::Dynamic, 1>;

  FourierWorkspace() { fft_.SetFlag(Eigen::FFT<Scalar>::Unscaled); }

  // Analysis: coefficients of the trigonometric interpolant,
  // u_hat(k) = n^{-d} sum_j u(x_j) e^{-2 pi i k x_j}.
  SpectralField<Scalar> forward(const TorusGrid& grid, const RealArray& samples) {
    if (samples.size() != grid.size())
      throw std::invalid_argument("forward_transform: sample count does not match grid");
    SpectralField<Scalar> out(grid);
    buf_.resize(grid.size());
    for (std::int64_t i = 0; i < grid.size(); ++i) buf_[i] = Complex(samples[i], 0);
    dft(grid, buf_, /*inverse=*/false);
    out.coeffs = Eigen::Map<const CoeffArray>(buf_.data(), grid.size()) *
                 Complex(Scalar(grid.quad_weight()), 0);
    return out;
  }

  // Synthesis: u(x_j) = sum_k u_hat(k) e^{+2 pi i k x_j}. Real part is
  // returned; for Hermitian inputs the imaginary part is roundoff.
  RealArray inverse(const SpectralField<Scalar>& field) {
    const TorusGrid& grid = field.grid;
    buf_.assign(field.coeffs.data(), field.coeffs.data() + grid.size());
    dft(grid, buf_, /*inverse=*/true);
    RealArray out(grid.size());
    for (std::int64_t i = 0; i < grid.size(); ++i) out[i] = buf_[i].real();
    return out;
  }

  // Unnormalized synthesis of an arbitrary complex spectrum (used by the
  // conservative restriction onto finite-volume meshes).
  void synthesize(const TorusGrid& grid, std::vector<Complex>& spectrum) {
    dft(grid, spectrum, /*inverse=*/true);
  }

private:
  void dft(const TorusGrid& grid, std::vector<Complex>& data, bool inverse) {
    const int n = grid.n();
    if (grid.dim() == 1) {
      line_.resize(n);
      if (inverse)
        fft_.inv(line_.data(), data.data(), n);
      else
        fft_.fwd(line_.data(), data.data(), n);
      data.assign(line_.begin(), line_.end());
      return;
    }
    // Row-column decomposition: axis 1 (contiguous rows), then axis 0.
    line_.resize(n);
    for (int r = 0; r < n; ++r) {
      Complex* row = data.data() + static_cast<std::int64_t>(r) * n;
      if (inverse)
        fft_.inv(line_.data(), row, n);
      else
        fft_.fwd(line_.data(), row, n);
      std::copy(line_.begin(), line_.end(), row);
    }
    col_.resize(n);
    for (int c = 0; c < n; ++c) {
      for (int r = 0; r < n; ++r) col_[r] = data[static_cast<std::int64_t>(r) * n + c];
      if (inverse)
        fft_.inv(line_.data(), col_.data(), n);
      else
        fft_.fwd(line_.data(), col_.data(), n);
      for (int r = 0; r < n; ++r) data[static_cast<std::int64_t>(r) * n + c] = line_[r];
    }
  }

  Eigen::FFT<Scalar> fft_;
  std::vector<Complex> buf_;
  std::vector<Complex> line_;
  std::vector<Complex> col_;
};

using FourierWorkspaceD = FourierWorkspace<double>;

}  // namespace dcap
