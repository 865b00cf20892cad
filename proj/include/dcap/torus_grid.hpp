#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace dcap {

inline constexpr double two_pi = 6.283185307179586476925286766559;

// Uniform periodic lattice on the unit torus [0,1)^d, d in {1,2}.
// Grid points are x_j = j/n per axis; the quadrature weight n^{-d} makes
// the discrete integral of the constant 1 equal to the torus volume 1.
class TorusGrid {
public:
  TorusGrid(int dim, int n_per_axis) : dim_(dim), n_(n_per_axis) {
    if (dim != 1 && dim != 2)
      throw std::invalid_argument("TorusGrid: dim must be 1 or 2");
    if (n_per_axis < 4 || n_per_axis % 2 != 0)
      throw std::invalid_argument("TorusGrid: n_per_axis must be even and >= 4");
  }

  int dim() const { return dim_; }
  int n() const { return n_; }
  std::int64_t size() const {
    return dim_ == 1 ? n_ : static_cast<std::int64_t>(n_) * n_;
  }
  double quad_weight() const { return dim_ == 1 ? 1.0 / n_ : 1.0 / (static_cast<double>(n_) * n_); }

  // Signed wavenumber of FFT bin m in [0,n): 0,1,...,n/2-1,-n/2,...,-1.
  int wavenumber(int m) const { return m <= n_ / 2 - 1 ? m : m - n_; }
  // FFT bin of a signed wavenumber k with |k| <= n/2.
  int bin(int k) const { return k >= 0 ? k : k + n_; }

  // Flat index decomposition, row-major over axes.
  int axis_bin(std::int64_t flat, int axis) const {
    return dim_ == 1 ? static_cast<int>(flat)
                     : (axis == 0 ? static_cast<int>(flat / n_) : static_cast<int>(flat % n_));
  }
  std::int64_t flat(int m0, int m1 = 0) const {
    return dim_ == 1 ? m0 : static_cast<std::int64_t>(m0) * n_ + m1;
  }

  // |k|^2 of the signed wavevector at a flat spectral index.
  double wavevector_sq(std::int64_t flat) const {
    if (dim_ == 1) {
      double k = wavenumber(static_cast<int>(flat));
      return k * k;
    }
    double k0 = wavenumber(axis_bin(flat, 0));
    double k1 = wavenumber(axis_bin(flat, 1));
    return k0 * k0 + k1 * k1;
  }

  // Coordinate of grid point j along an axis.
  double coord(int j) const { return static_cast<double>(j) / n_; }

  bool operator==(const TorusGrid& o) const { return dim_ == o.dim_ && n_ == o.n_; }
  bool operator!=(const TorusGrid& o) const { return !(*this == o); }

private:
  int dim_;
  int n_;
};

// Eigenvalue of Lambda^2 = I - Laplacian on the mode with signed wavevector k:
// 1 + (2 pi)^2 |k|^2. Equals 1 exactly for k = 0.
inline double lambda_sq(const TorusGrid& grid, std::int64_t flat_index) {
  return 1.0 + two_pi * two_pi * grid.wavevector_sq(flat_index);
}

inline double lambda_sq_of_wavevector(double k_sq) { return 1.0 + two_pi * two_pi * k_sq; }

}  // namespace dcap
