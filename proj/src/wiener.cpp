#include "dcap/wiener.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace dcap {

WienerPath WienerPath::sample(std::uint64_t seed, double dt_fine, double horizon) {
  if (!(dt_fine > 0) || !(horizon > 0))
    throw std::invalid_argument("WienerPath: dt_fine and horizon must be positive");
  double steps_real = horizon / dt_fine;
  auto steps = static_cast<Eigen::Index>(std::llround(steps_real));
  if (steps < 1 || std::abs(steps_real - static_cast<double>(steps)) > 1e-9 * steps_real)
    throw std::invalid_argument("WienerPath: horizon must be an integer multiple of dt_fine");

  WienerPath p;
  p.seed_ = seed;
  p.dt_ = dt_fine;
  p.horizon_ = horizon;
  p.increments_.resize(steps);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, std::sqrt(dt_fine));
  for (Eigen::Index i = 0; i < steps; ++i) p.increments_[i] = normal(rng);
  return p;
}

WienerPath WienerPath::coarsen(int factor) const {
  if (factor < 1) throw std::invalid_argument("coarsen: factor must be >= 1");
  if (increments_.size() % factor != 0)
    throw std::invalid_argument("coarsen: factor does not divide the number of fine steps");
  if (factor == 1) return *this;
  WienerPath p;
  p.seed_ = seed_;
  p.dt_ = dt_ * factor;
  p.horizon_ = horizon_;
  p.increments_.resize(increments_.size() / factor);
  for (Eigen::Index i = 0; i < p.increments_.size(); ++i) {
    double acc = 0;
    for (int j = 0; j < factor; ++j) acc += increments_[i * factor + j];
    p.increments_[i] = acc;
  }
  return p;
}

WienerPath sample_wiener(std::uint64_t seed, double dt_fine, double horizon) {
  return WienerPath::sample(seed, dt_fine, horizon);
}

}  // namespace dcap
