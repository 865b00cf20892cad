#pragma once

#include <cstdint>

#include <Eigen/Dense>

namespace dcap {

// Seeded Brownian increments at a fixed fine resolution. Coarse paths are
// exact partial sums of the fine increments, so every solver in a coupled
// comparison consumes the same underlying noise.
class WienerPath {
public:
  static WienerPath sample(std::uint64_t seed, double dt_fine, double horizon);

  // Sums consecutive blocks of `factor` increments; factor must divide the
  // number of fine steps.
  WienerPath coarsen(int factor) const;

  const Eigen::ArrayXd& increments() const { return increments_; }
  double dt() const { return dt_; }
  double horizon() const { return horizon_; }
  std::uint64_t seed() const { return seed_; }
  Eigen::Index steps() const { return increments_.size(); }

  double total() const { return increments_.sum(); }

private:
  WienerPath() = default;
  std::uint64_t seed_ = 0;
  double dt_ = 0;
  double horizon_ = 0;
  Eigen::ArrayXd increments_;
};

WienerPath sample_wiener(std::uint64_t seed, double dt_fine, double horizon);

}  // namespace dcap
