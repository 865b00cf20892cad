#pragma once

#include <vector>

#include "dcap/errors.hpp"
#include "dcap/flux.hpp"
#include "dcap/noise.hpp"
#include "dcap/wiener.hpp"

namespace dcap {

struct FvConfig {
  int dim = 1;
  int cells = 256;  // per axis
  double dt = 1e-3;
  double horizon = 1.0;
  double cfl = 0.45;
  int snapshot_every = 1;

  void validate() const;
  Eigen::Index steps() const;
};

// Cell averages on a uniform periodic mesh.
struct FvState {
  int dim = 1;
  int cells = 0;
  double t = 0;
  Eigen::ArrayXd values;
};

struct FvPath {
  FvConfig config;
  std::uint64_t seed = 0;
  std::vector<double> times;
  std::vector<Eigen::ArrayXd> snapshots;
};

// Operator-split pathwise scheme for the limiting conservation law:
// Engquist-Osher conservative update followed by a Milstein noise update.
class FvSolver {
public:
  FvSolver(const FvConfig& config, const FluxModel* flux, const NoiseModel* noise);

  const FvConfig& config() const { return config_; }

  void deterministic_step(Eigen::ArrayXd& u) const;
  void noise_step(Eigen::ArrayXd& u, double dW) const;
  void step(Eigen::ArrayXd& u, double dW) const {
    deterministic_step(u);
    noise_step(u, dW);
  }

  FvPath simulate(const Eigen::ArrayXd& u0, const WienerPath& fine_path,
                  bool keep_fields = true) const;

private:
  FvConfig config_;
  const FluxModel* flux_;
  const NoiseModel* noise_;
  double h_;
  // face-normal direction components, one array per axis
  std::vector<Eigen::ArrayXd> face_a_;
  Eigen::ArrayXd cx0_, cx1_;  // cell-center coordinates
};

// Conservative restriction of a band-limited field to cell averages on a
// mesh with cells_per_axis >= the spectral grid size.
Eigen::ArrayXd cell_average(const SpectralFieldD& field, int cells_per_axis);

// Spatial L1 distance between cell-average arrays of matching or divisible
// resolutions (the finer mesh is block-averaged down before comparing).
double l1_distance(const Eigen::ArrayXd& a, const Eigen::ArrayXd& b, int dim);

}  // namespace dcap
