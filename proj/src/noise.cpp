#include "dcap/noise.hpp"

#include <cmath>
#include <stdexcept>

namespace dcap {

NoiseModel NoiseModel::preset(const std::string& name, double amplitude) {
  NoiseModel m;
  m.name_ = name;
  const double c = amplitude;
  if (name == "none") {
    m.phi_ = [](double, double, double) { return 0.0; };
    m.dphi_ = [](double, double, double) { return 0.0; };
    m.null_ = true;
    m.lambda_dependent_ = false;
    m.linear_growth_const_ = 0;
    m.sup_bound_l2_ = 0;
  } else if (name == "noise-const") {
    m.phi_ = [c](double, double, double) { return c; };
    m.dphi_ = [](double, double, double) { return 0.0; };
    m.lambda_dependent_ = false;
    m.linear_growth_const_ = std::abs(c);
    m.sup_bound_l2_ = std::abs(c);
  } else if (name == "noise-linear") {
    m.phi_ = [c](double, double, double l) { return c * l; };
    m.dphi_ = [c](double, double, double) { return c; };
    m.linear_growth_const_ = std::abs(c);
    m.sup_bound_l2_ = 0;  // not bounded in lambda
  } else if (name == "noise-bounded") {
    // Phi = c sin(2 pi x0) / (1 + lambda^2): bounded uniformly in lambda
    m.phi_ = [c](double x0, double, double l) {
      return c * std::sin(two_pi * x0) / (1.0 + l * l);
    };
    m.dphi_ = [c](double x0, double, double l) {
      double d = 1.0 + l * l;
      return -2.0 * c * l * std::sin(two_pi * x0) / (d * d);
    };
    m.linear_growth_const_ = std::abs(c);
    m.sup_bound_l2_ = std::abs(c) / std::sqrt(2.0);  // ||sin(2 pi x)||_{L2}
  } else {
    throw std::invalid_argument("unknown noise preset: " + name);
  }
  return m;
}

double NoiseModel::validate_growth(const TorusGrid& grid, double lambda_box,
                                   int lambda_nodes) const {
  double worst = 0;
  for (std::int64_t i = 0; i < grid.size(); ++i) {
    double x0 = grid.coord(grid.axis_bin(i, 0));
    double x1 = grid.dim() == 2 ? grid.coord(grid.axis_bin(i, 1)) : 0.0;
    for (int j = 0; j < lambda_nodes; ++j) {
      double l = -lambda_box + 2.0 * lambda_box * j / (lambda_nodes - 1);
      worst = std::max(worst, std::abs(phi_(x0, x1, l)) / (1.0 + std::abs(l)));
    }
  }
  return worst;
}

}  // namespace dcap
