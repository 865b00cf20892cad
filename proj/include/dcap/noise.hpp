#pragma once

#include <functional>
#include <string>

#include "dcap/spectral_ops.hpp"

namespace dcap {

// Multiplicative noise amplitude Phi(x, lambda) and its lambda-derivative.
// Points are passed as (x0, x1); x1 is ignored in one dimension.
class NoiseModel {
public:
  // Presets: none, noise-const, noise-linear, noise-bounded.
  static NoiseModel preset(const std::string& name, double amplitude);

  double phi(double x0, double x1, double lambda) const { return phi_(x0, x1, lambda); }
  double dphi(double x0, double x1, double lambda) const { return dphi_(x0, x1, lambda); }

  bool is_null() const { return null_; }
  bool lambda_dependent() const { return lambda_dependent_; }
  double linear_growth_const() const { return linear_growth_const_; }  // C with |Phi| <= C(1+|l|)
  double sup_bound_l2() const { return sup_bound_l2_; }  // ||sup_l |Phi|||_{L2}, 0 if unbounded
  const std::string& name() const { return name_; }

  // Largest |Phi(x,l)| / (1+|l|) over a validation lattice; callers compare
  // against linear_growth_const().
  double validate_growth(const TorusGrid& grid, double lambda_box, int lambda_nodes = 65) const;

private:
  std::string name_;
  std::function<double(double, double, double)> phi_;
  std::function<double(double, double, double)> dphi_;
  bool null_ = false;
  bool lambda_dependent_ = true;
  double linear_growth_const_ = 0;
  double sup_bound_l2_ = 0;
};

}  // namespace dcap
