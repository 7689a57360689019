#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dgflow/common.hpp"

namespace dgflow {

// Smooth multiwell potential W : R^N -> [0, inf) with wells alpha_1..alpha_P.
// Built-in forms: the scalar quartic double well W(u) = (u^2-1)^2 and the
// product form W(u) = prod_i |u - alpha_i|^2. Custom evaluation/gradient
// pairs are accepted for experiments.
class MultiwellPotential {
 public:
  enum class Form { ScalarDoubleWell, ProductWells, Custom };

  static MultiwellPotential scalar_double_well();
  static MultiwellPotential product_wells(std::vector<Vec> wells);
  static MultiwellPotential custom(std::vector<Vec> wells, double growth_exponent,
                                   std::function<double(const Vec&)> value,
                                   std::function<Vec(const Vec&)> gradient);

  Form form() const { return form_; }
  int ambient_dim() const { return ambient_dim_; }          // N
  int well_count() const { return static_cast<int>(wells_.size()); }  // P
  const Vec& well(int i) const { return wells_[i]; }
  const std::vector<Vec>& wells() const { return wells_; }
  double growth_exponent() const { return growth_exponent_; }
  double max_well_norm() const;

  // W(u). Throws std::domain_error on non-finite input.
  double value(const Vec& u) const;
  // Analytic gradient of W.
  Vec gradient(const Vec& u) const;

 private:
  Form form_ = Form::ScalarDoubleWell;
  int ambient_dim_ = 1;
  std::vector<Vec> wells_;
  double growth_exponent_ = 4.0;
  std::function<double(const Vec&)> custom_value_;
  std::function<Vec(const Vec&)> custom_gradient_;
};

// Decomposition W = W_conv + W_pert with W_conv convex and the perturbation
// Hessian bounded. Used by the semi-implicit stepper; any valid split works.
struct PotentialSplit {
  std::function<double(const Vec&)> conv_value;
  std::function<Vec(const Vec&)> conv_grad;
  std::function<double(const Vec&)> pert_value;
  std::function<Vec(const Vec&)> pert_grad;
  double hessian_bound = 0.0;  // measured sup |D^2 W_pert|

  // Largest directional curvature of W_conv seen on |u| <= radius.
  double conv_curvature_bound(const MultiwellPotential& p, double radius) const;

  // Double well: W_conv = u^4 + 1, W_pert = -2 u^2.
  // Other forms: W_pert = eta(|u|) (W - Q) with a C^2 radial cutoff eta equal
  // to 1 on a ball containing the wells and a smooth convex majorant Q, so
  // W_conv agrees with Q near the wells and with W in the far field.
  static PotentialSplit standard(const MultiwellPotential& p);
};

struct AssumptionCheck {
  std::string name;
  bool pass = false;
  double measured = 0.0;
  std::string note;
};

struct AssumptionReport {
  bool overall = false;
  double c1 = 0.0, c2 = 0.0, c3 = 0.0;  // growth constants on |u| = R_growth
  double hessian_bound = 0.0;
  std::vector<AssumptionCheck> checks;
  std::string summary() const;
};

// Samples the structural assumptions on W (wells are the only zeros,
// polynomial growth window, split identity, convexity of W_conv) inside a
// box of the given radius, which must enclose every well.
AssumptionReport validate_assumptions(const MultiwellPotential& p, const PotentialSplit& split,
                                      double sample_box_radius, uint64_t seed = 12345);

}  // namespace dgflow
