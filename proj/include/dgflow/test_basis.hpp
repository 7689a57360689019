#pragma once

#include <array>
#include <vector>

#include "dgflow/common.hpp"

namespace dgflow {

// Coordinate-aligned trigonometric test vector fields on the torus:
// xi(x) = e_axis * trig(2 pi k . x / length). Used as the duality pairing
// family for distributional mean curvature and first variations.
class FourierTestBasis {
 public:
  struct Mode {
    std::array<int, 3> k{};
    int axis = 0;
    bool is_sin = false;
  };

  FourierTestBasis(int dim, double length, int kmax);

  int size() const { return static_cast<int>(modes_.size()); }
  int dim() const { return dim_; }
  const Mode& mode(int b) const { return modes_[b]; }

  // scalar factor and its spatial gradient at x
  double scalar(int b, std::span<const double> x) const;
  void scalar_gradient(int b, std::span<const double> x, std::span<double> out) const;

  // <d xi_b (x), Id - p (x) p> for a unit vector p
  double tangential_divergence(int b, std::span<const double> x, std::span<const double> p) const;

 private:
  int dim_;
  double length_;
  std::vector<Mode> modes_;
};

}  // namespace dgflow
