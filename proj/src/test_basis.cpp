#include "dgflow/test_basis.hpp"

#include <cmath>

namespace dgflow {

FourierTestBasis::FourierTestBasis(int dim, double length, int kmax) : dim_(dim), length_(length) {
  // half-lattice: keep one representative of each {k, -k} pair
  std::vector<std::array<int, 3>> lattice;
  auto canonical = [&](std::array<int, 3> k) {
    for (int a = 0; a < dim_; ++a) {
      if (k[a] > 0) return true;
      if (k[a] < 0) return false;
    }
    return true;  // zero mode
  };
  std::array<int, 3> k{};
  if (dim_ == 2) {
    for (k[0] = -kmax; k[0] <= kmax; ++k[0])
      for (k[1] = -kmax; k[1] <= kmax; ++k[1])
        if (canonical(k)) lattice.push_back(k);
  } else {
    for (k[0] = -kmax; k[0] <= kmax; ++k[0])
      for (k[1] = -kmax; k[1] <= kmax; ++k[1])
        for (k[2] = -kmax; k[2] <= kmax; ++k[2])
          if (canonical(k)) lattice.push_back(k);
  }
  for (int axis = 0; axis < dim_; ++axis)
    for (const auto& kk : lattice) {
      bool zero = true;
      for (int a = 0; a < dim_; ++a) zero = zero && kk[a] == 0;
      modes_.push_back({kk, axis, false});
      if (!zero) modes_.push_back({kk, axis, true});
    }
}

double FourierTestBasis::scalar(int b, std::span<const double> x) const {
  const Mode& m = modes_[b];
  double phase = 0.0;
  for (int a = 0; a < dim_; ++a) phase += m.k[a] * x[a];
  phase *= 2.0 * kPi / length_;
  return m.is_sin ? std::sin(phase) : std::cos(phase);
}

void FourierTestBasis::scalar_gradient(int b, std::span<const double> x, std::span<double> out) const {
  const Mode& m = modes_[b];
  double phase = 0.0;
  for (int a = 0; a < dim_; ++a) phase += m.k[a] * x[a];
  phase *= 2.0 * kPi / length_;
  double d = m.is_sin ? std::cos(phase) : -std::sin(phase);
  for (int a = 0; a < dim_; ++a) out[a] = d * 2.0 * kPi * m.k[a] / length_;
}

double FourierTestBasis::tangential_divergence(int b, std::span<const double> x,
                                               std::span<const double> p) const {
  // d xi = e_axis (grad f)^T, so <d xi, Id - p p> = d_axis f - p_axis <grad f, p>
  const Mode& m = modes_[b];
  std::array<double, 3> g{};
  scalar_gradient(b, x, {g.data(), static_cast<size_t>(dim_)});
  double gp = 0.0;
  for (int a = 0; a < dim_; ++a) gp += g[a] * p[a];
  return g[m.axis] - p[m.axis] * gp;
}

}  // namespace dgflow
