#pragma once

#include <vector>

#include "dgflow/sharp.hpp"

namespace dgflow {

// Ball covering of the torus with centers on the lattice (r/sqrt(d)) Z^d and
// C^2 cutoffs equal to 1 on each ball, supported on the doubled ball.
struct BallCovering {
  TorusGrid grid;
  double radius = 0.0;
  std::vector<std::array<double, 3>> centers;

  // cutoff rho_B for the ball centered at `center`, evaluated at x
  double cutoff(const std::array<double, 3>& center, std::span<const double> x) const;
  // index of the covering ball owning a point (nearest center)
  std::size_t owner(std::span<const double> x) const;
};

BallCovering build_covering(const TorusGrid& grid, double radius);

struct BallReport {
  std::array<double, 3> center{};
  int phase_i = 0;
  int phase_j = 1;
  std::array<double, 3> nu{};  // fitted approximate normal on the ball
  double error = 0.0;          // value of the two-phase reduction functional
  double local_measure = 0.0;  // rho-weighted interface measure in the ball
  bool empty = false;
  bool ambiguous = false;      // no pair explains most of the local measure
};

struct LocalizationParams {
  double ambiguous_ratio = 0.5;
};

// Majority phase pair of one ball: minimizes over ordered pairs (i, j) the
// misfit  int rho |nu_i - nu_B|^2 |grad chi_i| + int rho |nu_j + nu_B|^2
// |grad chi_j| + sum_{k not in {i,j}} int rho |grad chi_k|  with nu_B the
// normalized rho-weighted mean of the i-side normals.
BallReport majority_phase(const InterfaceMesh& mesh, const SurfaceTensionMatrix& sigma,
                          const BallCovering& covering, std::size_t ball,
                          const LocalizationParams& params = {});

struct CoveringError {
  double total = 0.0;  // sum over balls of the pair misfit
  std::vector<BallReport> balls;
  double surrogate_total = 0.0;               // sum_B [E(chi; rho_B) - max_i int rho_B |grad psi_i|]
  std::vector<double> surrogate_per_ball;
};

CoveringError covering_error(const InterfaceMesh& mesh, const SurfaceTensionMatrix& sigma,
                             const BallCovering& covering, int threads = 1,
                             const LocalizationParams& params = {});

}  // namespace dgflow
