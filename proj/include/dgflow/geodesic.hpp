#pragma once

#include <vector>

#include "dgflow/common.hpp"
#include "dgflow/potential.hpp"

namespace dgflow {

// Polyline in R^N with fixed endpoints; `action` caches the value of the
// degenerate length functional along it.
struct GeodesicPath {
  std::vector<Vec> nodes;
  double action = 0.0;
  bool converged = false;
  int sweeps = 0;
};

struct GeodesicParams {
  int nodes = 128;      // interior resolution M (path has M+1 points)
  int budget = 20000;   // sweep cap; sweeps are cheap, planar paths need thousands
  int restarts = 4;     // perturbed initializations per endpoint pair
  double rel_tol = 1e-10;
  uint64_t seed = 2024;
};

// Trapezoidal quadrature of int sqrt(2 W(gamma)) |gamma'| dt along the
// polyline; invariant under reparametrization by construction.
double path_action(const MultiwellPotential& p, const std::vector<Vec>& nodes);

// Local minimization of the path action by projected gradient descent on the
// interior nodes with arc-length reparametrization after every sweep.
// The returned action is an upper bound for the geodesic distance d(u,v).
GeodesicPath relax_geodesic(const MultiwellPotential& p, const Vec& u, const Vec& v, int node_count,
                            int budget, double rel_tol = 1e-10,
                            const std::vector<Vec>* initial = nullptr);

class SurfaceTensionMatrix {
 public:
  SurfaceTensionMatrix() = default;
  SurfaceTensionMatrix(int phases, double tolerance);
  int phases() const { return phases_; }
  double tolerance() const { return tolerance_; }
  double operator()(int i, int j) const { return sigma_[i * phases_ + j]; }
  double& at(int i, int j) { return sigma_[i * phases_ + j]; }
  double max_sigma() const;
  bool warning() const { return warning_; }
  void set_warning(bool w) { warning_ = w; }
  // Throws if any triple violates sigma_ik <= sigma_ij + sigma_jk + tolerance.
  void check_metric_axioms() const;

 private:
  int phases_ = 0;
  double tolerance_ = 0.0;
  bool warning_ = false;
  std::vector<double> sigma_;
};

// sigma_ij = best relaxed action between wells i and j over several restarts;
// zero diagonal, symmetrized by taking the smaller direction.
SurfaceTensionMatrix surface_tensions(const MultiwellPotential& p, const GeodesicParams& params = {},
                                      int threads = 1);

// Geodesic distance from well i to an arbitrary point u.
double phi(const MultiwellPotential& p, int well_index, const Vec& u, int node_count = 64,
           int budget = 2000);

}  // namespace dgflow
