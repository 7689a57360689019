#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dgflow/geodesic.hpp"
#include "dgflow/test_basis.hpp"
#include "dgflow/torus.hpp"

namespace dgflow {

// Labeled partition of the torus; exactly one phase per cell.
struct Partition {
  TorusGrid grid;
  int nphases = 2;
  std::vector<int> labels;  // values in 0..nphases-1
  double time = 0.0;
};

enum class ProjectionMethod { Euclidean, Geodesic };

// Nearest-well labeling; ties go to the lowest index.
Partition project(const PhaseField& u, const MultiwellPotential& p,
                  ProjectionMethod method = ProjectionMethod::Euclidean,
                  const std::vector<const PhiTable*>* tables = nullptr);

struct Facet {
  std::array<double, 3> x{};       // position
  std::array<double, 3> normal{};  // nu_i = grad chi_i / |grad chi_i|, points into phase i
  double area = 0.0;               // length in 2d, area in 3d
};

struct Junction {
  std::array<double, 3> x{};
  std::array<int, 3> phases{};  // incident phases, ascending
};

// Facets of each interface Sigma_ij, stored once per unordered pair i < j
// with the i-side normal. The (j,i) view is the same set with negated
// normals, exactly.
struct InterfaceMesh {
  TorusGrid grid;
  int nphases = 2;
  double time = 0.0;
  double smoothing_radius_cells = 2.0;
  std::map<std::pair<int, int>, std::vector<Facet>> pairs;  // keys i < j
  std::vector<Junction> junctions;

  const std::vector<Facet>* facets(int i, int j) const {
    auto it = pairs.find({std::min(i, j), std::max(i, j)});
    return it == pairs.end() ? nullptr : &it->second;
  }
  // normal of the (i, j)-ordered view for a stored facet of pair (min, max)
  static std::array<double, 3> oriented_normal(const Facet& f, int i, int j) {
    std::array<double, 3> n = f.normal;
    if (i > j)
      for (auto& v : n) v = -v;
    return n;
  }
  double total_area() const;
};

struct MeshParams {
  double smoothing_radius_cells = 2.0;
  double junction_threshold = 0.12;  // third-phase indicator level marking junction cells
};

// Marching-squares (2d) / marching-tetrahedra (3d) extraction on mollified
// indicator differences, with junction detection.
InterfaceMesh interface_mesh(Spectral& sp, const Partition& chi, const MeshParams& params = {});

// sum_{i<j} sigma_ij sum_facets weight(x) area
double perimeter_energy(const InterfaceMesh& mesh, const SurfaceTensionMatrix& sigma,
                        const std::function<double(std::span<const double>)>* weight = nullptr);

// Per-facet normal speeds between two labelings tau apart, estimated from
// the level-set displacement of the mollified indicator difference. Facet
// order matches mesh.pairs; V is the speed of phase i (growth positive).
struct VelocityField {
  std::map<std::pair<int, int>, std::vector<double>> per_pair;
  bool under_resolved = false;  // some displacement exceeded 3 cells per step
};

VelocityField normal_velocity(Spectral& sp, const Partition& prev, const Partition& next,
                              const InterfaceMesh& mesh, double tau);

// Distributional mean curvature by weighted least squares against
//   sum sigma_ij int <H, xi> = - sum sigma_ij int <d xi, Id - nu nu>
// over a family of test fields; the minimum-norm representer solution.
struct CurvatureField {
  std::map<std::pair<int, int>, std::vector<std::array<double, 3>>> per_pair;
  double residual = 0.0;       // relative least-squares residual
  double conditioning = 0.0;   // Gram diagonal spread, diagnostic
};

CurvatureField mean_curvature(const InterfaceMesh& mesh, const SurfaceTensionMatrix& sigma,
                              const FourierTestBasis& basis);

struct JunctionReport {
  Junction junction;
  double residual = 0.0;               // |sigma_ij nu_ij + sigma_jk nu_jk + sigma_ki nu_ki|
  std::array<double, 3> angles_deg{};  // pairwise angles between incident interfaces
  bool resolved = false;
};

std::vector<JunctionReport> herring_check(const InterfaceMesh& mesh,
                                          const SurfaceTensionMatrix& sigma,
                                          double fit_radius_cells = 6.0);

// One time slice of a run handed to the certificate.
struct SharpSnapshot {
  double t = 0.0;
  Partition partition;
  InterfaceMesh mesh;
};

struct BvVerdict {
  std::string name;
  std::string status;  // "pass" | "fail" | "inconclusive"
  double measured = 0.0;
  std::string note;
};

struct BvReport {
  std::vector<BvVerdict> verdicts;
  double energy_initial = 0.0;
  double energy_final = 0.0;
  double dissipation_lhs_over_rhs = 0.0;  // worst snapshot ratio
  std::vector<double> initial_distance;   // L2 distance to chi(0) per snapshot
  bool pass() const;
};

struct BvParams {
  int basis_kmax = 8;
  double curvature_residual_threshold = 0.1;
  double dissipation_slack = 0.05;
};

BvReport bv_certificate(Spectral& sp, const std::vector<SharpSnapshot>& run,
                        const SurfaceTensionMatrix& sigma, const BvParams& params = {});

}  // namespace dgflow
