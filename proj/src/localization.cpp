#include "dgflow/localization.hpp"

#include <algorithm>
#include <cmath>

namespace dgflow {

namespace {

// quintic blend: 1 on [0,1], 0 on [2,inf), C^2
double bump(double s) {
  if (s <= 1.0) return 1.0;
  if (s >= 2.0) return 0.0;
  double t = s - 1.0;
  return 1.0 - ((6.0 * t - 15.0) * t + 10.0) * t * t * t;
}

}  // namespace

double BallCovering::cutoff(const std::array<double, 3>& center, std::span<const double> x) const {
  double d2 = 0.0;
  for (int a = 0; a < grid.dim; ++a) {
    double d = grid.wrap_delta(x[a] - center[a]);
    d2 += d * d;
  }
  return bump(std::sqrt(d2) / radius);
}

std::size_t BallCovering::owner(std::span<const double> x) const {
  std::size_t best = 0;
  double best_d = std::numeric_limits<double>::infinity();
  for (std::size_t b = 0; b < centers.size(); ++b) {
    double d2 = 0.0;
    for (int a = 0; a < grid.dim; ++a) {
      double d = grid.wrap_delta(x[a] - centers[b][a]);
      d2 += d * d;
    }
    if (d2 < best_d) {
      best_d = d2;
      best = b;
    }
  }
  return best;
}

BallCovering build_covering(const TorusGrid& grid, double radius) {
  if (radius < 4.0 * grid.h() || radius > grid.length / 4.0)
    throw std::invalid_argument("build_covering: radius must satisfy 4h <= r <= length/4");
  BallCovering cov;
  cov.grid = grid;
  cov.radius = radius;
  const double spacing = radius / std::sqrt(static_cast<double>(grid.dim));
  const int per_axis = static_cast<int>(std::ceil(grid.length / spacing));
  std::array<int, 3> idx{};
  if (grid.dim == 2) {
    for (idx[0] = 0; idx[0] < per_axis; ++idx[0])
      for (idx[1] = 0; idx[1] < per_axis; ++idx[1])
        cov.centers.push_back({idx[0] * spacing, idx[1] * spacing, 0.0});
  } else {
    for (idx[0] = 0; idx[0] < per_axis; ++idx[0])
      for (idx[1] = 0; idx[1] < per_axis; ++idx[1])
        for (idx[2] = 0; idx[2] < per_axis; ++idx[2])
          cov.centers.push_back({idx[0] * spacing, idx[1] * spacing, idx[2] * spacing});
  }
  return cov;
}

BallReport majority_phase(const InterfaceMesh& mesh, const SurfaceTensionMatrix& sigma,
                          const BallCovering& covering, std::size_t ball,
                          const LocalizationParams& params) {
  (void)sigma;
  const int d = mesh.grid.dim;
  const int P = mesh.nphases;
  const auto& center = covering.centers[ball];
  BallReport rep;
  rep.center = center;

  // per-phase rho-weighted measures and mean i-side normals over the support
  struct PhaseAccum {
    double measure = 0.0;
    std::array<double, 3> mean_normal{};
  };
  std::vector<PhaseAccum> acc(P);
  // also keep the cut-down facet list per pair for the quadratic terms
  struct LocalFacet {
    int i, j;
    double rho, area;
    std::array<double, 3> nu_i;
  };
  std::vector<LocalFacet> local;
  double total_measure = 0.0;
  for (const auto& [key, fs] : mesh.pairs) {
    for (const auto& f : fs) {
      double rho = covering.cutoff(center, {f.x.data(), static_cast<size_t>(d)});
      if (rho <= 0.0) continue;
      local.push_back({key.first, key.second, rho, f.area, f.normal});
      double w = rho * f.area;
      acc[key.first].measure += w;
      acc[key.second].measure += w;
      total_measure += 2.0 * w;
      for (int a = 0; a < d; ++a) {
        acc[key.first].mean_normal[a] += w * f.normal[a];
        acc[key.second].mean_normal[a] -= w * f.normal[a];
      }
    }
  }
  rep.local_measure = total_measure;
  if (local.empty()) {
    rep.empty = true;
    rep.phase_i = 0;
    rep.phase_j = 1;
    rep.error = 0.0;
    return rep;
  }

  // normalized mean normal per candidate majority phase
  std::vector<std::array<double, 3>> nu_of(P);
  for (int i = 0; i < P; ++i) {
    double nn = 0.0;
    for (int a = 0; a < d; ++a) nn += acc[i].mean_normal[a] * acc[i].mean_normal[a];
    nn = std::sqrt(nn);
    if (nn > 1e-12 * std::max(acc[i].measure, 1e-300)) {
      for (int a = 0; a < d; ++a) nu_of[i][a] = acc[i].mean_normal[a] / nn;
    } else {
      nu_of[i] = {1.0, 0.0, 0.0};  // deterministic fallback for folded normals
    }
  }

  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < P; ++i)
    for (int j = 0; j < P; ++j) {
      if (i == j) continue;
      const auto& nb = nu_of[i];
      double err = 0.0;
      for (const auto& lf : local) {
        double w = lf.rho * lf.area;
        // contribution to |grad chi_i| term
        if (lf.i == i || lf.j == i) {
          std::array<double, 3> nu = lf.nu_i;
          if (lf.j == i)
            for (auto& v : nu) v = -v;
          double dd = 0.0;
          for (int a = 0; a < d; ++a) dd += (nu[a] - nb[a]) * (nu[a] - nb[a]);
          err += w * dd;
        }
        if (lf.i == j || lf.j == j) {
          std::array<double, 3> nu = lf.nu_i;
          if (lf.j == j)
            for (auto& v : nu) v = -v;
          double dd = 0.0;
          for (int a = 0; a < d; ++a) dd += (nu[a] + nb[a]) * (nu[a] + nb[a]);
          err += w * dd;
        }
        // stray-phase terms: each side of the facet not in {i, j}
        if (lf.i != i && lf.i != j) err += w;
        if (lf.j != i && lf.j != j) err += w;
      }
      if (err < best) {
        best = err;
        rep.phase_i = i;
        rep.phase_j = j;
        rep.nu = nb;
      }
    }
  rep.error = best;
  rep.ambiguous = best > params.ambiguous_ratio * total_measure;
  return rep;
}

CoveringError covering_error(const InterfaceMesh& mesh, const SurfaceTensionMatrix& sigma,
                             const BallCovering& covering, int threads,
                             const LocalizationParams& params) {
  CoveringError out;
  out.balls.resize(covering.centers.size());
  out.surrogate_per_ball.resize(covering.centers.size());
  const int d = mesh.grid.dim;
  const int P = mesh.nphases;

  parallel_for(covering.centers.size(), threads, [&](std::size_t b) {
    out.balls[b] = majority_phase(mesh, sigma, covering, b, params);
    // surrogate: E(chi; rho_B) - max_i int rho_B |grad psi_i|, where the
    // variation of psi_i decomposes over interfaces with weights
    // |sigma_ik - sigma_il|.
    double loc_energy = 0.0;
    std::vector<double> psi_var(P, 0.0);
    for (const auto& [key, fs] : mesh.pairs) {
      auto [k, l] = key;
      for (const auto& f : fs) {
        double rho = covering.cutoff(covering.centers[b], {f.x.data(), static_cast<size_t>(d)});
        if (rho <= 0.0) continue;
        double w = rho * f.area;
        loc_energy += sigma(k, l) * w;
        for (int i = 0; i < P; ++i) psi_var[i] += std::abs(sigma(i, k) - sigma(i, l)) * w;
      }
    }
    double best_var = 0.0;
    for (int i = 0; i < P; ++i) best_var = std::max(best_var, psi_var[i]);
    out.surrogate_per_ball[b] = loc_energy - best_var;
  });

  for (std::size_t b = 0; b < out.balls.size(); ++b) {
    out.total += out.balls[b].error;
    out.surrogate_total += out.surrogate_per_ball[b];
  }
  return out;
}

}  // namespace dgflow
