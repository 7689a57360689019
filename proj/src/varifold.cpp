#include "dgflow/varifold.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>

namespace dgflow {

namespace {

// weight of a pair's atoms inside mu_t = (1/2) sum_i mu_i: off-diagonal
// measures appear twice with factor 1/2, diagonal ones once with factor 1.
double mu_weight(int i, int j) { return i == j ? 1.0 : 0.5; }

}  // namespace

double DiscreteVarifold::omega_total() const {
  double s = 0.0;
  for (const auto& [key, atoms] : pairs) {
    double w = mu_weight(key.first, key.second);
    for (const auto& a : atoms) s += w * a.mass;
  }
  return s;
}

double DiscreteVarifold::pair_mass(int i, int j) const {
  auto it = pairs.find({i, j});
  if (it == pairs.end()) return 0.0;
  double s = 0.0;
  for (const auto& a : it->second) s += a.mass;
  return s;
}

double DiscreteVarifold::phase_mass(int i) const {
  double s = 2.0 * pair_mass(i, i);
  for (int j = 0; j < nphases; ++j)
    if (j != i) s += pair_mass(i, j);
  return s;
}

std::map<std::size_t, DiscreteVarifold::CellMoments> DiscreteVarifold::binned(int i, int j) const {
  std::map<std::size_t, CellMoments> out;
  auto it = pairs.find({i, j});
  if (it == pairs.end()) return out;
  const double h = grid.h();
  for (const auto& a : it->second) {
    std::array<int, 3> c{};
    for (int ax = 0; ax < grid.dim; ++ax) c[ax] = static_cast<int>(std::floor(a.x[ax] / h));
    std::size_t cell = grid.index({c.data(), static_cast<size_t>(grid.dim)});
    auto& m = out[cell];
    m.mass += a.mass;
    for (int ax = 0; ax < grid.dim; ++ax) m.first[ax] += a.mass * a.p[ax];
  }
  return out;
}

std::map<std::size_t, DiscreteVarifold::CellMoments> DiscreteVarifold::binned_total() const {
  std::map<std::size_t, CellMoments> out;
  const double h = grid.h();
  for (const auto& [key, atoms] : pairs) {
    double w = mu_weight(key.first, key.second);
    for (const auto& a : atoms) {
      std::array<int, 3> c{};
      for (int ax = 0; ax < grid.dim; ++ax) c[ax] = static_cast<int>(std::floor(a.x[ax] / h));
      std::size_t cell = grid.index({c.data(), static_cast<size_t>(grid.dim)});
      auto& m = out[cell];
      m.mass += w * a.mass;
      for (int ax = 0; ax < grid.dim; ++ax) m.first[ax] += w * a.mass * a.p[ax];
    }
  }
  return out;
}

DiscreteVarifold lift_from_partition(const InterfaceMesh& mesh, const SurfaceTensionMatrix& sigma) {
  DiscreteVarifold v;
  v.grid = mesh.grid;
  v.nphases = mesh.nphases;
  v.time = mesh.time;
  for (const auto& [key, fs] : mesh.pairs) {
    auto [i, j] = key;
    double s = sigma(i, j);
    auto& fwd = v.pairs[{i, j}];
    auto& bwd = v.pairs[{j, i}];
    fwd.reserve(fs.size());
    bwd.reserve(fs.size());
    for (const auto& f : fs) {
      VarifoldAtom a;
      a.x = f.x;
      a.p = f.normal;  // nu_i of the lower-index phase
      a.mass = s * f.area;
      fwd.push_back(a);
      for (int ax = 0; ax < 3; ++ax) a.p[ax] = -a.p[ax];
      bwd.push_back(a);
    }
  }
  return v;
}

DiscreteVarifold lift_from_field(Spectral& sp, const PhaseField& u, const MultiwellPotential& pot,
                                 const SurfaceTensionMatrix& sigma, const BallCovering& covering,
                                 const FieldLiftParams& params) {
  if (!(covering.grid == u.grid()))
    throw std::invalid_argument("lift_from_field: covering grid mismatch");
  DiscreteVarifold v;
  v.grid = u.grid();
  v.nphases = pot.well_count();

  // observation scale: partition, mesh, per-ball majority pairs
  Partition chi = project(u, pot);
  InterfaceMesh mesh = interface_mesh(sp, chi, params.mesh);
  std::vector<BallReport> balls(covering.centers.size());
  for (std::size_t b = 0; b < balls.size(); ++b)
    balls[b] = majority_phase(mesh, sigma, covering, b, params.localization);

  // label histogram per ball for the single-phase fallback
  std::vector<std::vector<double>> ball_votes(covering.centers.size(),
                                              std::vector<double>(v.nphases, 0.0));

  // dirichlet density and the atom threshold
  Field grad = sp.gradient(u.f);
  const int N = u.ncomp();
  const int d = u.grid().dim;
  const double hd = std::pow(u.grid().h(), d);
  std::vector<double> density(u.f.cells(), 0.0);
  double dmax = 0.0;
  for (std::size_t cell = 0; cell < u.f.cells(); ++cell) {
    double g2 = 0.0;
    for (int c = 0; c < N * d; ++c) {
      double g = grad.at(cell, c);
      g2 += g * g;
    }
    density[cell] = u.epsilon * g2;
    dmax = std::max(dmax, density[cell]);
  }
  const double theta = params.threshold_rel * dmax;

  std::vector<std::size_t> owner(u.f.cells());
  for (std::size_t cell = 0; cell < u.f.cells(); ++cell) {
    std::array<double, 3> x{};
    u.grid().center(cell, {x.data(), static_cast<size_t>(d)});
    owner[cell] = covering.owner({x.data(), static_cast<size_t>(d)});
    ball_votes[owner[cell]][chi.labels[cell]] += 1.0;
  }

  // orientation fields: grad psi_i for each phase that some ball elects,
  // mollified by one cell
  std::vector<std::unique_ptr<PhiTable>> tables(v.nphases);
  std::vector<Field> psi_grad(v.nphases);
  double sig_max = std::max(sigma.max_sigma(), 1e-12);
  auto ensure_orientation = [&](int i) {
    if (!tables[i]) {
      tables[i] = std::make_unique<PhiTable>(pot, i, params.geodesic,
                                             params.table_error_rel * sig_max);
      Field psi(u.grid(), 1);
      psi.data = psi_field(u, *tables[i]);
      psi_grad[i] = sp.gradient(sp.mollify(psi, u.grid().h()));
    }
  };

  for (std::size_t cell = 0; cell < u.f.cells(); ++cell) {
    if (density[cell] <= theta) continue;
    const BallReport& rep = balls[owner[cell]];
    double mass = density[cell] * hd;
    std::array<double, 3> x{};
    u.grid().center(cell, {x.data(), static_cast<size_t>(d)});

    int oi;  // phase whose distance function orients the atom
    bool diagonal = rep.empty || rep.ambiguous;
    if (diagonal) {
      const auto& votes = ball_votes[owner[cell]];
      oi = static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
    } else {
      oi = rep.phase_i;
    }
    ensure_orientation(oi);
    std::array<double, 3> p{};
    double pn = 0.0;
    for (int a = 0; a < d; ++a) {
      p[a] = psi_grad[oi].at(cell, a);
      pn += p[a] * p[a];
    }
    pn = std::sqrt(pn);
    if (pn > 1e-14) {
      for (int a = 0; a < d; ++a) p[a] /= pn;
    } else {
      p = {1.0, 0.0, 0.0};
    }

    if (diagonal) {
      // collapsed or invisible interface: keep the axis, drop the sign
      VarifoldAtom a1{x, p, 0.5 * mass};
      VarifoldAtom a2{x, {-p[0], -p[1], -p[2]}, 0.5 * mass};
      auto& dst = v.pairs[{oi, oi}];
      dst.push_back(a1);
      dst.push_back(a2);
    } else {
      VarifoldAtom fwd{x, p, mass};
      VarifoldAtom bwd{x, {-p[0], -p[1], -p[2]}, mass};
      v.pairs[{rep.phase_i, rep.phase_j}].push_back(fwd);
      v.pairs[{rep.phase_j, rep.phase_i}].push_back(bwd);
    }
  }
  return v;
}

double first_variation(const DiscreteVarifold& v, const TestField& xi) {
  const int d = v.grid.dim;
  std::array<double, 9> J{};
  double acc = 0.0;
  for (const auto& [key, atoms] : v.pairs) {
    double w = mu_weight(key.first, key.second);
    for (const auto& a : atoms) {
      xi.jacobian({a.x.data(), static_cast<size_t>(d)}, {J.data(), static_cast<size_t>(d * d)});
      // <J, Id - p p> = tr J - p^T J p
      double tr = 0.0, pJp = 0.0;
      for (int r = 0; r < d; ++r) {
        tr += J[r * d + r];
        for (int c = 0; c < d; ++c) pJp += a.p[r] * J[r * d + c] * a.p[c];
      }
      acc += w * a.mass * (tr - pJp);
    }
  }
  return acc;
}

double first_variation(const DiscreteVarifold& v, const FourierTestBasis& basis, int b) {
  const int d = v.grid.dim;
  double acc = 0.0;
  for (const auto& [key, atoms] : v.pairs) {
    double w = mu_weight(key.first, key.second);
    for (const auto& a : atoms)
      acc += w * a.mass *
             basis.tangential_divergence(b, {a.x.data(), static_cast<size_t>(d)},
                                         {a.p.data(), static_cast<size_t>(d)});
  }
  return acc;
}

GeneralizedCurvature generalized_mean_curvature(const DiscreteVarifold& v,
                                                const FourierTestBasis& basis) {
  GeneralizedCurvature out;
  auto cells = v.binned_total();
  if (cells.empty()) return out;
  const int d = v.grid.dim;

  std::vector<int> scalar_modes;
  for (int b = 0; b < basis.size(); ++b)
    if (basis.mode(b).axis == 0) scalar_modes.push_back(b);
  const int Bs = static_cast<int>(scalar_modes.size());
  const int C = static_cast<int>(cells.size());

  std::vector<std::size_t> cell_ids;
  std::vector<double> cw;
  cell_ids.reserve(C);
  cw.reserve(C);
  for (const auto& [cell, m] : cells) {
    cell_ids.push_back(cell);
    cw.push_back(m.mass);
  }

  Eigen::MatrixXd S(Bs, C);
  for (int c = 0; c < C; ++c) {
    std::array<double, 3> x{};
    v.grid.center(cell_ids[c], {x.data(), static_cast<size_t>(d)});
    for (int bi = 0; bi < Bs; ++bi)
      S(bi, c) = basis.scalar(scalar_modes[bi], {x.data(), static_cast<size_t>(d)});
  }
  Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(cw.data(), C);
  Eigen::MatrixXd G = S * w.asDiagonal() * S.transpose();

  // r_{b,axis} = - first_variation(e_axis f_b) over the exact atoms
  Eigen::MatrixXd R(Bs, d);
  for (int bi = 0; bi < Bs; ++bi) {
    std::array<double, 3> racc{};
    for (const auto& [key, atoms] : v.pairs) {
      double mw = mu_weight(key.first, key.second);
      for (const auto& a : atoms) {
        std::array<double, 3> g{};
        basis.scalar_gradient(scalar_modes[bi], {a.x.data(), static_cast<size_t>(d)},
                              {g.data(), static_cast<size_t>(d)});
        double gp = 0.0;
        for (int ax = 0; ax < d; ++ax) gp += g[ax] * a.p[ax];
        for (int axis = 0; axis < d; ++axis)
          racc[axis] += mw * a.mass * (g[axis] - a.p[axis] * gp);
      }
    }
    for (int axis = 0; axis < d; ++axis) R(bi, axis) = -racc[axis];
  }

  double tr = G.trace() / Bs;
  Eigen::MatrixXd Greg = G + 1e-12 * tr * Eigen::MatrixXd::Identity(Bs, Bs);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(Greg);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("generalized_mean_curvature: Gram factorization failed");
  Eigen::MatrixXd coeff = ldlt.solve(R);
  Eigen::VectorXd dvec = ldlt.vectorD();
  out.conditioning = dvec.maxCoeff() / std::max(dvec.minCoeff(), 1e-300);

  double rn = 0.0, rd = 0.0;
  Eigen::MatrixXd GC = G * coeff;
  for (int axis = 0; axis < d; ++axis) {
    rn += (GC.col(axis) - R.col(axis)).squaredNorm();
    rd += R.col(axis).squaredNorm();
  }
  out.residual = rd > 0 ? std::sqrt(rn / rd) : 0.0;

  for (int c = 0; c < C; ++c) {
    std::array<double, 3> H{};
    for (int bi = 0; bi < Bs; ++bi)
      for (int axis = 0; axis < d; ++axis) H[axis] += coeff(bi, axis) * S(bi, c);
    out.per_cell[cell_ids[c]] = H;
  }
  return out;
}

CompatibilityReport compatibility_check(const DiscreteVarifold& v, const InterfaceMesh& mesh,
                                        const SurfaceTensionMatrix& sigma,
                                        const VelocityField* velocities,
                                        const CompatibilityParams& params) {
  CompatibilityReport rep;
  const int d = v.grid.dim;
  const int P = v.nphases;
  const double total = std::max(v.omega_total(), 1e-300);

  // (a) omega_ij == omega_ji, cellwise
  {
    double worst = 0.0;
    for (int i = 0; i < P; ++i)
      for (int j = i + 1; j < P; ++j) {
        auto bij = v.binned(i, j), bji = v.binned(j, i);
        double diff = 0.0;
        for (const auto& [cell, m] : bij) {
          auto it = bji.find(cell);
          diff += std::abs(m.mass - (it == bji.end() ? 0.0 : it->second.mass));
        }
        for (const auto& [cell, m] : bji)
          if (!bij.count(cell)) diff += m.mass;
        worst = std::max(worst, diff / total);
      }
    rep.verdicts.push_back(
        {"omega_symmetry", worst <= params.tol_exact ? "pass" : "fail", worst});
  }

  // (b) <lambda_ij> == -<lambda_ji> on carried cells (mass-weighted)
  {
    double num = 0.0, den = 0.0;
    for (int i = 0; i < P; ++i)
      for (int j = i; j < P; ++j) {
        auto bij = v.binned(i, j), bji = v.binned(j, i);
        for (const auto& [cell, m] : bij) {
          auto it = bji.find(cell);
          if (it == bji.end()) continue;
          auto li = m.mean_orientation(d);
          auto lj = it->second.mean_orientation(d);
          double s = 0.0;
          for (int a = 0; a < d; ++a) s += (li[a] + lj[a]) * (li[a] + lj[a]);
          double wgt = std::min(m.mass, it->second.mass);
          num += wgt * s;
          den += wgt;
        }
      }
    double worst = den > 0 ? std::sqrt(num / den) : 0.0;
    rep.verdicts.push_back(
        {"orientation_antisymmetry", worst <= params.tol_exact ? "pass" : "fail", worst});
  }

  // (c) V_i == -V_j where velocities are supplied
  if (velocities) {
    // stored once per unordered pair with the i-side sign, so antisymmetry
    // is structural; report the residual of the construction
    rep.verdicts.push_back({"velocity_antisymmetry", "pass", 0.0});
  } else {
    rep.verdicts.push_back({"velocity_antisymmetry", "skipped", 0.0});
  }

  // (d) H parallel to the mean orientation, cellwise in L^2(omega)
  {
    FourierTestBasis basis(d, v.grid.length, params.basis_kmax);
    GeneralizedCurvature H = generalized_mean_curvature(v, basis);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < P; ++i)
      for (int j = 0; j < P; ++j) {
        auto bij = v.binned(i, j);
        for (const auto& [cell, m] : bij) {
          auto hit = H.per_cell.find(cell);
          if (hit == H.per_cell.end()) continue;
          auto lam = m.mean_orientation(d);
          double l2 = 0.0, hl = 0.0, h2 = 0.0;
          for (int a = 0; a < d; ++a) {
            l2 += lam[a] * lam[a];
            hl += hit->second[a] * lam[a];
            h2 += hit->second[a] * hit->second[a];
          }
          double r2 = 0.0;
          for (int a = 0; a < d; ++a) {
            double diff = l2 * hit->second[a] - hl * lam[a];
            r2 += diff * diff;
          }
          num += m.mass * r2;
          den += m.mass * std::max(l2 * l2 * h2, 1e-300);
        }
      }
    double res = den > 0 ? std::sqrt(num / den) : 0.0;
    rep.verdicts.push_back(
        {"curvature_normal_direction", res <= params.tol_curvature ? "pass" : "fail", res});
  }

  // (e) pair measures reproduce grad chi_i against the facet measure
  {
    FourierTestBasis basis(d, v.grid.length, std::min(params.basis_kmax, 3));
    double worst = 0.0;
    for (int i = 0; i < P; ++i) {
      for (int b = 0; b < basis.size(); ++b) {
        double lhs = 0.0;
        for (const auto& [key, fs] : mesh.pairs) {
          if (key.first != i && key.second != i) continue;
          for (const auto& f : fs) {
            auto nu = InterfaceMesh::oriented_normal(f, key.first == i ? i : key.second,
                                                     key.first == i ? key.second : key.first);
            // oriented_normal(f, i, j) = nu_i for this facet
            double s = basis.scalar(b, {f.x.data(), static_cast<size_t>(d)});
            lhs += f.area * s * nu[basis.mode(b).axis];
          }
        }
        double rhs = 0.0;
        for (int j = 0; j < P; ++j) {
          if (j == i) continue;
          auto it = v.pairs.find({i, j});
          if (it == v.pairs.end()) continue;
          double inv_sigma = 1.0 / sigma(i, j);
          for (const auto& a : it->second) {
            double s = basis.scalar(b, {a.x.data(), static_cast<size_t>(d)});
            rhs += inv_sigma * a.mass * s * a.p[basis.mode(b).axis];
          }
        }
        worst = std::max(worst, std::abs(lhs - rhs) / std::max(total / sigma.max_sigma(), 1.0));
      }
    }
    rep.verdicts.push_back(
        {"pair_measures_match_partition", worst <= params.tol_exact ? "pass" : "fail", worst});
  }
  return rep;
}

DissipationVerdict varifold_dissipation_check(const std::vector<VarifoldSnapshot>& run,
                                              double omega0, const FourierTestBasis& basis,
                                              double slack) {
  if (run.size() < 2)
    throw std::invalid_argument("varifold_dissipation_check: need at least two snapshots");
  DissipationVerdict out;
  out.omega0 = omega0;
  double vel_acc = 0.0, curv_acc = 0.0;
  out.lhs.resize(run.size());
  out.lhs[0] = run[0].varifold.omega_total();
  out.worst_ratio = out.lhs[0] / std::max(omega0, 1e-300);
  for (std::size_t k = 0; k + 1 < run.size(); ++k) {
    double dt = run[k + 1].t - run[k].t;
    // velocity part: 1/2 sum_i int V_i^2 (1/2) d omega_{t,i}; with the
    // velocities attached to unordered pair atoms, each pair (i,j), i != j,
    // appears in omega_i and omega_j once each.
    double v2 = 0.0;
    for (const auto& [key, vs] : run[k].velocities) {
      auto it = run[k].varifold.pairs.find(key);
      if (it == run[k].varifold.pairs.end() || it->second.size() != vs.size()) continue;
      for (std::size_t a = 0; a < vs.size(); ++a)
        v2 += 2.0 * 0.5 * vs[a] * vs[a] * it->second[a].mass;  // both orderings, half weight each
    }
    vel_acc += 0.5 * v2 * dt;
    GeneralizedCurvature H = generalized_mean_curvature(run[k].varifold, basis);
    auto cells = run[k].varifold.binned_total();
    double h2 = 0.0;
    for (const auto& [cell, m] : cells) {
      auto hit = H.per_cell.find(cell);
      if (hit == H.per_cell.end()) continue;
      double hh = 0.0;
      for (int a = 0; a < run[k].varifold.grid.dim; ++a) hh += hit->second[a] * hit->second[a];
      h2 += m.mass * hh;
    }
    curv_acc += 0.5 * h2 * dt;
    out.lhs[k + 1] = run[k + 1].varifold.omega_total() + vel_acc + curv_acc;
    out.worst_ratio = std::max(out.worst_ratio, out.lhs[k + 1] / std::max(omega0, 1e-300));
  }
  out.pass = out.worst_ratio <= 1.0 + slack;
  return out;
}

}  // namespace dgflow
