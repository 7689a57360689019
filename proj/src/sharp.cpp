#include "dgflow/sharp.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

namespace dgflow {

namespace {

// bilinear / trilinear sample of a cell-centered scalar field at physical x
double sample(const Field& f, int comp, std::span<const double> x) {
  const TorusGrid& g = f.grid;
  const double h = g.h();
  const int d = g.dim;
  std::array<int, 3> base{};
  std::array<double, 3> frac{};
  for (int a = 0; a < d; ++a) {
    double t = x[a] / h - 0.5;
    double fl = std::floor(t);
    base[a] = static_cast<int>(fl);
    frac[a] = t - fl;
  }
  double acc = 0.0;
  for (int s = 0; s < (1 << d); ++s) {
    double w = 1.0;
    std::array<int, 3> c{};
    for (int a = 0; a < d; ++a) {
      int bit = (s >> a) & 1;
      w *= bit ? frac[a] : 1.0 - frac[a];
      c[a] = base[a] + bit;
    }
    acc += w * f.at(g.index({c.data(), static_cast<size_t>(d)}), comp);
  }
  return acc;
}

std::vector<Field> mollified_indicators(Spectral& sp, const Partition& chi, double radius_cells) {
  std::vector<Field> out;
  out.reserve(chi.nphases);
  Field ind(chi.grid, 1, 0.0);
  for (int i = 0; i < chi.nphases; ++i) {
    for (std::size_t c = 0; c < chi.labels.size(); ++c) ind.data[c] = chi.labels[c] == i ? 1.0 : 0.0;
    out.push_back(sp.mollify(ind, radius_cells * chi.grid.h()));
  }
  return out;
}

// phases ranked by mollified indicator at one cell
void rank_phases(const std::vector<Field>& m, std::size_t cell, int* first, int* second,
                 double* third_value = nullptr) {
  int P = static_cast<int>(m.size());
  int b1 = 0, b2 = -1, b3 = -1;
  for (int i = 1; i < P; ++i) {
    if (m[i].data[cell] > m[b1].data[cell]) {
      b3 = b2;
      b2 = b1;
      b1 = i;
    } else if (b2 < 0 || m[i].data[cell] > m[b2].data[cell]) {
      b3 = b2;
      b2 = i;
    } else if (b3 < 0 || m[i].data[cell] > m[b3].data[cell]) {
      b3 = i;
    }
  }
  *first = b1;
  *second = b2;
  if (third_value) *third_value = b3 >= 0 ? m[b3].data[cell] : 0.0;
}

struct SquareCorners {
  std::array<std::size_t, 4> cell;   // c00, c10, c01, c11
  std::array<double, 2> origin;      // position of c00 center
};

}  // namespace

Partition project(const PhaseField& u, const MultiwellPotential& p, ProjectionMethod method,
                  const std::vector<const PhiTable*>* tables) {
  Partition out;
  out.grid = u.grid();
  out.nphases = p.well_count();
  out.labels.assign(u.f.cells(), 0);
  const int N = u.ncomp();
  Vec uc(N);
  for (std::size_t cell = 0; cell < u.f.cells(); ++cell) {
    for (int c = 0; c < N; ++c) uc[c] = u.f.at(cell, c);
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (int i = 0; i < p.well_count(); ++i) {
      double d = method == ProjectionMethod::Euclidean
                     ? dist(uc, p.well(i))
                     : (*(*tables)[i])(uc);
      if (d < best_d) {  // strict: ties stay at the lower index
        best_d = d;
        best = i;
      }
    }
    out.labels[cell] = best;
  }
  return out;
}

double InterfaceMesh::total_area() const {
  double a = 0.0;
  for (const auto& [key, fs] : pairs)
    for (const auto& f : fs) a += f.area;
  return a;
}

namespace {

void marching_squares_pair(const TorusGrid& g, const std::vector<Field>& m, int pi, int pj,
                           std::vector<Facet>& out) {
  const int n = g.n;
  const double h = g.h();
  auto fval = [&](std::size_t cell) { return m[pi].data[cell] - m[pj].data[cell]; };
  auto top2_is_pair = [&](std::size_t cell) {
    int a, b;
    rank_phases(m, cell, &a, &b);
    return (a == pi && b == pj) || (a == pj && b == pi);
  };

  std::array<int, 2> c{};
  for (c[0] = 0; c[0] < n; ++c[0])
    for (c[1] = 0; c[1] < n; ++c[1]) {
      std::array<std::size_t, 4> cells = {
          g.index({std::array<int, 2>{c[0], c[1]}.data(), 2}),
          g.index({std::array<int, 2>{c[0] + 1, c[1]}.data(), 2}),
          g.index({std::array<int, 2>{c[0], c[1] + 1}.data(), 2}),
          g.index({std::array<int, 2>{c[0] + 1, c[1] + 1}.data(), 2})};
      double f00 = fval(cells[0]), f10 = fval(cells[1]), f01 = fval(cells[2]), f11 = fval(cells[3]);
      int mask = (f00 > 0) | ((f10 > 0) << 1) | ((f01 > 0) << 2) | ((f11 > 0) << 3);
      if (mask == 0 || mask == 15) continue;
      if (!(top2_is_pair(cells[0]) && top2_is_pair(cells[1]) && top2_is_pair(cells[2]) &&
            top2_is_pair(cells[3])))
        continue;

      // crossing parameter on an edge between values a and b
      auto cross = [](double a, double b) { return a / (a - b); };
      // local coordinates in [0,1]^2 relative to the c00 center
      std::array<double, 2> e_bottom{cross(f00, f10), 0.0};
      std::array<double, 2> e_top{cross(f01, f11), 1.0};
      std::array<double, 2> e_left{0.0, cross(f00, f01)};
      std::array<double, 2> e_right{1.0, cross(f10, f11)};

      std::vector<std::array<std::array<double, 2>, 2>> segs;
      auto add = [&](std::array<double, 2> a, std::array<double, 2> b) { segs.push_back({a, b}); };
      switch (mask) {
        case 1: case 14: add(e_left, e_bottom); break;
        case 2: case 13: add(e_bottom, e_right); break;
        case 4: case 11: add(e_left, e_top); break;
        case 8: case 7: add(e_top, e_right); break;
        case 3: case 12: add(e_left, e_right); break;
        case 5: case 10: add(e_bottom, e_top); break;
        case 6: case 9: {
          double fc = 0.25 * (f00 + f10 + f01 + f11);
          bool center_pos = fc > 0;
          bool corner00_pos = f00 > 0;
          if (center_pos == corner00_pos) {
            add(e_left, e_top);
            add(e_bottom, e_right);
          } else {
            add(e_left, e_bottom);
            add(e_top, e_right);
          }
          break;
        }
        default: break;
      }

      double x0 = (c[0] + 0.5) * h, x1 = (c[1] + 0.5) * h;
      for (const auto& s : segs) {
        double mx0 = 0.5 * (s[0][0] + s[1][0]);
        double mx1 = 0.5 * (s[0][1] + s[1][1]);
        double dx0 = (s[1][0] - s[0][0]) * h;
        double dx1 = (s[1][1] - s[0][1]) * h;
        double len = std::hypot(dx0, dx1);
        if (len < 1e-14 * h) continue;
        // bilinear gradient of f at the midpoint; points into phase pi
        double g0 = ((f10 - f00) * (1.0 - mx1) + (f11 - f01) * mx1) / h;
        double g1 = ((f01 - f00) * (1.0 - mx0) + (f11 - f10) * mx0) / h;
        double gn = std::hypot(g0, g1);
        if (gn < 1e-300) continue;
        Facet facet;
        facet.x = {std::fmod(x0 + mx0 * h + g.length, g.length),
                   std::fmod(x1 + mx1 * h + g.length, g.length), 0.0};
        facet.normal = {g0 / gn, g1 / gn, 0.0};
        facet.area = len;
        out.push_back(facet);
      }
    }
}

// 3d: split each cube into 6 tetrahedra and triangulate the zero level
void marching_tets_pair(const TorusGrid& g, const std::vector<Field>& m, int pi, int pj,
                        std::vector<Facet>& out) {
  const int n = g.n;
  const double h = g.h();
  auto fval = [&](std::size_t cell) { return m[pi].data[cell] - m[pj].data[cell]; };
  auto top2_is_pair = [&](std::size_t cell) {
    int a, b;
    rank_phases(m, cell, &a, &b);
    return (a == pi && b == pj) || (a == pj && b == pi);
  };
  static const int tets[6][4] = {{0, 1, 3, 7}, {0, 1, 5, 7}, {0, 2, 3, 7},
                                 {0, 2, 6, 7}, {0, 4, 5, 7}, {0, 4, 6, 7}};
  std::array<int, 3> c{};
  for (c[0] = 0; c[0] < n; ++c[0])
    for (c[1] = 0; c[1] < n; ++c[1])
      for (c[2] = 0; c[2] < n; ++c[2]) {
        std::array<std::size_t, 8> cells;
        std::array<std::array<double, 3>, 8> pos;
        bool ok = true;
        double fv[8];
        for (int v = 0; v < 8; ++v) {
          std::array<int, 3> cc = {c[0] + (v & 1), c[1] + ((v >> 1) & 1), c[2] + ((v >> 2) & 1)};
          cells[v] = g.index({cc.data(), 3});
          fv[v] = fval(cells[v]);
          for (int a = 0; a < 3; ++a) pos[v][a] = (cc[a] + 0.5) * h;
        }
        int mask = 0;
        for (int v = 0; v < 8; ++v) mask |= (fv[v] > 0) << v;
        if (mask == 0 || mask == 255) continue;
        for (int v = 0; v < 8 && ok; ++v) ok = top2_is_pair(cells[v]);
        if (!ok) continue;

        for (const auto& tet : tets) {
          std::array<double, 4> tf;
          for (int v = 0; v < 4; ++v) tf[v] = fv[tet[v]];
          int tm = 0;
          for (int v = 0; v < 4; ++v) tm |= (tf[v] > 0) << v;
          if (tm == 0 || tm == 15) continue;
          std::vector<std::array<double, 3>> pts;
          for (int a = 0; a < 4; ++a)
            for (int b = a + 1; b < 4; ++b) {
              if ((tf[a] > 0) == (tf[b] > 0)) continue;
              double t = tf[a] / (tf[a] - tf[b]);
              std::array<double, 3> xp;
              for (int ax = 0; ax < 3; ++ax)
                xp[ax] = pos[tet[a]][ax] + t * (pos[tet[b]][ax] - pos[tet[a]][ax]);
              pts.push_back(xp);
            }
          if (pts.size() < 3) continue;
          // 3 points: one triangle; 4 points: split the quad
          auto emit = [&](const std::array<double, 3>& A, const std::array<double, 3>& B,
                          const std::array<double, 3>& C) {
            std::array<double, 3> ab, ac, nrm, centroid;
            for (int ax = 0; ax < 3; ++ax) {
              ab[ax] = B[ax] - A[ax];
              ac[ax] = C[ax] - A[ax];
              centroid[ax] = std::fmod((A[ax] + B[ax] + C[ax]) / 3.0 + g.length, g.length);
            }
            nrm = {ab[1] * ac[2] - ab[2] * ac[1], ab[2] * ac[0] - ab[0] * ac[2],
                   ab[0] * ac[1] - ab[1] * ac[0]};
            double area = 0.5 * std::sqrt(nrm[0] * nrm[0] + nrm[1] * nrm[1] + nrm[2] * nrm[2]);
            if (area < 1e-18) return;
            // orient along grad f (into phase pi) via forward differences
            std::array<double, 3> grad{};
            for (int ax = 0; ax < 3; ++ax) {
              int va = 1 << ax;
              grad[ax] = 0.0;
              int cnt = 0;
              for (int v = 0; v < 8; ++v)
                if (!(v & va)) {
                  grad[ax] += fv[v | va] - fv[v];
                  ++cnt;
                }
              grad[ax] /= cnt * h;
            }
            double gn = std::sqrt(grad[0] * grad[0] + grad[1] * grad[1] + grad[2] * grad[2]);
            if (gn < 1e-300) return;
            Facet facet;
            facet.x = centroid;
            facet.normal = {grad[0] / gn, grad[1] / gn, grad[2] / gn};
            facet.area = area;
            out.push_back(facet);
          };
          if (pts.size() == 3) {
            emit(pts[0], pts[1], pts[2]);
          } else {
            emit(pts[0], pts[1], pts[2]);
            emit(pts[0], pts[2], pts[3]);
            // the two splits of a planar quad have equal total area, so the
            // diagonal choice does not matter
          }
        }
      }
}

}  // namespace

InterfaceMesh interface_mesh(Spectral& sp, const Partition& chi, const MeshParams& params) {
  if (params.smoothing_radius_cells < 1.0)
    throw std::invalid_argument("interface_mesh: smoothing radius must be >= 1 cell");
  InterfaceMesh mesh;
  mesh.grid = chi.grid;
  mesh.nphases = chi.nphases;
  mesh.time = chi.time;
  mesh.smoothing_radius_cells = params.smoothing_radius_cells;

  std::vector<Field> m = mollified_indicators(sp, chi, params.smoothing_radius_cells);

  for (int i = 0; i < chi.nphases; ++i)
    for (int j = i + 1; j < chi.nphases; ++j) {
      std::vector<Facet> fs;
      if (chi.grid.dim == 2)
        marching_squares_pair(chi.grid, m, i, j, fs);
      else
        marching_tets_pair(chi.grid, m, i, j, fs);
      if (!fs.empty()) mesh.pairs[{i, j}] = std::move(fs);
    }

  // junction cells: three phases visibly present after mollification
  if (chi.nphases >= 3) {
    std::vector<char> marked(chi.grid.cell_count(), 0);
    for (std::size_t cell = 0; cell < chi.grid.cell_count(); ++cell) {
      int a, b;
      double third;
      rank_phases(m, cell, &a, &b, &third);
      marked[cell] = third >= params.junction_threshold ? 1 : 0;
    }
    std::vector<char> seen(chi.grid.cell_count(), 0);
    const int d = chi.grid.dim;
    for (std::size_t cell = 0; cell < chi.grid.cell_count(); ++cell) {
      if (!marked[cell] || seen[cell]) continue;
      std::vector<std::size_t> component;
      std::queue<std::size_t> q;
      q.push(cell);
      seen[cell] = 1;
      while (!q.empty()) {
        std::size_t cur = q.front();
        q.pop();
        component.push_back(cur);
        std::array<int, 3> cc{};
        chi.grid.coords(cur, {cc.data(), static_cast<size_t>(d)});
        for (int a2 = 0; a2 < d; ++a2)
          for (int s = -1; s <= 1; s += 2) {
            std::array<int, 3> nb = cc;
            nb[a2] += s;
            std::size_t ni = chi.grid.index({nb.data(), static_cast<size_t>(d)});
            if (marked[ni] && !seen[ni]) {
              seen[ni] = 1;
              q.push(ni);
            }
          }
      }
      // centroid with torus wrap, relative to the first cell
      std::array<double, 3> ref{}, acc{};
      chi.grid.center(component.front(), {ref.data(), static_cast<size_t>(d)});
      std::vector<double> phase_mass(chi.nphases, 0.0);
      for (std::size_t cc2 : component) {
        std::array<double, 3> x{};
        chi.grid.center(cc2, {x.data(), static_cast<size_t>(d)});
        for (int a2 = 0; a2 < d; ++a2) acc[a2] += chi.grid.wrap_delta(x[a2] - ref[a2]);
        for (int ph = 0; ph < chi.nphases; ++ph) phase_mass[ph] += m[ph].data[cc2];
      }
      Junction j;
      for (int a2 = 0; a2 < d; ++a2)
        j.x[a2] = std::fmod(ref[a2] + acc[a2] / component.size() + chi.grid.length, chi.grid.length);
      std::vector<int> order(chi.nphases);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(),
                [&](int a2, int b2) { return phase_mass[a2] > phase_mass[b2]; });
      j.phases = {order[0], order[1], order[2]};
      std::sort(j.phases.begin(), j.phases.end());
      mesh.junctions.push_back(j);
    }
  }
  return mesh;
}

double perimeter_energy(const InterfaceMesh& mesh, const SurfaceTensionMatrix& sigma,
                        const std::function<double(std::span<const double>)>* weight) {
  double e = 0.0;
  for (const auto& [key, fs] : mesh.pairs) {
    double s = sigma(key.first, key.second);
    for (const auto& f : fs) {
      double w = weight ? (*weight)({f.x.data(), static_cast<size_t>(mesh.grid.dim)}) : 1.0;
      e += s * w * f.area;
    }
  }
  return e;
}

VelocityField normal_velocity(Spectral& sp, const Partition& prev, const Partition& next,
                              const InterfaceMesh& mesh, double tau) {
  if (!(prev.grid == next.grid)) throw std::invalid_argument("normal_velocity: grid mismatch");
  if (tau <= 0.0) throw std::invalid_argument("normal_velocity: tau must be positive");
  VelocityField out;
  std::vector<Field> mp = mollified_indicators(sp, prev, mesh.smoothing_radius_cells);
  std::vector<Field> mn = mollified_indicators(sp, next, mesh.smoothing_radius_cells);
  const double h = prev.grid.h();
  const int d = prev.grid.dim;

  for (const auto& [key, fs] : mesh.pairs) {
    auto [i, j] = key;
    Field fprev(prev.grid, 1), fnext(prev.grid, 1);
    for (std::size_t c = 0; c < fprev.data.size(); ++c) {
      fprev.data[c] = mp[i].data[c] - mp[j].data[c];
      fnext.data[c] = mn[i].data[c] - mn[j].data[c];
    }
    Field grad = sp.gradient(fprev);
    std::vector<double>& vs = out.per_pair[key];
    vs.reserve(fs.size());
    for (const auto& f : fs) {
      std::span<const double> x{f.x.data(), static_cast<size_t>(d)};
      double df = sample(fnext, 0, x) - sample(fprev, 0, x);
      double gn2 = 0.0;
      for (int a = 0; a < d; ++a) {
        double g = sample(grad, a, x);
        gn2 += g * g;
      }
      double gn = std::sqrt(gn2);
      double v = gn > 1e-12 ? df / (tau * gn) : 0.0;
      if (std::abs(v) * tau > 3.0 * h) out.under_resolved = true;
      vs.push_back(v);
    }
  }
  return out;
}

CurvatureField mean_curvature(const InterfaceMesh& mesh, const SurfaceTensionMatrix& sigma,
                              const FourierTestBasis& basis) {
  const int d = mesh.grid.dim;
  // flatten facets with their energy weights
  std::vector<const Facet*> facets;
  std::vector<double> weights;
  for (const auto& [key, fs] : mesh.pairs) {
    double s = sigma(key.first, key.second);
    for (const auto& f : fs) {
      facets.push_back(&f);
      weights.push_back(s * f.area);
    }
  }
  CurvatureField out;
  if (facets.empty()) return out;

  // one scalar factor set per coordinate axis; the Gram matrix is shared
  std::vector<int> scalar_of_axis0;  // indices b with axis == 0, cos/sin modes
  for (int b = 0; b < basis.size(); ++b)
    if (basis.mode(b).axis == 0) scalar_of_axis0.push_back(b);
  const int Bs = static_cast<int>(scalar_of_axis0.size());
  const int F = static_cast<int>(facets.size());

  Eigen::MatrixXd S(Bs, F);
  for (int bi = 0; bi < Bs; ++bi)
    for (int fi = 0; fi < F; ++fi)
      S(bi, fi) = basis.scalar(scalar_of_axis0[bi], {facets[fi]->x.data(), static_cast<size_t>(d)});
  Eigen::VectorXd w = Eigen::Map<const Eigen::VectorXd>(weights.data(), F);
  Eigen::MatrixXd G = S * w.asDiagonal() * S.transpose();

  // right-hand sides: r_b = - sum_f w_f <d xi_b, Id - nu nu>, per axis
  Eigen::MatrixXd R(Bs, d);
  for (int axis = 0; axis < d; ++axis) {
    for (int bi = 0; bi < Bs; ++bi) {
      // rebuild the mode with this axis: same scalar factor
      double acc = 0.0;
      for (int fi = 0; fi < F; ++fi) {
        const Facet* f = facets[fi];
        std::array<double, 3> g{};
        basis.scalar_gradient(scalar_of_axis0[bi], {f->x.data(), static_cast<size_t>(d)},
                              {g.data(), static_cast<size_t>(d)});
        double gp = 0.0;
        for (int a = 0; a < d; ++a) gp += g[a] * f->normal[a];
        acc += weights[fi] * (g[axis] - f->normal[axis] * gp);
      }
      R(bi, axis) = -acc;
    }
  }

  double tr = G.trace() / Bs;
  Eigen::MatrixXd Greg = G + 1e-12 * tr * Eigen::MatrixXd::Identity(Bs, Bs);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(Greg);
  if (ldlt.info() != Eigen::Success)
    throw std::runtime_error("mean_curvature: Gram factorization failed (degenerate facet measure)");
  Eigen::MatrixXd C = ldlt.solve(R);

  Eigen::VectorXd dvec = ldlt.vectorD();
  double dmax = dvec.maxCoeff(), dmin = dvec.minCoeff();
  out.conditioning = dmin > 0 ? dmax / dmin : std::numeric_limits<double>::infinity();
  if (dmin <= 0.0 && dmax / std::max(std::abs(dmin), 1e-300) < 1e3)
    throw std::runtime_error("mean_curvature: rank-deficient normal equations; conditioning " +
                             std::to_string(out.conditioning));

  double res_num = 0.0, res_den = 0.0;
  Eigen::MatrixXd GC = G * C;
  for (int axis = 0; axis < d; ++axis) {
    res_num += (GC.col(axis) - R.col(axis)).squaredNorm();
    res_den += R.col(axis).squaredNorm();
  }
  out.residual = res_den > 0 ? std::sqrt(res_num / res_den) : 0.0;

  // evaluate H = sum_b c_b xi_b on the facets, pair by pair
  int fi = 0;
  for (const auto& [key, fs] : mesh.pairs) {
    auto& hs = out.per_pair[key];
    hs.resize(fs.size());
    for (std::size_t k = 0; k < fs.size(); ++k, ++fi) {
      std::array<double, 3> H{};
      for (int bi = 0; bi < Bs; ++bi) {
        double sc = S(bi, fi);
        for (int axis = 0; axis < d; ++axis) H[axis] += C(bi, axis) * sc;
      }
      hs[k] = H;
    }
  }
  return out;
}

std::vector<JunctionReport> herring_check(const InterfaceMesh& mesh,
                                          const SurfaceTensionMatrix& sigma,
                                          double fit_radius_cells) {
  std::vector<JunctionReport> reports;
  const double R = fit_radius_cells * mesh.grid.h();
  const int d = mesh.grid.dim;
  for (const auto& junction : mesh.junctions) {
    JunctionReport rep;
    rep.junction = junction;
    const auto& ph = junction.phases;
    std::array<std::pair<int, int>, 3> cyc = {
        std::pair{ph[0], ph[1]}, std::pair{ph[1], ph[2]}, std::pair{ph[2], ph[0]}};
    std::array<std::array<double, 3>, 3> nu{};  // outer normal from a toward b
    std::array<std::array<double, 3>, 3> tangent{};
    bool all_found = true;
    for (int e = 0; e < 3; ++e) {
      auto [a, b] = cyc[e];
      const auto* fs = mesh.facets(a, b);
      int count = 0;
      std::array<double, 3> nacc{}, tacc{};
      if (fs) {
        for (const auto& f : *fs) {
          double dist2 = 0.0;
          std::array<double, 3> delta{};
          for (int ax = 0; ax < d; ++ax) {
            delta[ax] = mesh.grid.wrap_delta(f.x[ax] - junction.x[ax]);
            dist2 += delta[ax] * delta[ax];
          }
          if (dist2 > R * R) continue;
          ++count;
          // stored normal is nu_min (into the lower phase); flip to "a to b"
          std::array<double, 3> nab = InterfaceMesh::oriented_normal(f, b, a);
          for (int ax = 0; ax < d; ++ax) {
            nacc[ax] += f.area * nab[ax];
            tacc[ax] += f.area * delta[ax];
          }
        }
      }
      if (count < 3) {
        all_found = false;
        continue;
      }
      double nn = 0.0, tn = 0.0;
      for (int ax = 0; ax < d; ++ax) {
        nn += nacc[ax] * nacc[ax];
        tn += tacc[ax] * tacc[ax];
      }
      nn = std::sqrt(nn);
      tn = std::sqrt(tn);
      for (int ax = 0; ax < d; ++ax) {
        nu[e][ax] = nn > 1e-14 ? nacc[ax] / nn : 0.0;
        tangent[e][ax] = tn > 1e-14 ? tacc[ax] / tn : 0.0;
      }
    }
    if (!all_found) {
      rep.resolved = false;
      reports.push_back(rep);
      continue;
    }
    rep.resolved = true;
    std::array<double, 3> sum{};
    for (int e = 0; e < 3; ++e) {
      auto [a, b] = cyc[e];
      for (int ax = 0; ax < d; ++ax) sum[ax] += sigma(a, b) * nu[e][ax];
    }
    rep.residual = std::sqrt(sum[0] * sum[0] + sum[1] * sum[1] + sum[2] * sum[2]);
    if (d == 2) {
      // wedge angles between adjacent interface rays
      std::array<double, 3> theta;
      for (int e = 0; e < 3; ++e) theta[e] = std::atan2(tangent[e][1], tangent[e][0]);
      std::sort(theta.begin(), theta.end());
      rep.angles_deg = {(theta[1] - theta[0]) * 180.0 / kPi, (theta[2] - theta[1]) * 180.0 / kPi,
                        360.0 - (theta[2] - theta[0]) * 180.0 / kPi};
    }
    reports.push_back(rep);
  }
  return reports;
}

bool BvReport::pass() const {
  for (const auto& v : verdicts)
    if (v.status == "fail") return false;
  return true;
}

BvReport bv_certificate(Spectral& sp, const std::vector<SharpSnapshot>& run,
                        const SurfaceTensionMatrix& sigma, const BvParams& params) {
  if (run.size() < 2) throw std::invalid_argument("bv_certificate: need at least two snapshots");
  for (std::size_t k = 1; k + 1 < run.size(); ++k) {
    double d1 = run[k].t - run[k - 1].t, d2 = run[k + 1].t - run[k].t;
    if (std::abs(d1 - d2) > 1e-9 * std::max(d1, d2))
      throw std::invalid_argument("bv_certificate: snapshots must be uniformly spaced");
  }
  BvReport rep;
  const int d = run.front().partition.grid.dim;
  const double hd = std::pow(run.front().partition.grid.h(), d);
  FourierTestBasis basis(d, run.front().partition.grid.length,
                         std::min(params.basis_kmax, run.front().partition.grid.n / 8));

  std::vector<double> energies(run.size());
  for (std::size_t k = 0; k < run.size(); ++k) energies[k] = perimeter_energy(run[k].mesh, sigma);
  rep.energy_initial = energies.front();
  rep.energy_final = energies.back();

  double vel_int = 0.0, curv_int = 0.0;
  bool any_under_resolved = false;
  double worst_residual = 0.0;
  double worst_ratio = 0.0;
  for (std::size_t k = 0; k + 1 < run.size(); ++k) {
    double dt = run[k + 1].t - run[k].t;
    VelocityField V = normal_velocity(sp, run[k].partition, run[k + 1].partition, run[k].mesh, dt);
    any_under_resolved = any_under_resolved || V.under_resolved;
    CurvatureField H = mean_curvature(run[k].mesh, sigma, basis);
    worst_residual = std::max(worst_residual, H.residual);
    double v2 = 0.0, h2 = 0.0;
    for (const auto& [key, fs] : run[k].mesh.pairs) {
      double s = sigma(key.first, key.second);
      const auto& vs = V.per_pair.at(key);
      const auto& hs = H.per_pair.at(key);
      for (std::size_t f = 0; f < fs.size(); ++f) {
        v2 += s * fs[f].area * vs[f] * vs[f];
        double hh = 0.0;
        for (int a = 0; a < d; ++a) hh += hs[f][a] * hs[f][a];
        h2 += s * fs[f].area * hh;
      }
    }
    vel_int += v2 * dt;
    curv_int += h2 * dt;
    double lhs = energies[k + 1] + 0.5 * (vel_int + curv_int);
    worst_ratio = std::max(worst_ratio, lhs / std::max(energies.front(), 1e-300));
  }
  rep.dissipation_lhs_over_rhs = worst_ratio;

  // (1) square-integrable velocities
  bool finite = std::isfinite(vel_int);
  rep.verdicts.push_back({"velocity_square_integrable", finite ? "pass" : "fail", vel_int,
                          any_under_resolved ? "some displacements exceeded 3 cells/step" : ""});

  // (2) curvature residual
  rep.verdicts.push_back({"curvature_residual",
                          worst_residual < params.curvature_residual_threshold ? "pass" : "fail",
                          worst_residual, ""});

  // (3) optimal dissipation inequality; inconclusive when the velocity
  // estimate itself is unreliable
  std::string st3 = worst_ratio <= 1.0 + params.dissipation_slack ? "pass" : "fail";
  if (any_under_resolved) st3 = "inconclusive";
  rep.verdicts.push_back({"dissipation_inequality", st3, worst_ratio, ""});

  // (4) initial data attained: distance to chi(0) shrinks toward t = 0
  rep.initial_distance.resize(run.size());
  for (std::size_t k = 0; k < run.size(); ++k) {
    std::size_t mismatch = 0;
    for (std::size_t c = 0; c < run[k].partition.labels.size(); ++c)
      mismatch += run[k].partition.labels[c] != run[0].partition.labels[c];
    rep.initial_distance[k] = std::sqrt(2.0 * hd * static_cast<double>(mismatch));
  }
  bool monotone = true;
  std::size_t kmax = std::min<std::size_t>(run.size() - 1, 4);
  for (std::size_t k = 1; k < kmax; ++k)
    monotone = monotone && rep.initial_distance[k] <= rep.initial_distance[k + 1] + 1e-12 +
                               0.05 * rep.initial_distance[k + 1];
  double per0 = energies.front() / std::max(sigma.max_sigma(), 1e-300);
  double floor = std::sqrt(6.0 * run.front().partition.grid.h() * std::max(per0, 1e-300));
  bool attained = rep.initial_distance[1] <= 2.0 * floor + 1e-12;
  rep.verdicts.push_back({"initial_data_attained", (monotone && attained) ? "pass" : "fail",
                          rep.initial_distance[1],
                          "resolution floor " + std::to_string(floor)});
  return rep;
}

}  // namespace dgflow
