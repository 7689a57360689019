#include "dgflow/geodesic.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dgflow {

namespace {

double integrand(const MultiwellPotential& p, const Vec& x) { return std::sqrt(2.0 * p.value(x)); }

// d/dx sqrt(2W) = grad W / sqrt(2W); bounded near nondegenerate wells but
// not continuous there, so clamp the tiny-W case.
Vec integrand_grad(const MultiwellPotential& p, const Vec& x) {
  double w = p.value(x);
  Vec g = p.gradient(x);
  double denom = std::sqrt(2.0 * std::max(w, 1e-300));
  if (denom < 1e-12) {
    // at a well: use a one-sided slope estimate along g (vanishes anyway)
    denom = 1e-12;
  }
  g *= 1.0 / denom;
  return g;
}

// resample nodes uniformly in arc length; companion fields (e.g. a momentum
// field) are interpolated along with them
void resample_by_arclength(std::vector<Vec>& nodes, std::vector<Vec>* companion = nullptr) {
  const int M = static_cast<int>(nodes.size()) - 1;
  std::vector<double> cum(M + 1, 0.0);
  for (int k = 1; k <= M; ++k) cum[k] = cum[k - 1] + dist(nodes[k], nodes[k - 1]);
  double L = cum[M];
  if (L < 1e-300) return;
  std::vector<Vec> out(nodes.size());
  std::vector<Vec> out_c;
  if (companion) out_c.resize(nodes.size(), Vec(nodes.front().size()));
  out.front() = nodes.front();
  out.back() = nodes.back();
  if (companion) {
    out_c.front() = companion->front();
    out_c.back() = companion->back();
  }
  int seg = 0;
  for (int k = 1; k < M; ++k) {
    double target = L * k / M;
    while (seg < M - 1 && cum[seg + 1] < target) ++seg;
    double t = (target - cum[seg]) / std::max(cum[seg + 1] - cum[seg], 1e-300);
    out[k] = nodes[seg] + t * (nodes[seg + 1] - nodes[seg]);
    if (companion) out_c[k] = (*companion)[seg] + t * ((*companion)[seg + 1] - (*companion)[seg]);
  }
  nodes.swap(out);
  if (companion) companion->swap(out_c);
}

}  // namespace

double path_action(const MultiwellPotential& p, const std::vector<Vec>& nodes) {
  if (nodes.size() < 2) throw std::invalid_argument("path_action: need at least two nodes");
  double a = 0.0;
  double g_prev = integrand(p, nodes.front());
  for (std::size_t k = 1; k < nodes.size(); ++k) {
    double g = integrand(p, nodes[k]);
    a += 0.5 * (g_prev + g) * dist(nodes[k], nodes[k - 1]);
    g_prev = g;
  }
  return a;
}

GeodesicPath relax_geodesic(const MultiwellPotential& p, const Vec& u, const Vec& v, int node_count,
                            int budget, double rel_tol, const std::vector<Vec>* initial) {
  GeodesicPath out;
  if (dist(u, v) == 0.0) {
    out.nodes.assign(std::max(node_count, 1) + 1, u);
    out.action = 0.0;
    out.converged = true;
    return out;
  }
  if (node_count < 16) throw std::invalid_argument("relax_geodesic: need at least 16 nodes");
  const int M = node_count;
  const int N = u.size();

  std::vector<Vec> nodes;
  if (initial && static_cast<int>(initial->size()) == M + 1) {
    nodes = *initial;
    nodes.front() = u;
    nodes.back() = v;
  } else {
    nodes.resize(M + 1);
    for (int k = 0; k <= M; ++k) {
      double t = static_cast<double>(k) / M;
      nodes[k] = u + t * (v - u);
    }
  }

  double action = path_action(p, nodes);
  std::vector<Vec> grad(M + 1, Vec(N));
  std::vector<Vec> momentum(M + 1, Vec(N));
  std::vector<Vec> trial(M + 1, Vec(N));
  double step = 0.1 * dist(u, v) / M;
  const double beta = 0.85;  // heavy-ball factor; reset on uphill moves

  // convergence is judged on a sliding window so momentum oscillations do
  // not trigger an early stop
  const int window = 16;
  std::vector<double> history;
  history.reserve(budget + 1);
  history.push_back(action);

  int sweep = 0;
  for (; sweep < budget; ++sweep) {
    // gradient of the discrete action wrt interior nodes
    std::vector<double> g(M + 1), len(M);
    for (int k = 0; k <= M; ++k) g[k] = integrand(p, nodes[k]);
    for (int k = 0; k < M; ++k) len[k] = dist(nodes[k + 1], nodes[k]);
    double gnorm2 = 0.0;
    for (int k = 1; k < M; ++k) {
      Vec gi = integrand_grad(p, nodes[k]);
      gi *= 0.5 * (len[k - 1] + len[k]);
      if (len[k - 1] > 1e-300) {
        Vec d = nodes[k] - nodes[k - 1];
        d *= 0.5 * (g[k - 1] + g[k]) / len[k - 1];
        gi += d;
      }
      if (len[k] > 1e-300) {
        Vec d = nodes[k] - nodes[k + 1];
        d *= 0.5 * (g[k] + g[k + 1]) / len[k];
        gi += d;
      }
      grad[k] = gi;
      gnorm2 += dot(gi, gi);
    }
    if (gnorm2 < 1e-300) {
      out.converged = true;
      break;
    }

    trial = nodes;
    for (int k = 1; k < M; ++k) {
      momentum[k] *= beta;
      momentum[k] -= step * grad[k];
      trial[k] += momentum[k];
    }
    double new_action = path_action(p, trial);
    if (new_action < action) {
      nodes.swap(trial);
      step = std::min(step * 1.05, 10.0 * dist(u, v) / M);
    } else {
      for (auto& m : momentum) m = Vec(N);
      step *= 0.5;
    }
    resample_by_arclength(nodes, &momentum);
    action = path_action(p, nodes);
    history.push_back(action);
    if (static_cast<int>(history.size()) > window) {
      double drop = history[history.size() - 1 - window] - action;
      if (std::abs(drop) / window < rel_tol * std::max(action, 1e-30)) {
        out.converged = true;
        ++sweep;
        break;
      }
    }
  }

  out.nodes = std::move(nodes);
  out.action = action;
  out.sweeps = sweep;
  return out;
}

SurfaceTensionMatrix::SurfaceTensionMatrix(int phases, double tolerance)
    : phases_(phases), tolerance_(tolerance), sigma_(static_cast<size_t>(phases) * phases, 0.0) {}

double SurfaceTensionMatrix::max_sigma() const {
  double m = 0.0;
  for (double s : sigma_) m = std::max(m, s);
  return m;
}

void SurfaceTensionMatrix::check_metric_axioms() const {
  for (int i = 0; i < phases_; ++i)
    for (int j = 0; j < phases_; ++j)
      for (int k = 0; k < phases_; ++k) {
        double lhs = (*this)(i, k);
        double rhs = (*this)(i, j) + (*this)(j, k);
        if (lhs > rhs + tolerance_) {
          std::ostringstream os;
          os << "surface tensions violate the triangle inequality: sigma(" << i << "," << k
             << ")=" << lhs << " > " << rhs << " + tol; the relaxation failed to find a geodesic";
          throw std::runtime_error(os.str());
        }
      }
}

SurfaceTensionMatrix surface_tensions(const MultiwellPotential& p, const GeodesicParams& params,
                                      int threads) {
  const int P = p.well_count();
  if (P < 2) throw std::invalid_argument("surface_tensions: need at least two wells");
  const int N = p.ambient_dim();

  struct Entry {
    int i, j;
  };
  std::vector<Entry> entries;
  for (int i = 0; i < P; ++i)
    for (int j = i + 1; j < P; ++j) entries.push_back({i, j});

  std::vector<double> best(entries.size(), 0.0);
  std::vector<bool> conv(entries.size(), false);

  parallel_for(entries.size(), threads, [&](std::size_t e) {
    const Vec& a = p.well(entries[e].i);
    const Vec& b = p.well(entries[e].j);
    double best_action = std::numeric_limits<double>::infinity();
    bool any_converged = false;
    for (int r = 0; r < std::max(1, params.restarts); ++r) {
      std::vector<Vec> init(params.nodes + 1, Vec(N));
      Rng rng(mix_seed(params.seed, (static_cast<uint64_t>(entries[e].i) << 16) | entries[e].j, r));
      std::normal_distribution<double> gauss(0.0, 1.0);
      bool reversed = (r % 2 == 1);
      const Vec& from = reversed ? b : a;
      const Vec& to = reversed ? a : b;
      Vec dir = to - from;
      // transverse bump: random direction orthogonalized against the chord
      Vec t(N);
      if (r >= 2) {
        for (int c = 0; c < N; ++c) t[c] = gauss(rng);
        double proj = dot(t, dir) / std::max(dot(dir, dir), 1e-300);
        for (int c = 0; c < N; ++c) t[c] -= proj * dir[c];
        double tn = norm(t);
        if (tn > 1e-12)
          t *= 0.25 * norm(dir) / tn;
        else
          t = Vec(N);
      }
      for (int k = 0; k <= params.nodes; ++k) {
        double s = static_cast<double>(k) / params.nodes;
        init[k] = from + s * (to - from) + (std::sin(kPi * s)) * t;
      }
      GeodesicPath path =
          relax_geodesic(p, from, to, params.nodes, params.budget, params.rel_tol, &init);
      if (path.action < best_action) best_action = path.action;
      any_converged = any_converged || path.converged;
    }
    best[e] = best_action;
    conv[e] = any_converged;
  });

  double sigma_max = 0.0;
  for (double s : best) sigma_max = std::max(sigma_max, s);
  SurfaceTensionMatrix m(P, 1e-6 + 1e-4 * sigma_max);
  bool warning = false;
  for (std::size_t e = 0; e < entries.size(); ++e) {
    m.at(entries[e].i, entries[e].j) = best[e];
    m.at(entries[e].j, entries[e].i) = best[e];
    warning = warning || !conv[e];
  }
  m.set_warning(warning);
  m.check_metric_axioms();
  return m;
}

double phi(const MultiwellPotential& p, int well_index, const Vec& u, int node_count, int budget) {
  if (well_index < 0 || well_index >= p.well_count())
    throw std::invalid_argument("phi: well index out of range");
  return relax_geodesic(p, p.well(well_index), u, node_count, budget).action;
}

}  // namespace dgflow
