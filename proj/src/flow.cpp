#include "dgflow/flow.hpp"

#include <algorithm>
#include <cmath>

namespace dgflow {

namespace {

double linf_scale(const PhaseField& u) {
  double m = 0.0;
  for (double v : u.f.data) m = std::max(m, std::abs(v));
  return std::max(m, 1.0);
}

Field grad_w_field(const Field& f, const std::function<Vec(const Vec&)>& grad, int N) {
  Field out(f.grid, N);
  Vec uc(N);
  for (std::size_t cell = 0; cell < f.grid.cell_count(); ++cell) {
    for (int c = 0; c < N; ++c) uc[c] = f.data[cell * N + c];
    Vec g = grad(uc);
    for (int c = 0; c < N; ++c) out.data[cell * N + c] = g[c];
  }
  return out;
}

}  // namespace

bool DissipationLedger::monotone(double tol) const {
  for (std::size_t k = 1; k < rows.size(); ++k)
    if (rows[k].energy > rows[k - 1].energy + tol) return false;
  return true;
}

PhaseField step_semi_implicit(Spectral& sp, const PhaseField& u, const MultiwellPotential& p,
                              const PotentialSplit& split, double tau, StepInfo* info) {
  if (tau <= 0.0) throw std::invalid_argument("step_semi_implicit: tau must be positive");
  const int N = u.ncomp();
  const double eps = u.epsilon;
  const double eps2 = eps * eps;
  const double umax = linf_scale(u);
  // frozen curvature constant; L/2 gives the best fixed-point contraction
  const double c = 0.5 * split.conv_curvature_bound(p, 1.1 * umax * std::sqrt(double(N)));

  Field pert = grad_w_field(u.f, split.pert_grad, N);
  Field v = u.f;  // iterate, warm start at u
  Field rhs(u.grid(), N);
  const double a = 1.0 / tau + c / eps2;
  const double scale = linf_scale(u);

  int sweep = 0;
  double res = 0.0;
  const int max_sweeps = 50;
  for (; sweep < max_sweeps; ++sweep) {
    Field conv = grad_w_field(v, split.conv_grad, N);
    for (std::size_t i = 0; i < rhs.data.size(); ++i)
      rhs.data[i] = u.f.data[i] / tau + (c * v.data[i] - conv.data[i] - pert.data[i]) / eps2;
    Field next = sp.helmholtz_solve(rhs, a, 1.0);
    res = 0.0;
    for (std::size_t i = 0; i < next.data.size(); ++i)
      res = std::max(res, std::abs(next.data[i] - v.data[i]));
    v = std::move(next);
    if (res / scale < 1e-9) {
      ++sweep;
      break;
    }
  }
  if (info) {
    info->iterations = sweep;
    info->residual = res / scale;
    info->hit_cap = sweep >= max_sweeps && res / scale >= 1e-9;
  }
  if (sweep >= max_sweeps && res / scale >= 1e-9)
    throw NotConverged("step_semi_implicit: fixed-point sweeps stalled; reduce tau");
  PhaseField out;
  out.f = std::move(v);
  out.epsilon = eps;
  return out;
}

namespace {

// J(v) = (eps / 2 tau) ||v-u||^2 + E_eps(v), gradients in L^2(h^d dx)
struct Objective {
  Spectral& sp;
  const PhaseField& u;
  const MultiwellPotential& p;
  double tau;
  double hd;

  double value(const Field& v) const {
    PhaseField tmp{v, u.epsilon};
    double e = energy(sp, tmp, p).total;
    double q = 0.0;
    for (std::size_t i = 0; i < v.data.size(); ++i) {
      double dlt = v.data[i] - u.f.data[i];
      q += dlt * dlt;
    }
    return e + 0.5 * u.epsilon / tau * q * hd;
  }

  Field gradient(const Field& v) const {
    const int N = u.ncomp();
    Field lap = sp.laplacian(v);
    Field g(v.grid, N);
    Vec uc(N);
    for (std::size_t cell = 0; cell < v.grid.cell_count(); ++cell) {
      for (int c = 0; c < N; ++c) uc[c] = v.data[cell * N + c];
      Vec gw = p.gradient(uc);
      for (int c = 0; c < N; ++c) {
        std::size_t i = cell * N + c;
        g.data[i] = u.epsilon / tau * (v.data[i] - u.f.data[i]) - u.epsilon * lap.data[i] +
                    gw[c] / u.epsilon;
      }
    }
    return g;
  }
};

double l2_norm(const Field& f, double hd) {
  double s = 0.0;
  for (double v : f.data) s += v * v;
  return std::sqrt(s * hd);
}

}  // namespace

PhaseField step_minimizing_movements(Spectral& sp, const PhaseField& u, const MultiwellPotential& p,
                                     const PotentialSplit& split, double tau, double inner_tol,
                                     StepInfo* info) {
  if (tau <= 0.0) throw std::invalid_argument("step_minimizing_movements: tau must be positive");
  const double hd = std::pow(u.grid().h(), u.grid().dim);
  const double eps = u.epsilon;
  Objective J{sp, u, p, tau, hd};

  Field v = u.f;
  double Ju = J.value(v);
  try {
    v = step_semi_implicit(sp, u, p, split, tau).f;
  } catch (const NotConverged&) {
    v = u.f;  // descent below still makes progress
  }
  double Jv = J.value(v);
  if (Jv > Ju) {
    v = u.f;
    Jv = Ju;
  }

  // Descent runs on the preconditioned gradient P^{-1} grad J with
  //   P = eps/tau - eps Lap + c/eps,
  // which inverts the stiff linear part exactly; Barzilai-Borwein scaling
  // then only has to track the bounded nonlinearity of grad W.
  const double umax = linf_scale(u);
  const double c = split.conv_curvature_bound(p, 1.1 * umax * std::sqrt(double(u.ncomp()))) +
                   split.hessian_bound;
  const double a_shift = eps / tau + c / eps;
  auto precond = [&](const Field& g) { return sp.helmholtz_solve(g, a_shift, eps); };

  Field g = J.gradient(v);
  double gn = l2_norm(g, hd);
  Field pg = precond(g);
  const int cap = 10000;
  const int memory = 8;  // nonmonotone acceptance window
  std::vector<double> recent = {Jv};
  double alpha = 1.0;
  Field best = v;
  double Jbest = Jv;
  int it = 0;
  for (; it < cap && gn > inner_tol; ++it) {
    double gpg = 0.0;  // <g, P^{-1} g>, positive
    for (std::size_t i = 0; i < g.data.size(); ++i) gpg += g.data[i] * pg.data[i];
    gpg *= hd;
    double Jmax = *std::max_element(recent.begin(), recent.end());
    double s = alpha;
    Field vn;
    double Jn = 0.0;
    bool accepted = false;
    for (int att = 0; att < 40; ++att) {
      vn = v;
      for (std::size_t i = 0; i < vn.data.size(); ++i) vn.data[i] -= s * pg.data[i];
      Jn = J.value(vn);
      if (Jn <= Jmax - 1e-4 * s * gpg) {
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    if (!accepted) break;  // stagnation at rounding level

    Field g_new = J.gradient(vn);
    Field pg_new = precond(g_new);
    // BB1 in the preconditioned metric
    double ss = 0.0, sy = 0.0;
    for (std::size_t i = 0; i < vn.data.size(); ++i) {
      double si = vn.data[i] - v.data[i];
      double yi = pg_new.data[i] - pg.data[i];
      ss += si * si;
      sy += si * yi;
    }
    alpha = sy > 1e-300 ? std::clamp(ss / sy, 1e-3, 1e3) : 1.0;
    v = std::move(vn);
    g = std::move(g_new);
    pg = std::move(pg_new);
    gn = l2_norm(g, hd);
    Jv = Jn;
    recent.push_back(Jv);
    if (static_cast<int>(recent.size()) > memory) recent.erase(recent.begin());
    if (Jv < Jbest) {
      Jbest = Jv;
      best = v;
    }
  }
  if (info) {
    info->iterations = it;
    info->residual = gn;
    info->hit_cap = it >= cap && gn > inner_tol;
  }
  PhaseField out;
  out.f = std::move(best);
  out.epsilon = eps;
  return out;
}

double curvature_term(Spectral& sp, const PhaseField& u, const MultiwellPotential& p) {
  const int N = u.ncomp();
  const double eps = u.epsilon;
  Field lap = sp.laplacian(u.f);
  const double hd = std::pow(u.grid().h(), u.grid().dim);
  double acc = 0.0;
  Vec uc(N);
  for (std::size_t cell = 0; cell < u.f.cells(); ++cell) {
    for (int c = 0; c < N; ++c) uc[c] = u.f.at(cell, c);
    Vec gw = p.gradient(uc);
    double s = 0.0;
    for (int c = 0; c < N; ++c) {
      double r = eps * lap.at(cell, c) - gw[c] / eps;
      s += r * r;
    }
    acc += s;
  }
  return acc * hd / eps;
}

FlowResult run_flow(Spectral& sp, const PhaseField& u0, const MultiwellPotential& p,
                    const PotentialSplit& split, const FlowParams& params,
                    const SnapshotFn& on_snapshot) {
  FlowResult res;
  double tau = params.tau > 0.0 ? params.tau : 0.25 * u0.epsilon * u0.epsilon;
  if (params.horizon <= 0.0) throw std::invalid_argument("run_flow: horizon must be positive");
  const int steps = static_cast<int>(std::llround(params.horizon / tau));
  const double hd = std::pow(u0.grid().h(), u0.grid().dim);
  const double eps = u0.epsilon;

  PhaseField u = u0;
  EnergyBreakdown e0 = energy(sp, u, p);
  double E0 = e0.total;
  res.ledger.rows.push_back({0.0, e0.total, e0.dirichlet, e0.potential, 0.0, 0.0, 0.0});
  if (on_snapshot) on_snapshot(0, 0.0, u);

  double vel_cum = 0.0, curv_cum = 0.0;
  for (int k = 0; k < steps; ++k) {
    double curv = curvature_term(sp, u, p);  // left endpoint of the step
    StepInfo info;
    PhaseField next = params.scheme == Scheme::SemiImplicit
                          ? step_semi_implicit(sp, u, p, split, tau, &info)
                          : step_minimizing_movements(sp, u, p, split, tau, params.inner_tol, &info);
    res.flagged = res.flagged || info.hit_cap;
    if (!all_finite(next.f.data)) {
      res.aborted = true;
      break;
    }
    double vel = 0.0;
    for (std::size_t i = 0; i < next.f.data.size(); ++i) {
      double d = next.f.data[i] - u.f.data[i];
      vel += d * d;
    }
    vel *= eps * hd / tau;  // int eps |du/dt|^2 dx, times tau below
    vel_cum += vel;
    curv_cum += curv * tau;
    u = std::move(next);
    double t = (k + 1) * tau;
    EnergyBreakdown e = energy(sp, u, p);
    res.ledger.rows.push_back(
        {t, e.total, e.dirichlet, e.potential, vel_cum, curv_cum, E0 - e.total - vel_cum});
    if (on_snapshot && params.snapshot_every > 0 && (k + 1) % params.snapshot_every == 0)
      on_snapshot(k + 1, t, u);
  }
  res.field = std::move(u);
  res.end_time = res.ledger.rows.back().t;
  return res;
}

}  // namespace dgflow
