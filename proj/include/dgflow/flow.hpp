#pragma once

#include <functional>
#include <vector>

#include "dgflow/torus.hpp"

namespace dgflow {

enum class Scheme { SemiImplicit, MinimizingMovements };

struct LedgerRow {
  double t = 0.0;
  double energy = 0.0;
  double dirichlet = 0.0;
  double potential = 0.0;
  double velocity_cum = 0.0;   // sum of int eps |du/dt|^2 dx dt
  double curvature_cum = 0.0;  // sum of int (1/eps) |eps Lap u - (1/eps) grad W|^2 dx dt
  double slack = 0.0;          // E(0) - E(t) - velocity_cum
};

struct DissipationLedger {
  std::vector<LedgerRow> rows;
  bool monotone(double tol) const;
};

struct StepInfo {
  int iterations = 0;
  double residual = 0.0;
  bool hit_cap = false;
};

// One linearly-implicit step: the Laplacian and a frozen curvature constant
// of W_conv are treated implicitly and inverted in Fourier space; the
// remainder of grad W_conv is lagged through fixed-point sweeps and the
// perturbation gradient stays explicit. Throws if the sweeps stall, which
// signals that tau is too large for the contraction.
PhaseField step_semi_implicit(Spectral& sp, const PhaseField& u, const MultiwellPotential& p,
                              const PotentialSplit& split, double tau, StepInfo* info = nullptr);

// One implicit (minimizing movements) step: approximately minimizes
//   J(v) = (eps / 2 tau) ||v - u||^2 + E_eps(v)
// by Barzilai-Borwein descent seeded with the semi-implicit step. The result
// never increases J, hence never increases the energy.
PhaseField step_minimizing_movements(Spectral& sp, const PhaseField& u, const MultiwellPotential& p,
                                     const PotentialSplit& split, double tau, double inner_tol,
                                     StepInfo* info = nullptr);

// int (1/eps) |eps Lap u - (1/eps) grad W(u)|^2 dx
double curvature_term(Spectral& sp, const PhaseField& u, const MultiwellPotential& p);

struct FlowParams {
  Scheme scheme = Scheme::SemiImplicit;
  double tau = 0.0;       // defaults to eps^2 / 4 when <= 0
  double horizon = 0.0;
  double inner_tol = 1e-7;
  int snapshot_every = 0;  // steps between snapshot callbacks; 0 = never
};

struct FlowResult {
  PhaseField field;
  DissipationLedger ledger;
  bool aborted = false;     // NaN encountered; field holds the last good state
  bool flagged = false;     // some inner solve hit its cap
  double end_time = 0.0;
};

using SnapshotFn = std::function<void(int step, double t, const PhaseField&)>;

FlowResult run_flow(Spectral& sp, const PhaseField& u0, const MultiwellPotential& p,
                    const PotentialSplit& split, const FlowParams& params,
                    const SnapshotFn& on_snapshot = nullptr);

}  // namespace dgflow
