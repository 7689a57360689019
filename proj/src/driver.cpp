#include "dgflow/driver.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <iostream>

namespace dgflow {

namespace fs = std::filesystem;
using ordered_json = nlohmann::ordered_json;

namespace {

void write_json(const fs::path& path, const ordered_json& j) {
  std::ofstream out(path);
  out << j.dump(2) << "\n";
}

SurfaceTensionMatrix tensions_for(const Scenario& s, const MultiwellPotential& p, int threads) {
  GeodesicParams gp = s.geodesic;
  gp.seed = s.seed;
  return surface_tensions(p, gp, threads);
}

ordered_json bv_report_json(const BvReport& rep) {
  ordered_json j;
  j["energy_initial"] = rep.energy_initial;
  j["energy_final"] = rep.energy_final;
  j["dissipation_lhs_over_rhs"] = rep.dissipation_lhs_over_rhs;
  j["initial_distance"] = rep.initial_distance;
  ordered_json verdicts = ordered_json::array();
  for (const auto& v : rep.verdicts) {
    ordered_json jv;
    jv["name"] = v.name;
    jv["status"] = v.status;
    jv["measured"] = v.measured;
    if (!v.note.empty()) jv["note"] = v.note;
    verdicts.push_back(jv);
  }
  j["verdicts"] = verdicts;
  j["pass"] = rep.pass();
  return j;
}

ordered_json varifold_report_json(const VarifoldRunReport& rep) {
  ordered_json j;
  ordered_json verdicts = ordered_json::array();
  for (const auto& v : rep.worst_compatibility.verdicts) {
    ordered_json jv;
    jv["name"] = v.name;
    jv["status"] = v.status;
    jv["residual"] = v.residual;
    verdicts.push_back(jv);
  }
  j["compatibility"] = verdicts;
  j["dissipation"] = {{"omega0", rep.dissipation.omega0},
                      {"worst_ratio", rep.dissipation.worst_ratio},
                      {"pass", rep.dissipation.pass},
                      {"lhs", rep.dissipation.lhs}};
  j["mu11_seam_mass"] = rep.mu11_seam_mass;
  j["mu11_mean_orientation"] = rep.mu11_mean_orientation;
  return j;
}

}  // namespace

int run_scenario(const Scenario& scenario, const fs::path& out_dir, const RunOptions& opts) {
  Scenario s = scenario;
  if (opts.seed) s.seed = *opts.seed;
  s.validate();
  RunArchive archive(out_dir, /*create=*/true);
  archive.write_scenario(s);

  MultiwellPotential p = s.make_potential();
  PotentialSplit split = PotentialSplit::standard(p);
  Spectral sp(s.grid);

  PhaseField u0;
  if (s.init == InitKind::Checkpoint)
    u0 = read_checkpoint(s.init_checkpoint);
  else
    u0 = initial_data(s, p);

  FlowParams fp;
  fp.scheme = s.scheme;
  fp.tau = s.resolved_tau();
  fp.horizon = s.horizon;
  fp.inner_tol = s.inner_tol;
  fp.snapshot_every = static_cast<int>(std::llround(s.resolved_cadence() / fp.tau));

  int snapshot_index = 0;
  auto on_snapshot = [&](int step, double t, const PhaseField& u) {
    (void)step;
    write_checkpoint(archive.checkpoint_path(snapshot_index), u, t);
    ++snapshot_index;
  };
  FlowResult result = run_flow(sp, u0, p, split, fp, on_snapshot);
  if (s.diag_ledger) write_ledger_csv(archive.dir() / "ledger.csv", result.ledger);
  if (result.aborted) {
    std::cerr << "dgflow: NaN in field; last good checkpoint "
              << archive.checkpoint_path(snapshot_index - 1) << "\n";
    return 3;
  }
  if (s.diag_bv) verify_bv(archive, opts.threads);
  if (s.diag_varifold) verify_varifold(archive, opts.threads);
  if (s.diag_localize) {
    auto levels = localize(archive, s.covering_radius, s.covering_levels, opts.threads);
    ordered_json j = ordered_json::array();
    for (const auto& lv : levels)
      j.push_back({{"radius", lv.radius},
                   {"total_error", lv.total_error},
                   {"surrogate_total", lv.surrogate_total}});
    write_json(archive.report_path("localize"), j);
  }
  return 0;
}

namespace {

struct LoadedRun {
  Scenario scenario;
  MultiwellPotential potential;
  SurfaceTensionMatrix sigma;
  std::vector<double> times;
  std::vector<PhaseField> fields;

  LoadedRun(const RunArchive& archive, int threads)
      : scenario(archive.read_scenario()),
        potential(scenario.make_potential()),
        sigma(tensions_for(scenario, potential, threads)) {
    for (int idx : archive.snapshots()) {
      double t = 0.0;
      fields.push_back(read_checkpoint(archive.checkpoint_path(idx), &t));
      times.push_back(t);
    }
    if (fields.empty()) throw std::runtime_error("archive has no checkpoints");
  }
};

}  // namespace

BvReport verify_bv(const RunArchive& archive, int threads) {
  LoadedRun run(archive, threads);
  Spectral sp(run.scenario.grid);
  std::vector<SharpSnapshot> snaps(run.fields.size());
  for (std::size_t k = 0; k < run.fields.size(); ++k) {
    snaps[k].t = run.times[k];
    snaps[k].partition = project(run.fields[k], run.potential);
    snaps[k].partition.time = run.times[k];
    snaps[k].mesh = interface_mesh(sp, snaps[k].partition, run.scenario.mesh);
  }
  BvReport rep = bv_certificate(sp, snaps, run.sigma, run.scenario.bv);

  // facet dumps with velocities and curvature attached
  FourierTestBasis basis(run.scenario.grid.dim, run.scenario.grid.length,
                         std::min(run.scenario.bv.basis_kmax, run.scenario.grid.n / 8));
  for (std::size_t k = 0; k < snaps.size(); ++k) {
    CurvatureField H = mean_curvature(snaps[k].mesh, run.sigma, basis);
    if (k + 1 < snaps.size()) {
      VelocityField V = normal_velocity(sp, snaps[k].partition, snaps[k + 1].partition,
                                        snaps[k].mesh, run.times[k + 1] - run.times[k]);
      write_facets_csv(archive.facets_path(static_cast<int>(k)), snaps[k].mesh, &V, &H);
    } else {
      write_facets_csv(archive.facets_path(static_cast<int>(k)), snaps[k].mesh, nullptr, &H);
    }
  }
  write_json(archive.report_path("bv"), bv_report_json(rep));
  return rep;
}

VarifoldRunReport verify_varifold(const RunArchive& archive, int threads) {
  LoadedRun run(archive, threads);
  Spectral sp(run.scenario.grid);
  const bool from_field = run.scenario.varifold_source == "field";
  BallCovering covering = build_covering(run.scenario.grid, run.scenario.covering_radius);

  VarifoldRunReport out;
  std::vector<VarifoldSnapshot> vsnaps(run.fields.size());
  CompatibilityReport worst;
  double worst_score = -1.0;
  for (std::size_t k = 0; k < run.fields.size(); ++k) {
    Partition chi = project(run.fields[k], run.potential);
    chi.time = run.times[k];
    InterfaceMesh mesh = interface_mesh(sp, chi, run.scenario.mesh);
    DiscreteVarifold v;
    if (from_field) {
      FieldLiftParams lp;
      lp.threshold_rel = run.scenario.varifold_threshold_rel;
      lp.mesh = run.scenario.mesh;
      lp.geodesic = run.scenario.geodesic;
      v = lift_from_field(sp, run.fields[k], run.potential, run.sigma, covering, lp);
    } else {
      v = lift_from_partition(mesh, run.sigma);
    }
    v.time = run.times[k];
    vsnaps[k].t = run.times[k];
    if (k + 1 < run.fields.size() && !from_field) {
      Partition chi_next = project(run.fields[k + 1], run.potential);
      VelocityField V =
          normal_velocity(sp, chi, chi_next, mesh, run.times[k + 1] - run.times[k]);
      vsnaps[k].velocities = V.per_pair;
    }
    CompatibilityReport rep =
        compatibility_check(v, mesh, run.sigma, nullptr, run.scenario.compat);
    double score = 0.0;
    for (const auto& vd : rep.verdicts) score += vd.residual;
    if (score > worst_score) {
      worst_score = score;
      worst = rep;
    }
    write_varifold_csv(archive.varifold_path(static_cast<int>(k)), v);
    vsnaps[k].varifold = std::move(v);
  }
  out.worst_compatibility = worst;

  const DiscreteVarifold& last = vsnaps.back().varifold;
  for (int i = 0; i < last.nphases; ++i) {
    out.mu11_seam_mass += last.pair_mass(i, i);
    auto bins = last.binned(i, i);
    double mass = 0.0;
    std::array<double, 3> first{};
    for (const auto& [cell, m] : bins) {
      mass += m.mass;
      for (int a = 0; a < 3; ++a) first[a] += m.first[a];
    }
    if (mass > 0)
      out.mu11_mean_orientation =
          std::max(out.mu11_mean_orientation,
                   std::sqrt(first[0] * first[0] + first[1] * first[1] + first[2] * first[2]) / mass);
  }

  FourierTestBasis basis(run.scenario.grid.dim, run.scenario.grid.length,
                         run.scenario.compat.basis_kmax);
  if (vsnaps.size() >= 2) {
    double omega0 = vsnaps.front().varifold.omega_total();
    out.dissipation = varifold_dissipation_check(vsnaps, omega0, basis);
  } else {
    out.dissipation.omega0 = vsnaps.front().varifold.omega_total();
    out.dissipation.worst_ratio = 1.0;
    out.dissipation.pass = true;
  }
  write_json(archive.report_path("varifold"), varifold_report_json(out));
  return out;
}

std::vector<LocalizeLevel> localize(const RunArchive& archive, double radius, int levels,
                                    int threads) {
  LoadedRun run(archive, threads);
  Spectral sp(run.scenario.grid);
  Partition chi = project(run.fields.back(), run.potential);
  InterfaceMesh mesh = interface_mesh(sp, chi, run.scenario.mesh);
  std::vector<LocalizeLevel> out;
  double r = radius;
  for (int l = 0; l < levels; ++l, r *= 0.5) {
    if (r < 4.0 * run.scenario.grid.h()) break;
    BallCovering cov = build_covering(run.scenario.grid, r);
    LocalizeLevel lv;
    lv.radius = r;
    lv.detail = covering_error(mesh, run.sigma, cov, threads);
    lv.total_error = lv.detail.total;
    lv.surrogate_total = lv.detail.surrogate_total;
    out.push_back(std::move(lv));
  }
  return out;
}

int emit_report(const RunArchive& archive, const std::string& which) {
  std::vector<fs::path> needed;
  if (which == "ledger") {
    needed = {archive.dir() / "ledger.csv"};
  } else if (which == "bv") {
    needed = {archive.report_path("bv")};
  } else if (which == "varifold") {
    needed = {archive.report_path("varifold")};
  } else if (which == "localize") {
    needed = {archive.report_path("localize")};
  } else {
    std::cerr << "unknown report: " << which << "\n";
    return 4;
  }
  std::vector<fs::path> missing;
  for (const auto& p : needed)
    if (!fs::exists(p)) missing.push_back(p);
  if (!missing.empty()) {
    std::cerr << "missing artifacts:\n";
    for (const auto& p : missing) std::cerr << "  " << p.string() << "\n";
    return 4;
  }
  for (const auto& p : needed) {
    std::ifstream in(p);
    std::cout << in.rdbuf();
  }
  return 0;
}

int emit_tensions(const Scenario& s, int threads, std::ostream& out) {
  MultiwellPotential p = s.make_potential();
  SurfaceTensionMatrix sigma = tensions_for(s, p, threads);
  char buf[64];
  for (int i = 0; i < sigma.phases(); ++i) {
    for (int j = 0; j < sigma.phases(); ++j) {
      std::snprintf(buf, sizeof(buf), "%.12g", sigma(i, j));
      out << buf << (j + 1 < sigma.phases() ? "," : "\n");
    }
  }
  ordered_json j;
  j["phases"] = sigma.phases();
  j["max_sigma"] = sigma.max_sigma();
  j["tolerance"] = sigma.tolerance();
  j["converged"] = !sigma.warning();
  out << j.dump() << "\n";
  return 0;
}

}  // namespace dgflow
