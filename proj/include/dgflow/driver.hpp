#pragma once

#include <filesystem>
#include <optional>

#include "dgflow/archive.hpp"

namespace dgflow {

struct RunOptions {
  int threads = 1;
  std::optional<uint64_t> seed = std::nullopt;  // overrides the scenario seed
};

// Executes a scenario into an archive directory. Returns 0 on success, 3 on
// a NaN abort (the last good checkpoint stays in the archive).
int run_scenario(const Scenario& s, const std::filesystem::path& out_dir,
                 const RunOptions& opts = {});

// Rebuilds partitions and meshes from the archived checkpoints and runs the
// four-part certificate; writes facet dumps and reports/bv.json.
BvReport verify_bv(const RunArchive& archive, int threads = 1);

struct VarifoldRunReport {
  CompatibilityReport worst_compatibility;
  DissipationVerdict dissipation;
  double mu11_seam_mass = 0.0;        // diagonal mass at the final snapshot
  double mu11_mean_orientation = 0.0; // norm of the diagonal mean orientation
};

VarifoldRunReport verify_varifold(const RunArchive& archive, int threads = 1);

struct LocalizeLevel {
  double radius = 0.0;
  double total_error = 0.0;
  double surrogate_total = 0.0;
  CoveringError detail;
};

// Covering diagnostics at radius, radius/2, ... for `levels` levels, on the
// latest archived partition (or the initial data when no checkpoints exist).
std::vector<LocalizeLevel> localize(const RunArchive& archive, double radius, int levels,
                                    int threads = 1);

// Prints an archived report to stdout. Returns 0, or 4 when artifacts are
// missing (after listing them).
int emit_report(const RunArchive& archive, const std::string& which);

// Surface tension CSV + convergence summary for a scenario's potential.
int emit_tensions(const Scenario& s, int threads, std::ostream& out);

}  // namespace dgflow
