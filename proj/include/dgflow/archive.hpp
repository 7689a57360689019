#pragma once

#include <filesystem>
#include <string>

#include "dgflow/flow.hpp"
#include "dgflow/scenario.hpp"
#include "dgflow/sharp.hpp"
#include "dgflow/varifold.hpp"

namespace dgflow {

// Checkpoint: one text header "DGFLOW1 d n lambda N eps t" followed by raw
// little-endian doubles, cells in axis-major order with components innermost.
void write_checkpoint(const std::filesystem::path& path, const PhaseField& u, double t);
PhaseField read_checkpoint(const std::filesystem::path& path, double* t_out = nullptr);

void write_ledger_csv(const std::filesystem::path& path, const DissipationLedger& ledger);
DissipationLedger read_ledger_csv(const std::filesystem::path& path);

void write_facets_csv(const std::filesystem::path& path, const InterfaceMesh& mesh,
                      const VelocityField* velocities = nullptr,
                      const CurvatureField* curvature = nullptr);

void write_varifold_csv(const std::filesystem::path& path, const DiscreteVarifold& v);

// Directory layout of one run:
//   scenario.cfg  ledger.csv  checkpoints/NNNNNN.fld  facets/NNNNNN.csv
//   varifolds/NNNNNN.csv  reports/*.json
class RunArchive {
 public:
  explicit RunArchive(std::filesystem::path dir, bool create = false);
  const std::filesystem::path& dir() const { return dir_; }
  std::filesystem::path checkpoint_path(int snapshot) const;
  std::filesystem::path facets_path(int snapshot) const;
  std::filesystem::path varifold_path(int snapshot) const;
  std::filesystem::path report_path(const std::string& name) const;
  std::vector<int> snapshots() const;  // sorted checkpoint indices

  void write_scenario(const Scenario& s) const;
  Scenario read_scenario() const;

 private:
  std::filesystem::path dir_;
};

}  // namespace dgflow
