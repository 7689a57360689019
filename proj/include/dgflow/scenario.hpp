#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dgflow/flow.hpp"
#include "dgflow/localization.hpp"
#include "dgflow/sharp.hpp"
#include "dgflow/varifold.hpp"

namespace dgflow {

// Flat "section.key = value" configuration with deterministic serialization.
class Config {
 public:
  static Config parse(const std::string& text);
  static Config load(const std::string& path);
  std::string serialize() const;

  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  const std::string& raw(const std::string& key) const;
  double get_num(const std::string& key) const;
  double get_num(const std::string& key, double fallback);
  int get_int(const std::string& key) const;
  int get_int(const std::string& key, int fallback);
  bool get_bool(const std::string& key, bool fallback);
  std::string get_str(const std::string& key, const std::string& fallback);
  std::vector<std::vector<double>> get_nested(const std::string& key) const;
  std::vector<double> get_list(const std::string& key) const;

  void set(const std::string& key, const std::string& value) { kv_[key] = value; }
  void set_num(const std::string& key, double v);
  void set_int(const std::string& key, int v) { kv_[key] = std::to_string(v); }
  void set_bool(const std::string& key, bool v) { kv_[key] = v ? "true" : "false"; }

  bool operator==(const Config&) const = default;

 private:
  std::map<std::string, std::string> kv_;  // ordered for stable output
};

struct ConfigError : std::runtime_error {
  int line = 0;
  ConfigError(const std::string& msg, int ln) : std::runtime_error(msg), line(ln) {}
};

enum class InitKind { Kink, Disk, TripleJunction, CollapsingSlab, Checkpoint };

// Fully resolved run description; every field has a printed default.
struct Scenario {
  std::string name = "run";
  uint64_t seed = 1;

  // potential
  std::string potential_form = "double_well";  // double_well | product_wells
  std::vector<std::vector<double>> wells;      // product_wells only
  double growth_exponent = 4.0;

  TorusGrid grid{2, 256, 1.0};
  double epsilon = 0.01;

  Scheme scheme = Scheme::SemiImplicit;
  double tau = 0.0;  // 0 -> eps^2/4
  double horizon = 0.02;
  double cadence = 0.0;  // 0 -> horizon / 25
  double inner_tol = 1e-7;

  InitKind init = InitKind::Disk;
  std::vector<double> init_center = {0.5, 0.5, 0.5};
  double init_radius = 0.3;
  double init_width = 0.0;   // 0 -> 4 eps, collapsing slab
  int init_axis = 0;
  std::vector<double> init_angles = {120.0, 120.0, 120.0};
  std::string init_checkpoint;

  bool diag_ledger = true;
  bool diag_bv = false;
  bool diag_varifold = false;
  bool diag_localize = false;

  MeshParams mesh;
  BvParams bv;
  std::string varifold_source = "partition";  // partition | field
  double varifold_threshold_rel = 1e-3;
  CompatibilityParams compat;
  double covering_radius = 0.125;
  int covering_levels = 1;
  GeodesicParams geodesic;

  double resolved_tau() const { return tau > 0.0 ? tau : 0.25 * epsilon * epsilon; }
  double resolved_cadence() const { return cadence > 0.0 ? cadence : horizon / 25.0; }

  static Scenario from_config(const Config& c);
  Config to_config() const;
  void validate() const;  // throws ConfigError on bad physical parameters

  MultiwellPotential make_potential() const;
};

// Well-prepared initial data: interfaces carry the 1d optimal profile pulled
// back along the relaxed geodesic between the two seeded wells.
PhaseField initial_data(const Scenario& s, const MultiwellPotential& p);

// Profile transfer helper: point on the geodesic path at transition
// coordinate derived from the signed distance (in space units).
class InterfaceProfile {
 public:
  InterfaceProfile(const MultiwellPotential& p, int phase_from, int phase_to,
                   const GeodesicParams& params, double epsilon);
  // signed distance < 0 -> phase_from side, > 0 -> phase_to side
  Vec operator()(double signed_distance) const;

 private:
  std::vector<Vec> nodes_;      // arc-length parametrized geodesic
  std::vector<double> arc_;     // cumulative arc length
  std::vector<double> offset_;  // spatial offset per node from the profile ODE
  double epsilon_;
};

}  // namespace dgflow
