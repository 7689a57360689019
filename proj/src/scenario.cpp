#include "dgflow/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace dgflow {

namespace {

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

std::string format_num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

Config Config::parse(const std::string& text) {
  Config c;
  std::istringstream in(text);
  std::string line;
  int ln = 0;
  while (std::getline(in, line)) {
    ++ln;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value': " + line, ln);
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty()) throw ConfigError("empty key", ln);
    c.kv_[key] = value;
  }
  return c;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path, 0);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

std::string Config::serialize() const {
  std::ostringstream os;
  for (const auto& [k, v] : kv_) os << k << " = " << v << "\n";
  return os.str();
}

const std::string& Config::raw(const std::string& key) const {
  auto it = kv_.find(key);
  if (it == kv_.end()) throw ConfigError("missing key: " + key, 0);
  return it->second;
}

double Config::get_num(const std::string& key) const {
  const std::string& s = raw(key);
  try {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("key '" + key + "' is not a number: " + s, 0);
  }
}

double Config::get_num(const std::string& key, double fallback) {
  if (!has(key)) return fallback;
  return static_cast<const Config*>(this)->get_num(key);
}

int Config::get_int(const std::string& key) const {
  double v = get_num(key);
  int i = static_cast<int>(std::llround(v));
  if (std::abs(v - i) > 1e-9) throw ConfigError("key '" + key + "' is not an integer", 0);
  return i;
}

int Config::get_int(const std::string& key, int fallback) {
  return has(key) ? static_cast<const Config*>(this)->get_int(key) : fallback;
}

bool Config::get_bool(const std::string& key, bool fallback) {
  if (!has(key)) return fallback;
  const std::string& s = raw(key);
  if (s == "true" || s == "1") return true;
  if (s == "false" || s == "0") return false;
  throw ConfigError("key '" + key + "' is not a boolean: " + s, 0);
}

std::string Config::get_str(const std::string& key, const std::string& fallback) {
  return has(key) ? raw(key) : fallback;
}

std::vector<std::vector<double>> Config::get_nested(const std::string& key) const {
  // [[a,b],[c,d],...]
  const std::string& s = raw(key);
  std::vector<std::vector<double>> out;
  std::vector<double> cur;
  int depth = 0;
  std::string tok;
  auto flush_tok = [&]() {
    std::string t = trim(tok);
    tok.clear();
    if (!t.empty()) cur.push_back(std::stod(t));
  };
  for (char ch : s) {
    if (ch == '[') {
      ++depth;
    } else if (ch == ']') {
      flush_tok();
      if (depth == 2) {
        out.push_back(cur);
        cur.clear();
      }
      --depth;
    } else if (ch == ',') {
      if (depth == 2) flush_tok();
    } else {
      tok += ch;
    }
  }
  if (depth != 0) throw ConfigError("unbalanced brackets in key " + key, 0);
  return out;
}

std::vector<double> Config::get_list(const std::string& key) const {
  const std::string& s = raw(key);
  std::vector<double> out;
  std::string tok;
  for (char ch : s) {
    if (ch == '[' ) continue;
    if (ch == ']' || ch == ',') {
      std::string t = trim(tok);
      tok.clear();
      if (!t.empty()) out.push_back(std::stod(t));
    } else {
      tok += ch;
    }
  }
  std::string t = trim(tok);
  if (!t.empty()) out.push_back(std::stod(t));
  return out;
}

void Config::set_num(const std::string& key, double v) { kv_[key] = format_num(v); }

Scenario Scenario::from_config(const Config& cin) {
  Config c = cin;
  Scenario s;
  s.name = c.get_str("name", s.name);
  s.seed = static_cast<uint64_t>(c.get_int("seed", 1));
  s.potential_form = c.get_str("potential.form", s.potential_form);
  if (c.has("potential.wells")) s.wells = c.get_nested("potential.wells");
  s.growth_exponent = c.get_num("potential.growth_exponent", s.growth_exponent);
  s.grid.dim = c.get_int("grid.dim", s.grid.dim);
  s.grid.n = c.get_int("grid.n", s.grid.n);
  s.grid.length = c.get_num("grid.length", s.grid.length);
  s.epsilon = c.get_num("epsilon", s.epsilon);
  std::string scheme = c.get_str("scheme", "semi_implicit");
  if (scheme == "semi_implicit")
    s.scheme = Scheme::SemiImplicit;
  else if (scheme == "minimizing_movements")
    s.scheme = Scheme::MinimizingMovements;
  else
    throw ConfigError("unknown scheme: " + scheme, 0);
  s.tau = c.get_num("tau", s.tau);
  s.horizon = c.get_num("horizon", s.horizon);
  s.cadence = c.get_num("cadence", s.cadence);
  s.inner_tol = c.get_num("inner_tol", s.inner_tol);

  std::string kind = c.get_str("init.kind", "disk");
  if (kind == "kink")
    s.init = InitKind::Kink;
  else if (kind == "disk")
    s.init = InitKind::Disk;
  else if (kind == "triple_junction")
    s.init = InitKind::TripleJunction;
  else if (kind == "collapsing_slab")
    s.init = InitKind::CollapsingSlab;
  else if (kind == "checkpoint")
    s.init = InitKind::Checkpoint;
  else
    throw ConfigError("unknown init.kind: " + kind, 0);
  if (c.has("init.center")) s.init_center = c.get_list("init.center");
  s.init_radius = c.get_num("init.r0", s.init_radius);
  s.init_width = c.get_num("init.width", s.init_width);
  s.init_axis = c.get_int("init.axis", s.init_axis);
  if (c.has("init.angles")) s.init_angles = c.get_list("init.angles");
  s.init_checkpoint = c.get_str("init.path", "");

  s.diag_ledger = c.get_bool("diag.ledger", s.diag_ledger);
  s.diag_bv = c.get_bool("diag.bv", s.diag_bv);
  s.diag_varifold = c.get_bool("diag.varifold", s.diag_varifold);
  s.diag_localize = c.get_bool("diag.localize", s.diag_localize);

  s.mesh.smoothing_radius_cells = c.get_num("mesh.smoothing_radius", s.mesh.smoothing_radius_cells);
  s.mesh.junction_threshold = c.get_num("mesh.junction_threshold", s.mesh.junction_threshold);
  s.bv.basis_kmax = c.get_int("bv.basis_kmax", s.bv.basis_kmax);
  s.bv.curvature_residual_threshold =
      c.get_num("bv.residual_threshold", s.bv.curvature_residual_threshold);
  s.bv.dissipation_slack = c.get_num("bv.dissipation_slack", s.bv.dissipation_slack);
  s.varifold_source = c.get_str("varifold.source", s.varifold_source);
  s.varifold_threshold_rel = c.get_num("varifold.threshold_rel", s.varifold_threshold_rel);
  s.compat.basis_kmax = c.get_int("varifold.basis_kmax", s.compat.basis_kmax);
  s.covering_radius = c.get_num("covering.radius", s.covering_radius);
  s.covering_levels = c.get_int("covering.levels", s.covering_levels);
  s.geodesic.nodes = c.get_int("geodesic.nodes", s.geodesic.nodes);
  s.geodesic.budget = c.get_int("geodesic.budget", s.geodesic.budget);
  s.geodesic.restarts = c.get_int("geodesic.restarts", s.geodesic.restarts);
  s.geodesic.seed = s.seed;
  s.validate();
  return s;
}

Config Scenario::to_config() const {
  Config c;
  c.set("name", name);
  c.set_int("seed", static_cast<int>(seed));
  c.set("potential.form", potential_form);
  if (!wells.empty()) {
    std::ostringstream os;
    os << "[";
    for (std::size_t i = 0; i < wells.size(); ++i) {
      os << (i ? ",[" : "[");
      for (std::size_t j = 0; j < wells[i].size(); ++j) os << (j ? "," : "") << format_num(wells[i][j]);
      os << "]";
    }
    os << "]";
    c.set("potential.wells", os.str());
  }
  c.set_num("potential.growth_exponent", growth_exponent);
  c.set_int("grid.dim", grid.dim);
  c.set_int("grid.n", grid.n);
  c.set_num("grid.length", grid.length);
  c.set_num("epsilon", epsilon);
  c.set("scheme", scheme == Scheme::SemiImplicit ? "semi_implicit" : "minimizing_movements");
  c.set_num("tau", resolved_tau());
  c.set_num("horizon", horizon);
  c.set_num("cadence", resolved_cadence());
  c.set_num("inner_tol", inner_tol);
  const char* kind = "disk";
  switch (init) {
    case InitKind::Kink: kind = "kink"; break;
    case InitKind::Disk: kind = "disk"; break;
    case InitKind::TripleJunction: kind = "triple_junction"; break;
    case InitKind::CollapsingSlab: kind = "collapsing_slab"; break;
    case InitKind::Checkpoint: kind = "checkpoint"; break;
  }
  c.set("init.kind", kind);
  {
    std::ostringstream os;
    os << "[";
    for (int a = 0; a < grid.dim; ++a) os << (a ? "," : "") << format_num(init_center[a]);
    os << "]";
    c.set("init.center", os.str());
  }
  c.set_num("init.r0", init_radius);
  c.set_num("init.width", init_width > 0 ? init_width : 4.0 * epsilon);
  c.set_int("init.axis", init_axis);
  {
    std::ostringstream os;
    os << "[";
    for (std::size_t a = 0; a < init_angles.size(); ++a)
      os << (a ? "," : "") << format_num(init_angles[a]);
    os << "]";
    c.set("init.angles", os.str());
  }
  if (!init_checkpoint.empty()) c.set("init.path", init_checkpoint);
  c.set_bool("diag.ledger", diag_ledger);
  c.set_bool("diag.bv", diag_bv);
  c.set_bool("diag.varifold", diag_varifold);
  c.set_bool("diag.localize", diag_localize);
  c.set_num("mesh.smoothing_radius", mesh.smoothing_radius_cells);
  c.set_num("mesh.junction_threshold", mesh.junction_threshold);
  c.set_int("bv.basis_kmax", bv.basis_kmax);
  c.set_num("bv.residual_threshold", bv.curvature_residual_threshold);
  c.set_num("bv.dissipation_slack", bv.dissipation_slack);
  c.set("varifold.source", varifold_source);
  c.set_num("varifold.threshold_rel", varifold_threshold_rel);
  c.set_int("varifold.basis_kmax", compat.basis_kmax);
  c.set_num("covering.radius", covering_radius);
  c.set_int("covering.levels", covering_levels);
  c.set_int("geodesic.nodes", geodesic.nodes);
  c.set_int("geodesic.budget", geodesic.budget);
  c.set_int("geodesic.restarts", geodesic.restarts);
  return c;
}

void Scenario::validate() const {
  auto bad = [](const std::string& msg) { throw ConfigError(msg, 0); };
  if (grid.dim != 2 && grid.dim != 3) bad("grid.dim must be 2 or 3");
  if (grid.n < 8 || (grid.n & (grid.n - 1)) != 0) bad("grid.n must be a power of two >= 8");
  if (grid.length <= 0.0) bad("grid.length must be positive");
  if (epsilon <= 0.0) bad("epsilon must be positive");
  if (horizon <= 0.0) bad("horizon must be positive");
  if (resolved_tau() <= 0.0) bad("tau must be positive");
  double cad = resolved_cadence();
  double ratio = cad / resolved_tau();
  if (std::abs(ratio - std::llround(ratio)) > 1e-6 || ratio < 1.0 - 1e-9)
    bad("cadence must be a positive multiple of tau");
  if (potential_form == "product_wells" && wells.size() < 2)
    bad("product_wells needs potential.wells with at least two entries");
  if (init == InitKind::Disk && init_radius < 4.0 * epsilon)
    bad("disk radius below 4 epsilon cannot carry a resolved profile");
  if (init == InitKind::Checkpoint && init_checkpoint.empty()) bad("init.path required");
}

MultiwellPotential Scenario::make_potential() const {
  if (potential_form == "double_well") return MultiwellPotential::scalar_double_well();
  if (potential_form == "product_wells") {
    std::vector<Vec> ws;
    for (const auto& w : wells) ws.push_back(Vec::from(w));
    return MultiwellPotential::product_wells(std::move(ws));
  }
  throw ConfigError("unknown potential.form: " + potential_form, 0);
}

InterfaceProfile::InterfaceProfile(const MultiwellPotential& p, int phase_from, int phase_to,
                                   const GeodesicParams& params, double epsilon)
    : epsilon_(epsilon) {
  GeodesicPath path = relax_geodesic(p, p.well(phase_from), p.well(phase_to),
                                     std::max(params.nodes, 64), params.budget, params.rel_tol);
  nodes_ = path.nodes;
  const int M = static_cast<int>(nodes_.size()) - 1;
  arc_.assign(M + 1, 0.0);
  for (int k = 1; k <= M; ++k) arc_[k] = arc_[k - 1] + dist(nodes_[k], nodes_[k - 1]);

  // spatial offset from the transition midpoint: dx = eps dl / sqrt(2 W)
  offset_.assign(M + 1, 0.0);
  std::vector<double> speed(M + 1);
  for (int k = 0; k <= M; ++k) speed[k] = std::sqrt(2.0 * p.value(nodes_[k]));
  int mid = M / 2;
  offset_[mid] = 0.0;
  for (int k = mid + 1; k <= M; ++k) {
    double s_avg = 0.5 * (std::max(speed[k - 1], 1e-12) + std::max(speed[k], 1e-12));
    offset_[k] = offset_[k - 1] + epsilon_ * (arc_[k] - arc_[k - 1]) / s_avg;
  }
  for (int k = mid - 1; k >= 0; --k) {
    double s_avg = 0.5 * (std::max(speed[k], 1e-12) + std::max(speed[k + 1], 1e-12));
    offset_[k] = offset_[k + 1] - epsilon_ * (arc_[k + 1] - arc_[k]) / s_avg;
  }
}

Vec InterfaceProfile::operator()(double sd) const {
  if (sd <= offset_.front()) return nodes_.front();
  if (sd >= offset_.back()) return nodes_.back();
  auto it = std::upper_bound(offset_.begin(), offset_.end(), sd);
  std::size_t k = static_cast<std::size_t>(it - offset_.begin());
  double t = (sd - offset_[k - 1]) / std::max(offset_[k] - offset_[k - 1], 1e-300);
  return nodes_[k - 1] + t * (nodes_[k] - nodes_[k - 1]);
}

namespace {

// Euclidean distance from a point (in polar form around the junction) to the
// closed wedge sector [a0, a1] (angles); 0 inside.
double sector_distance(double radius, double theta, double a0, double a1) {
  auto wrap = [](double t) {
    while (t < 0) t += 2.0 * kPi;
    while (t >= 2.0 * kPi) t -= 2.0 * kPi;
    return t;
  };
  double th = wrap(theta - a0);
  double width = wrap(a1 - a0);
  if (width == 0.0) width = 2.0 * kPi;
  if (th <= width) return 0.0;
  double d0 = wrap(2.0 * kPi - th);          // angular gap to the a0 ray
  double d1 = wrap(th - width);              // angular gap to the a1 ray
  double gap = std::min(d0, d1);
  if (gap >= 0.5 * kPi) return radius;
  return radius * std::sin(gap);
}

}  // namespace

PhaseField initial_data(const Scenario& s, const MultiwellPotential& p) {
  PhaseField u;
  u.f = Field(s.grid, p.ambient_dim());
  u.epsilon = s.epsilon;
  const int d = s.grid.dim;
  const int N = p.ambient_dim();
  const double L = s.grid.length;

  switch (s.init) {
    case InitKind::Kink: {
      // kink/antikink pair: phase 1 fills the middle half of the axis
      InterfaceProfile prof(p, 0, 1, s.geodesic, s.epsilon);
      int axis = s.init_axis;
      for (std::size_t cell = 0; cell < u.f.cells(); ++cell) {
        std::array<double, 3> x{};
        s.grid.center(cell, {x.data(), static_cast<size_t>(d)});
        double sd = std::min(x[axis] - 0.25 * L, 0.75 * L - x[axis]);
        Vec val = prof(sd);
        for (int c = 0; c < N; ++c) u.f.at(cell, c) = val[c];
      }
      break;
    }
    case InitKind::CollapsingSlab: {
      double w = s.init_width > 0 ? s.init_width : 4.0 * s.epsilon;
      InterfaceProfile prof(p, 0, 1, s.geodesic, s.epsilon);
      int axis = s.init_axis;
      double lo = 0.5 * L - 0.5 * w, hi = 0.5 * L + 0.5 * w;
      for (std::size_t cell = 0; cell < u.f.cells(); ++cell) {
        std::array<double, 3> x{};
        s.grid.center(cell, {x.data(), static_cast<size_t>(d)});
        double sd = std::min(x[axis] - lo, hi - x[axis]);
        Vec val = prof(sd);
        for (int c = 0; c < N; ++c) u.f.at(cell, c) = val[c];
      }
      break;
    }
    case InitKind::Disk: {
      if (s.init_radius < 4.0 * s.epsilon)
        throw ConfigError("disk radius below 4 epsilon is unresolvable", 0);
      InterfaceProfile prof(p, 0, 1, s.geodesic, s.epsilon);
      for (std::size_t cell = 0; cell < u.f.cells(); ++cell) {
        std::array<double, 3> x{};
        s.grid.center(cell, {x.data(), static_cast<size_t>(d)});
        double r2 = 0.0;
        for (int a = 0; a < d; ++a) {
          double dd = s.grid.wrap_delta(x[a] - s.init_center[a]);
          r2 += dd * dd;
        }
        Vec val = prof(s.init_radius - std::sqrt(r2));
        for (int c = 0; c < N; ++c) u.f.at(cell, c) = val[c];
      }
      break;
    }
    case InitKind::TripleJunction: {
      if (p.well_count() < 3) throw ConfigError("triple_junction needs three phases", 0);
      std::array<double, 3> cum{};
      double a0 = 0.0;
      std::vector<double> bounds;  // sector start angles
      bounds.push_back(a0);
      for (std::size_t k = 0; k + 1 < s.init_angles.size(); ++k) {
        a0 += s.init_angles[k] * kPi / 180.0;
        bounds.push_back(a0);
      }
      (void)cum;
      std::vector<std::unique_ptr<InterfaceProfile>> prof(9);
      auto profile = [&](int i, int j) -> InterfaceProfile& {
        int key = i * 3 + j;
        if (!prof[key]) prof[key] = std::make_unique<InterfaceProfile>(p, i, j, s.geodesic, s.epsilon);
        return *prof[key];
      };
      for (std::size_t cell = 0; cell < u.f.cells(); ++cell) {
        std::array<double, 3> x{};
        s.grid.center(cell, {x.data(), static_cast<size_t>(d)});
        double dx = s.grid.wrap_delta(x[0] - s.init_center[0]);
        double dy = s.grid.wrap_delta(x[1] - s.init_center[1]);
        double radius = std::hypot(dx, dy);
        double theta = std::atan2(dy, dx);
        if (theta < 0) theta += 2.0 * kPi;
        std::array<double, 3> dist_to;
        for (int k = 0; k < 3; ++k) {
          double lo2 = bounds[k];
          double hi2 = k + 1 < 3 ? bounds[k + 1] : 2.0 * kPi;
          dist_to[k] = sector_distance(radius, theta, lo2, hi2);
        }
        int best = 0, second = 1;
        for (int k = 1; k < 3; ++k)
          if (dist_to[k] < dist_to[best]) best = k;
        second = best == 0 ? 1 : 0;
        for (int k = 0; k < 3; ++k)
          if (k != best && dist_to[k] < dist_to[second]) second = k;
        double sd = dist_to[second] - dist_to[best];  // > 0 inside the best wedge
        Vec val = profile(second, best)(sd);
        for (int c = 0; c < N; ++c) u.f.at(cell, c) = val[c];
      }
      break;
    }
    case InitKind::Checkpoint:
      throw std::logic_error("checkpoint initial data is loaded by the archive layer");
  }
  return u;
}

}  // namespace dgflow
