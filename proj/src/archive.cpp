#include "dgflow/archive.hpp"

#include <bit>
#include <cstdio>
#include <cstring>
#include <fstream>

namespace dgflow {

namespace fs = std::filesystem;

static_assert(std::endian::native == std::endian::little,
              "checkpoint format is little-endian; add byte swapping for this platform");

void write_checkpoint(const fs::path& path, const PhaseField& u, double t) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path.string());
  char header[128];
  std::snprintf(header, sizeof(header), "DGFLOW1 %d %d %.17g %d %.17g %.17g\n", u.grid().dim,
                u.grid().n, u.grid().length, u.ncomp(), u.epsilon, t);
  out << header;
  out.write(reinterpret_cast<const char*>(u.f.data.data()),
            static_cast<std::streamsize>(u.f.data.size() * sizeof(double)));
}

PhaseField read_checkpoint(const fs::path& path, double* t_out) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path.string());
  std::string magic;
  int d = 0, n = 0, N = 0;
  double lambda = 0.0, eps = 0.0, t = 0.0;
  in >> magic >> d >> n >> lambda >> N >> eps >> t;
  if (magic != "DGFLOW1") throw std::runtime_error("bad checkpoint magic in " + path.string());
  in.get();  // newline
  PhaseField u;
  u.f = Field(TorusGrid{d, n, lambda}, N);
  u.epsilon = eps;
  in.read(reinterpret_cast<char*>(u.f.data.data()),
          static_cast<std::streamsize>(u.f.data.size() * sizeof(double)));
  if (!in) throw std::runtime_error("truncated checkpoint: " + path.string());
  if (t_out) *t_out = t;
  return u;
}

void write_ledger_csv(const fs::path& path, const DissipationLedger& ledger) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write ledger: " + path.string());
  out << "t,energy,dirichlet,potential,velocity_term_cum,curvature_term_cum,dissipation_slack\n";
  char line[512];
  for (const auto& r : ledger.rows) {
    std::snprintf(line, sizeof(line), "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, r.energy,
                  r.dirichlet, r.potential, r.velocity_cum, r.curvature_cum, r.slack);
    out << line;
  }
}

DissipationLedger read_ledger_csv(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read ledger: " + path.string());
  DissipationLedger ledger;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    LedgerRow r;
    if (std::sscanf(line.c_str(), "%lg,%lg,%lg,%lg,%lg,%lg,%lg", &r.t, &r.energy, &r.dirichlet,
                    &r.potential, &r.velocity_cum, &r.curvature_cum, &r.slack) == 7)
      ledger.rows.push_back(r);
  }
  return ledger;
}

void write_facets_csv(const fs::path& path, const InterfaceMesh& mesh,
                      const VelocityField* velocities, const CurvatureField* curvature) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write facets: " + path.string());
  out << "x0,x1,x2,nu0,nu1,nu2,area,pair_i,pair_j,V,H0,H1,H2\n";
  char line[512];
  for (const auto& [key, fs] : mesh.pairs) {
    const std::vector<double>* vs =
        velocities && velocities->per_pair.count(key) ? &velocities->per_pair.at(key) : nullptr;
    const std::vector<std::array<double, 3>>* hs =
        curvature && curvature->per_pair.count(key) ? &curvature->per_pair.at(key) : nullptr;
    for (std::size_t k = 0; k < fs.size(); ++k) {
      const Facet& f = fs[k];
      double V = vs ? (*vs)[k] : 0.0;
      std::array<double, 3> H = hs ? (*hs)[k] : std::array<double, 3>{};
      std::snprintf(line, sizeof(line),
                    "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%d,%d,%.17g,%.17g,%.17g,%.17g\n",
                    f.x[0], f.x[1], f.x[2], f.normal[0], f.normal[1], f.normal[2], f.area,
                    key.first + 1, key.second + 1, V, H[0], H[1], H[2]);
      out << line;
    }
  }
}

void write_varifold_csv(const fs::path& path, const DiscreteVarifold& v) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write varifold: " + path.string());
  out << "t,i,j,x0,x1,x2,p0,p1,p2,mass\n";
  char line[512];
  for (const auto& [key, atoms] : v.pairs)
    for (const auto& a : atoms) {
      std::snprintf(line, sizeof(line), "%.17g,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n",
                    v.time, key.first + 1, key.second + 1, a.x[0], a.x[1], a.x[2], a.p[0], a.p[1],
                    a.p[2], a.mass);
      out << line;
    }
}

RunArchive::RunArchive(fs::path dir, bool create) : dir_(std::move(dir)) {
  if (create) {
    fs::create_directories(dir_ / "checkpoints");
    fs::create_directories(dir_ / "facets");
    fs::create_directories(dir_ / "varifolds");
    fs::create_directories(dir_ / "reports");
  } else if (!fs::exists(dir_)) {
    throw std::runtime_error("archive directory does not exist: " + dir_.string());
  }
}

static std::string snap_name(int snapshot) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%06d", snapshot);
  return buf;
}

fs::path RunArchive::checkpoint_path(int snapshot) const {
  return dir_ / "checkpoints" / (snap_name(snapshot) + ".fld");
}
fs::path RunArchive::facets_path(int snapshot) const {
  return dir_ / "facets" / (snap_name(snapshot) + ".csv");
}
fs::path RunArchive::varifold_path(int snapshot) const {
  return dir_ / "varifolds" / (snap_name(snapshot) + ".csv");
}
fs::path RunArchive::report_path(const std::string& name) const {
  return dir_ / "reports" / (name + ".json");
}

std::vector<int> RunArchive::snapshots() const {
  std::vector<int> out;
  fs::path cps = dir_ / "checkpoints";
  if (!fs::exists(cps)) return out;
  for (const auto& entry : fs::directory_iterator(cps)) {
    std::string stem = entry.path().stem().string();
    if (entry.path().extension() == ".fld") out.push_back(std::stoi(stem));
  }
  std::sort(out.begin(), out.end());
  return out;
}

void RunArchive::write_scenario(const Scenario& s) const {
  std::ofstream out(dir_ / "scenario.cfg");
  out << s.to_config().serialize();
}

Scenario RunArchive::read_scenario() const {
  return Scenario::from_config(Config::load((dir_ / "scenario.cfg").string()));
}

}  // namespace dgflow
