#pragma once

#include <array>
#include <memory>
#include <vector>

#include "dgflow/common.hpp"
#include "dgflow/geodesic.hpp"
#include "dgflow/potential.hpp"

namespace dgflow {

// Uniform periodic grid on [0, length)^dim with n cells per axis.
struct TorusGrid {
  int dim = 2;
  int n = 64;
  double length = 1.0;

  double h() const { return length / n; }
  std::size_t cell_count() const {
    std::size_t c = 1;
    for (int a = 0; a < dim; ++a) c *= static_cast<std::size_t>(n);
    return c;
  }
  int wrap(int i) const {
    int m = i % n;
    return m < 0 ? m + n : m;
  }
  std::size_t index(std::span<const int> coords) const {
    std::size_t idx = 0;
    for (int a = 0; a < dim; ++a) idx = idx * n + static_cast<std::size_t>(wrap(coords[a]));
    return idx;
  }
  void coords(std::size_t cell, std::span<int> out) const {
    for (int a = dim - 1; a >= 0; --a) {
      out[a] = static_cast<int>(cell % n);
      cell /= n;
    }
  }
  // cell centers at (i + 1/2) h
  void center(std::size_t cell, std::span<double> out) const {
    std::array<int, 3> c{};
    coords(cell, {c.data(), static_cast<size_t>(dim)});
    for (int a = 0; a < dim; ++a) out[a] = (c[a] + 0.5) * h();
  }
  // shortest signed displacement b - a on the torus, per axis
  double wrap_delta(double d) const {
    while (d > 0.5 * length) d -= length;
    while (d < -0.5 * length) d += length;
    return d;
  }
  bool operator==(const TorusGrid&) const = default;
};

// Multi-component field sampled at cell centers. Layout: cell-major with the
// component index innermost.
struct Field {
  TorusGrid grid;
  int ncomp = 1;
  std::vector<double> data;

  Field() = default;
  Field(const TorusGrid& g, int nc, double fill = 0.0)
      : grid(g), ncomp(nc), data(g.cell_count() * nc, fill) {}
  double& at(std::size_t cell, int c) { return data[cell * ncomp + c]; }
  double at(std::size_t cell, int c) const { return data[cell * ncomp + c]; }
  std::size_t cells() const { return grid.cell_count(); }
};

// Order parameter u_eps with its interface width.
struct PhaseField {
  Field f;
  double epsilon = 0.05;

  const TorusGrid& grid() const { return f.grid; }
  int ncomp() const { return f.ncomp; }
  // resolution advisory: profiles need a few cells across the interface
  bool resolved() const { return epsilon >= 2.0 * f.grid.h(); }
};

struct EnergyBreakdown {
  double total = 0.0;
  double dirichlet = 0.0;       // int (eps/2) |grad u|^2
  double potential = 0.0;       // int (1/eps) W(u)
  double modica_mortola = 0.0;  // int sqrt(2 W(u)) |grad u|
};

// Fourier-space calculus for one grid; caches FFTW plans and scratch.
// Not safe for concurrent use; create one per thread.
class Spectral {
 public:
  explicit Spectral(const TorusGrid& grid);
  ~Spectral();
  Spectral(const Spectral&) = delete;
  Spectral& operator=(const Spectral&) = delete;

  const TorusGrid& grid() const { return grid_; }

  // componentwise -|q|^2 in Fourier space
  Field laplacian(const Field& f);
  // per-cell first derivatives; output has ncomp * dim components laid out
  // component-major: out(cell, c*dim + a) = d_a f_c
  Field gradient(const Field& f);
  // solves (a - b Lap) x = rhs componentwise, a > 0, b >= 0
  Field helmholtz_solve(const Field& rhs, double a, double b);
  // Gaussian mollifier exp(-|q|^2 radius^2 / 2), componentwise
  Field mollify(const Field& f, double radius);

 private:
  struct Impl;
  TorusGrid grid_;
  std::unique_ptr<Impl> impl_;
};

// Midpoint-rule energies; `weight`, when present, is a per-cell nonnegative
// scalar localizing the integrand.
EnergyBreakdown energy(Spectral& sp, const PhaseField& u, const MultiwellPotential& p,
                       const std::vector<double>* weight = nullptr);

// Geodesic distance to well i composed with the field, psi_i = phi_i(u),
// evaluated through an auto-refined multilinear lookup table.
class PhiTable {
 public:
  PhiTable(const MultiwellPotential& p, int well_index, const GeodesicParams& params,
           double target_abs_error);
  // extends the table if u leaves the current box
  double operator()(const Vec& u) const;
  double resolution() const { return spacing_; }

 private:
  void build(const std::vector<Vec>& probes);
  double interpolate(const Vec& u) const;

  MultiwellPotential pot_;
  int well_ = 0;
  GeodesicParams params_;
  double target_ = 1e-4;
  int dims_ = 1;
  std::vector<double> lo_, hi_;
  std::vector<double> well_values_;  // exact phi at each well
  std::vector<int> shape_;
  double spacing_ = 0.0;
  mutable std::vector<double> values_;
};

std::vector<double> psi_field(const PhaseField& u, const PhiTable& table);

}  // namespace dgflow
