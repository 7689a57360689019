#include <doctest.h>

#include <cmath>

#include "dgflow/torus.hpp"

using namespace dgflow;

namespace {

const double kSigmaDoubleWell = 4.0 * std::sqrt(2.0) / 3.0;

PhaseField kink_pair_field(int n, double eps) {
  // kink at L/4 and antikink at 3L/4; two interfaces worth of energy
  TorusGrid g{2, n, 1.0};
  PhaseField u;
  u.f = Field(g, 1);
  u.epsilon = eps;
  for (std::size_t cell = 0; cell < g.cell_count(); ++cell) {
    std::array<double, 3> x{};
    g.center(cell, {x.data(), 2});
    double sd = std::min(x[0] - 0.25, 0.75 - x[0]);
    u.f.data[cell] = std::tanh(std::sqrt(2.0) * sd / eps);
  }
  return u;
}

}  // namespace

TEST_CASE("grid indexing wraps") {
  TorusGrid g{2, 8, 2.0};
  CHECK(g.h() == doctest::Approx(0.25));
  CHECK(g.cell_count() == 64);
  std::array<int, 2> c{-1, 9};
  std::array<int, 2> c2{7, 1};
  CHECK(g.index({c.data(), 2}) == g.index({c2.data(), 2}));
  CHECK(g.wrap_delta(1.9) == doctest::Approx(-0.1));
}

TEST_CASE("spectral derivatives annihilate constants and diagonalize modes") {
  TorusGrid g{2, 64, 2.0};
  Spectral sp(g);
  Field c(g, 1, 3.7);
  Field lap = sp.laplacian(c);
  Field grad = sp.gradient(c);
  for (double v : lap.data) CHECK(std::abs(v) <= 1e-12);
  for (double v : grad.data) CHECK(std::abs(v) <= 1e-12);

  // single mode sin(2 pi x / L): eigenfunction of the Laplacian
  Field s(g, 1);
  const double q = 2.0 * kPi / g.length;
  for (std::size_t cell = 0; cell < g.cell_count(); ++cell) {
    std::array<double, 3> x{};
    g.center(cell, {x.data(), 2});
    s.data[cell] = std::sin(q * x[0]);
  }
  Field ls = sp.laplacian(s);
  Field gs = sp.gradient(s);
  for (std::size_t cell = 0; cell < g.cell_count(); ++cell) {
    std::array<double, 3> x{};
    g.center(cell, {x.data(), 2});
    CHECK(ls.data[cell] == doctest::Approx(-q * q * std::sin(q * x[0])).epsilon(1e-10));
    CHECK(gs.at(cell, 0) == doctest::Approx(q * std::cos(q * x[0])).epsilon(1e-10));
    CHECK(std::abs(gs.at(cell, 1)) <= 1e-10);
  }
}

TEST_CASE("spectral laplacian matches the 5-point stencil on band-limited data") {
  TorusGrid g{2, 64, 1.0};
  Spectral sp(g);
  Field f(g, 1);
  Rng rng(3);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  const int kmax = 4;
  std::vector<std::array<double, 3>> amps;  // (a, kx, ky)
  for (int kx = 0; kx <= kmax; ++kx)
    for (int ky = -kmax; ky <= kmax; ++ky) amps.push_back({unif(rng), double(kx), double(ky)});
  double total_amp = 0.0;
  for (const auto& a : amps) total_amp += std::abs(a[0]);
  for (std::size_t cell = 0; cell < g.cell_count(); ++cell) {
    std::array<double, 3> x{};
    g.center(cell, {x.data(), 2});
    double v = 0.0;
    for (const auto& a : amps)
      v += a[0] * std::cos(2.0 * kPi * (a[1] * x[0] + a[2] * x[1]) / g.length);
    f.data[cell] = v;
  }
  Field lap = sp.laplacian(f);
  // stencil oracle, second order: error <= qmax^4 h^2 / 12 per unit amplitude
  const double h = g.h();
  double qmax = 2.0 * kPi * kmax / g.length;
  double bound = 2.0 * std::pow(qmax, 4) * h * h / 12.0 * total_amp * 1.5;
  for (std::size_t cell = 0; cell < g.cell_count(); ++cell) {
    std::array<int, 3> c{};
    g.coords(cell, {c.data(), 2});
    auto at = [&](int dx, int dy) {
      std::array<int, 2> cc{c[0] + dx, c[1] + dy};
      return f.data[g.index({cc.data(), 2})];
    };
    double stencil = (at(1, 0) + at(-1, 0) + at(0, 1) + at(0, -1) - 4.0 * at(0, 0)) / (h * h);
    CHECK(std::abs(lap.data[cell] - stencil) <= bound);
  }
}

TEST_CASE("helmholtz solve inverts the operator") {
  TorusGrid g{2, 32, 1.0};
  Spectral sp(g);
  Field f(g, 2);
  Rng rng(4);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  for (auto& v : f.data) v = unif(rng);
  Field x = sp.helmholtz_solve(f, 3.0, 0.7);
  Field lap = sp.laplacian(x);
  for (std::size_t i = 0; i < f.data.size(); ++i)
    CHECK(3.0 * x.data[i] - 0.7 * lap.data[i] == doctest::Approx(f.data[i]).epsilon(1e-9));
}

TEST_CASE("energy of well constants and the kink profile") {
  auto p = MultiwellPotential::scalar_double_well();
  TorusGrid g{2, 512, 1.0};
  Spectral sp(g);

  PhaseField flat;
  flat.f = Field(g, 1, 1.0);  // everything at the well alpha_2 = +1
  flat.epsilon = 0.02;
  EnergyBreakdown e0 = energy(sp, flat, p);
  CHECK(e0.total <= 1e-12);
  CHECK(e0.modica_mortola <= 1e-12);

  PhaseField kink = kink_pair_field(512, 0.02);
  EnergyBreakdown e = energy(sp, kink, p);
  double per_interface = e.total / 2.0;
  CHECK(per_interface == doctest::Approx(kSigmaDoubleWell).epsilon(0.01));
  CHECK(e.dirichlet == doctest::Approx(e.potential).epsilon(0.01));  // equipartition
  CHECK(e.modica_mortola <= e.total + 1e-12);

  // localized energy vanishes where the field sits in a well
  std::vector<double> weight(g.cell_count(), 0.0);
  for (std::size_t cell = 0; cell < g.cell_count(); ++cell) {
    std::array<double, 3> x{};
    g.center(cell, {x.data(), 2});
    // bump supported deep inside the alpha_2 plateau
    double dd = std::abs(g.wrap_delta(x[0] - 0.5));
    weight[cell] = dd < 0.08 ? 1.0 : 0.0;
  }
  EnergyBreakdown eloc = energy(sp, kink, p, &weight);
  CHECK(eloc.total <= 1e-10);

  // linear in the weight
  std::vector<double> w2 = weight;
  for (auto& v : w2) v *= 2.0;
  EnergyBreakdown eloc2 = energy(sp, kink, p, &w2);
  CHECK(eloc2.total == doctest::Approx(2.0 * eloc.total).scale(1e-10));

  std::vector<double> neg(g.cell_count(), -1.0);
  CHECK_THROWS_AS(energy(sp, kink, p, &neg), std::invalid_argument);
}

TEST_CASE("psi field composes the geodesic distance") {
  auto p = MultiwellPotential::scalar_double_well();
  GeodesicParams gp;
  gp.nodes = 96;
  PhiTable table(p, 0, gp, 1e-4 * kSigmaDoubleWell);

  TorusGrid g{2, 128, 1.0};
  PhaseField at_well;
  at_well.f = Field(g, 1, -1.0);
  at_well.epsilon = 0.02;
  auto psi0 = psi_field(at_well, table);
  for (double v : psi0) CHECK(std::abs(v) <= 1e-6);

  PhaseField other;
  other.f = Field(g, 1, 1.0);
  other.epsilon = 0.02;
  auto psi1 = psi_field(other, table);
  for (double v : psi1) CHECK(v == doctest::Approx(kSigmaDoubleWell).epsilon(1e-3));

  // kink: monotone ramp from 0 to sigma along the transition, up to the
  // interpolation budget of the table
  PhaseField kink = kink_pair_field(128, 0.02);
  auto psi = psi_field(kink, table);
  int n = g.n;
  double prev = -1e-9;
  const double table_budget = 2e-4 * kSigmaDoubleWell;
  for (int i = 0; i < n / 2; ++i) {
    std::array<int, 2> c{i, 0};
    double v = psi[g.index({c.data(), 2})];
    CHECK(v >= prev - table_budget);
    prev = std::max(prev, v);
  }
}

TEST_CASE("discrete chain rule bound for psi") {
  // |grad psi| <= sqrt(2 W(u)) |grad u| (1 + 0.05) + floor on nearly all
  // cells. The floor covers the table interpolation error of psi, which the
  // global spectral gradient spreads across the plateaus at amplitude up to
  // (table budget) * n / L.
  auto p = MultiwellPotential::scalar_double_well();
  GeodesicParams gp;
  gp.nodes = 96;
  const double table_target = 1e-4 * kSigmaDoubleWell;
  PhiTable table(p, 0, gp, table_target);
  TorusGrid g{2, 256, 1.0};
  Spectral sp(g);
  PhaseField kink = kink_pair_field(256, 0.02);
  Field psi(g, 1);
  psi.data = psi_field(kink, table);
  Field gpsi = sp.gradient(psi);
  Field gu = sp.gradient(kink.f);
  const double floor = table_target * g.n / g.length;
  std::size_t violations = 0;
  for (std::size_t cell = 0; cell < g.cell_count(); ++cell) {
    double lhs = std::hypot(gpsi.at(cell, 0), gpsi.at(cell, 1));
    double gun = std::hypot(gu.at(cell, 0), gu.at(cell, 1));
    double rhs = std::sqrt(2.0 * p.value(Vec{kink.f.data[cell]})) * gun * 1.05;
    if (lhs > rhs + floor) ++violations;
  }
  CHECK(violations <= g.cell_count() / 1000);
}

TEST_CASE("resolution advisory flag") {
  TorusGrid g{2, 64, 1.0};
  PhaseField u;
  u.f = Field(g, 1);
  u.epsilon = 0.5 * g.h();
  CHECK_FALSE(u.resolved());
  u.epsilon = 3.0 * g.h();
  CHECK(u.resolved());
}
