#include <doctest.h>

#include <cmath>

#include "dgflow/geodesic.hpp"

using namespace dgflow;

namespace {

// quadrature oracle for scalar potentials: int_a^b sqrt(2 W(s)) ds with a
// dense Simpson rule; independent of the path relaxation
double scalar_distance_oracle(const MultiwellPotential& p, double a, double b, int n = 20001) {
  double h = (b - a) / (n - 1);
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double x = a + i * h;
    double w = std::sqrt(2.0 * p.value(Vec{x}));
    double coeff = (i == 0 || i == n - 1) ? 1.0 : (i % 2 ? 4.0 : 2.0);
    acc += coeff * w;
  }
  return acc * h / 3.0;
}

MultiwellPotential symmetric_three_well() {
  auto well = [](double deg) {
    double rad = deg * kPi / 180.0;
    return Vec{std::cos(rad), std::sin(rad)};
  };
  return MultiwellPotential::product_wells({well(90.0), well(210.0), well(330.0)});
}

const double kSigmaDoubleWell = 4.0 * std::sqrt(2.0) / 3.0;  // = 1.8856180831641267

}  // namespace

TEST_CASE("path action basics") {
  auto p = MultiwellPotential::scalar_double_well();
  std::vector<Vec> constant(5, Vec{0.3});
  CHECK(path_action(p, constant) == 0.0);

  // two-node path across the wells: both endpoints have W = 0, so the
  // trapezoidal quadrature degenerates to zero
  CHECK(path_action(p, {Vec{-1.0}, Vec{1.0}}) == 0.0);

  // a fine straight path approximates the true integral
  std::vector<Vec> fine(101);
  for (int k = 0; k <= 100; ++k) fine[k] = Vec{-1.0 + 2.0 * k / 100.0};
  double oracle = scalar_distance_oracle(p, -1.0, 1.0);
  CHECK(oracle == doctest::Approx(kSigmaDoubleWell).epsilon(1e-8));
  CHECK(path_action(p, fine) == doctest::Approx(oracle).epsilon(1e-3));

  // lower bound: action >= sqrt(2 min W) * length along a bulk segment
  std::vector<Vec> bulk = {Vec{2.0}, Vec{3.0}};
  double minW = std::min(p.value(Vec{2.0}), p.value(Vec{3.0}));
  CHECK(path_action(p, bulk) >= std::sqrt(2.0 * minW) * 1.0);
}

TEST_CASE("relax_geodesic on the double well hits the quadrature oracle") {
  auto p = MultiwellPotential::scalar_double_well();
  GeodesicPath trivial = relax_geodesic(p, Vec{0.5}, Vec{0.5}, 32, 100);
  CHECK(trivial.action == 0.0);
  CHECK(trivial.converged);

  GeodesicPath path = relax_geodesic(p, Vec{-1.0}, Vec{1.0}, 200, 4000);
  CHECK(path.converged);
  CHECK(std::abs(path.action - kSigmaDoubleWell) <= 1e-3);
  CHECK(path.nodes.front()[0] == -1.0);
  CHECK(path.nodes.back()[0] == 1.0);
  // stored action matches a recomputation
  CHECK(path_action(p, path.nodes) == doctest::Approx(path.action).epsilon(1e-12));
}

TEST_CASE("relax_geodesic input validation") {
  auto p = MultiwellPotential::scalar_double_well();
  CHECK_THROWS_AS(relax_geodesic(p, Vec{-1.0}, Vec{1.0}, 8, 100), std::invalid_argument);
}

TEST_CASE("phi distances") {
  auto p = MultiwellPotential::scalar_double_well();
  CHECK(phi(p, 0, p.well(0)) == 0.0);
  double oracle = scalar_distance_oracle(p, -1.0, 0.0);
  CHECK(oracle == doctest::Approx(std::sqrt(2.0) * 2.0 / 3.0).epsilon(1e-8));
  CHECK(phi(p, 0, Vec{0.0}, 128, 4000) == doctest::Approx(oracle).epsilon(2e-3));

  // straight-path upper bound
  auto tw = symmetric_three_well();
  Rng rng(5);
  std::uniform_real_distribution<double> unif(-1.2, 1.2);
  for (int k = 0; k < 10; ++k) {
    Vec u{unif(rng), unif(rng)};
    double maxW = 0.0;
    for (int s = 0; s <= 32; ++s) {
      Vec x = tw.well(1) + (s / 32.0) * (u - tw.well(1));
      maxW = std::max(maxW, tw.value(x));
    }
    CHECK(phi(tw, 1, u, 64, 1500) <= std::sqrt(2.0 * maxW) * dist(u, tw.well(1)) + 1e-6);
  }
}

TEST_CASE("surface tensions: double well matrix") {
  auto p = MultiwellPotential::scalar_double_well();
  GeodesicParams gp;
  gp.nodes = 200;
  gp.restarts = 2;
  auto sigma = surface_tensions(p, gp);
  CHECK(sigma.phases() == 2);
  CHECK(sigma(0, 0) == 0.0);
  CHECK(sigma(1, 1) == 0.0);
  CHECK(std::abs(sigma(0, 1) - kSigmaDoubleWell) <= 1e-3);
  CHECK(sigma(0, 1) == sigma(1, 0));
  CHECK_FALSE(sigma.warning());
}

TEST_CASE("surface tensions: symmetric three-well is symmetric") {
  auto p = symmetric_three_well();
  GeodesicParams gp;
  gp.nodes = 96;
  gp.budget = 3000;
  gp.restarts = 3;
  auto sigma = surface_tensions(p, gp, 2);
  double s01 = sigma(0, 1), s02 = sigma(0, 2), s12 = sigma(1, 2);
  CHECK(s01 > 0.0);
  CHECK(std::abs(s01 - s02) <= 1e-4 * s01);
  CHECK(std::abs(s01 - s12) <= 1e-4 * s01);
  CHECK_NOTHROW(sigma.check_metric_axioms());
}

TEST_CASE("metric axioms on wells and random probe points") {
  auto p = symmetric_three_well();
  GeodesicParams gp;
  gp.nodes = 64;
  gp.budget = 1500;
  gp.restarts = 2;
  auto sigma = surface_tensions(p, gp, 2);
  Rng rng(17);
  std::uniform_real_distribution<double> unif(-1.2, 1.2);
  for (int k = 0; k < 8; ++k) {
    Vec u{unif(rng), unif(rng)};
    std::array<double, 3> d;
    for (int i = 0; i < 3; ++i) d[i] = phi(p, i, u, 64, 1500);
    // triangle inequality through the probe point, with optimizer slack
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        if (i != j) CHECK(sigma(i, j) <= d[i] + d[j] + 2.0 * sigma.tolerance() + 5e-3);
  }
}

TEST_CASE("difference-quotient Lipschitz bound for phi") {
  // |phi_i(u) - phi_i(v)| <= max sqrt(2W) |u - v| on short segments; the
  // second relaxation is warm-started from the first so quadrature error
  // cancels in the difference. Paths crossing the far well pick up node
  // placement noise against the |.| kink of sqrt(2W), hence the two tiers.
  auto p = MultiwellPotential::scalar_double_well();
  Rng rng(29);
  std::uniform_real_distribution<double> smooth(-0.95, 0.95);
  std::uniform_real_distribution<double> wide(-1.5, 1.5);
  for (int k = 0; k < 20; ++k) {
    double u = k < 12 ? smooth(rng) : wide(rng);
    double v = u + 1e-3;
    GeodesicPath pu = relax_geodesic(p, p.well(0), Vec{u}, 96, 4000);
    std::vector<Vec> init = pu.nodes;
    init.back() = Vec{v};
    GeodesicPath pv = relax_geodesic(p, p.well(0), Vec{v}, 96, 4000, 1e-12, &init);
    double bound = 0.0;
    for (int s = 0; s <= 8; ++s) {
      double x = u + (v - u) * s / 8.0;
      bound = std::max(bound, std::sqrt(2.0 * p.value(Vec{x})));
    }
    double slack = (std::abs(u) <= 0.95 && std::abs(v) <= 0.95) ? 1e-6 : 1e-4;
    CHECK(std::abs(pu.action - pv.action) <= bound * std::abs(v - u) + slack);
  }
}

TEST_CASE("refinement trend of the relaxed action") {
  // Doubling M enlarges the path class, but the trapezoidal action of a
  // concave integrand also grows toward the true line integral when
  // quadrature nodes are inserted, at rate O(1/M^2). The net increase stays
  // within that quadrature correction; decreases are always allowed.
  auto p = symmetric_three_well();
  const int M = 64;
  GeodesicPath coarse = relax_geodesic(p, p.well(0), p.well(1), M, 8000);
  std::vector<Vec> refined;
  for (std::size_t k = 0; k + 1 < coarse.nodes.size(); ++k) {
    refined.push_back(coarse.nodes[k]);
    refined.push_back(coarse.nodes[k] + 0.5 * (coarse.nodes[k + 1] - coarse.nodes[k]));
  }
  refined.push_back(coarse.nodes.back());
  GeodesicPath fine = relax_geodesic(p, p.well(0), p.well(1),
                                     static_cast<int>(refined.size()) - 1, 8000, 1e-10, &refined);
  CHECK(fine.action <= coarse.action + 10.0 * coarse.action / (M * M));
  // and the refined value sits within quadrature error of a converged
  // higher-resolution run
  GeodesicPath dense = relax_geodesic(p, p.well(0), p.well(1), 256, 16000);
  CHECK(dense.converged);
  CHECK(std::abs(fine.action - dense.action) <= 5e-4 * dense.action);
}
