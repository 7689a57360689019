#include <doctest.h>

#include <cmath>

#include "dgflow/potential.hpp"

using namespace dgflow;

namespace {

// independent gradient oracle: central differences of value()
Vec fd_gradient(const MultiwellPotential& p, const Vec& u, double h = 1e-5) {
  Vec g(u.size());
  for (int c = 0; c < u.size(); ++c) {
    Vec up = u, um = u;
    up[c] += h;
    um[c] -= h;
    g[c] = (p.value(up) - p.value(um)) / (2.0 * h);
  }
  return g;
}

MultiwellPotential symmetric_three_well() {
  auto well = [](double deg) {
    double rad = deg * kPi / 180.0;
    return Vec{std::cos(rad), std::sin(rad)};
  };
  return MultiwellPotential::product_wells({well(90.0), well(210.0), well(330.0)});
}

}  // namespace

TEST_CASE("double well values and gradient") {
  auto p = MultiwellPotential::scalar_double_well();
  CHECK(p.value(Vec{1.0}) == 0.0);
  CHECK(p.value(Vec{-1.0}) == 0.0);
  CHECK(p.value(Vec{0.0}) == doctest::Approx(1.0));
  CHECK(p.gradient(Vec{2.0})[0] == doctest::Approx(24.0));
  CHECK(norm(p.gradient(p.well(0))) == 0.0);
}

TEST_CASE("product wells: unit-circle three-well") {
  auto p = symmetric_three_well();
  CHECK(p.value(Vec{0.0, 0.0}) == doctest::Approx(1.0));  // each |0 - alpha|^2 = 1
  for (int i = 0; i < 3; ++i) {
    CHECK(p.value(p.well(i)) == 0.0);
    CHECK(norm(p.gradient(p.well(i))) == 0.0);
  }
  Vec g = p.gradient(Vec{0.0, 0.0});
  Vec g_fd = fd_gradient(p, Vec{0.0, 0.0});
  CHECK(dist(g, g_fd) <= 1e-6 * std::max(1.0, norm(g_fd)));
}

TEST_CASE("gradients match finite differences at random points") {
  Rng rng(7);
  std::uniform_real_distribution<double> unif(-2.0, 2.0);
  auto dw = MultiwellPotential::scalar_double_well();
  auto tw = symmetric_three_well();
  for (int k = 0; k < 1000; ++k) {
    Vec u1{unif(rng)};
    CHECK(dw.value(u1) >= 0.0);
    CHECK(dist(dw.gradient(u1), fd_gradient(dw, u1)) <=
          1e-6 * std::max(1.0, norm(fd_gradient(dw, u1))));
    Vec u2{unif(rng), unif(rng)};
    CHECK(tw.value(u2) >= 0.0);
    CHECK(dist(tw.gradient(u2), fd_gradient(tw, u2)) <=
          1e-6 * std::max(1.0, norm(fd_gradient(tw, u2))));
  }
}

TEST_CASE("wells are the only zeros on a sample grid") {
  auto p = symmetric_three_well();
  Rng rng(11);
  std::uniform_real_distribution<double> unif(-1.6, 1.6);
  for (int k = 0; k < 5000; ++k) {
    Vec u{unif(rng), unif(rng)};
    double dmin = 1e9;
    for (int i = 0; i < 3; ++i) dmin = std::min(dmin, dist(u, p.well(i)));
    if (dmin > 0.05) CHECK(p.value(u) > 1e-8);
  }
}

TEST_CASE("non-finite input is rejected") {
  auto p = MultiwellPotential::scalar_double_well();
  CHECK_THROWS_AS(p.value(Vec{std::numeric_limits<double>::quiet_NaN()}), std::domain_error);
  CHECK_THROWS_AS(p.gradient(Vec{std::numeric_limits<double>::infinity()}), std::domain_error);
}

TEST_CASE("double well split: identity, convexity, hessian bound") {
  auto p = MultiwellPotential::scalar_double_well();
  auto split = PotentialSplit::standard(p);
  CHECK(split.hessian_bound == doctest::Approx(4.0));  // sup |d^2(-2u^2)| = 4
  auto rep = validate_assumptions(p, split, 3.0);
  CHECK(rep.overall);
  CHECK(rep.hessian_bound == doctest::Approx(4.0));
}

TEST_CASE("product wells split validates") {
  auto p = symmetric_three_well();
  auto split = PotentialSplit::standard(p);
  auto rep = validate_assumptions(p, split, 5.5);
  INFO(rep.summary());
  CHECK(rep.overall);
  CHECK(rep.c1 > 0.0);
  CHECK(rep.c2 >= rep.c1);
}

TEST_CASE("split reconstruction and convexity on random samples") {
  auto p = symmetric_three_well();
  auto split = PotentialSplit::standard(p);
  Rng rng(23);
  std::uniform_real_distribution<double> unif(-4.0, 4.0);
  for (int k = 0; k < 10000; ++k) {
    Vec u{unif(rng), unif(rng)}, v{unif(rng), unif(rng)};
    double w = p.value(u);
    CHECK(split.conv_value(u) + split.pert_value(u) ==
          doctest::Approx(w).epsilon(1e-10).scale(std::max(1.0, w)));
    Vec mid = 0.5 * (u + v);
    CHECK(split.conv_value(mid) <=
          0.5 * (split.conv_value(u) + split.conv_value(v)) + 1e-10);
  }
}

TEST_CASE("perturbed well fails validation") {
  // a bump spoils W(alpha_1) = 0
  auto base = MultiwellPotential::scalar_double_well();
  auto value = [base](const Vec& u) {
    double d = u[0] + 1.0;
    return base.value(u) + 0.1 * std::exp(-d * d / 0.01);
  };
  auto gradient = [base](const Vec& u) {
    double d = u[0] + 1.0;
    Vec g = base.gradient(u);
    g[0] += 0.1 * std::exp(-d * d / 0.01) * (-2.0 * d / 0.01);
    return g;
  };
  auto p = MultiwellPotential::custom({Vec{-1.0}, Vec{1.0}}, 4.0, value, gradient);
  auto split = PotentialSplit::standard(p);
  auto rep = validate_assumptions(p, split, 3.0);
  CHECK_FALSE(rep.overall);
  bool wells_check_failed = false;
  for (const auto& c : rep.checks)
    if (c.name.find("wells are zeros") != std::string::npos && !c.pass) wells_check_failed = true;
  CHECK(wells_check_failed);
}

TEST_CASE("sample box must enclose the wells") {
  auto p = MultiwellPotential::scalar_double_well();
  auto split = PotentialSplit::standard(p);
  CHECK_THROWS_AS(validate_assumptions(p, split, 0.5), std::invalid_argument);
}
