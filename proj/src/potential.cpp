#include "dgflow/potential.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace dgflow {

namespace {

void require_finite(const Vec& u) {
  if (!all_finite(u.span())) throw std::domain_error("potential: non-finite input");
}

// C^2 radial blend: 1 on [0, r0], 0 on [r0 + w, inf).
double cutoff(double r, double r0, double w) {
  if (r <= r0) return 1.0;
  if (r >= r0 + w) return 0.0;
  double t = (r - r0) / w;
  double s = ((6.0 * t - 15.0) * t + 10.0) * t * t * t;  // quintic smoothstep
  return 1.0 - s;
}

double cutoff_dr(double r, double r0, double w) {
  if (r <= r0 || r >= r0 + w) return 0.0;
  double t = (r - r0) / w;
  double ds = (30.0 * t * t - 60.0 * t + 30.0) * t * t;
  return -ds / w;
}

}  // namespace

MultiwellPotential MultiwellPotential::scalar_double_well() {
  MultiwellPotential p;
  p.form_ = Form::ScalarDoubleWell;
  p.ambient_dim_ = 1;
  p.wells_ = {Vec{-1.0}, Vec{1.0}};
  p.growth_exponent_ = 4.0;
  return p;
}

MultiwellPotential MultiwellPotential::product_wells(std::vector<Vec> wells) {
  if (wells.size() < 2) throw std::invalid_argument("product_wells: need at least two wells");
  MultiwellPotential p;
  p.form_ = Form::ProductWells;
  p.ambient_dim_ = wells.front().size();
  for (const auto& w : wells)
    if (w.size() != p.ambient_dim_) throw std::invalid_argument("product_wells: mixed dimensions");
  p.wells_ = std::move(wells);
  p.growth_exponent_ = 2.0 * static_cast<double>(p.wells_.size());
  return p;
}

MultiwellPotential MultiwellPotential::custom(std::vector<Vec> wells, double growth_exponent,
                                              std::function<double(const Vec&)> value,
                                              std::function<Vec(const Vec&)> gradient) {
  if (wells.size() < 2) throw std::invalid_argument("custom potential: need at least two wells");
  MultiwellPotential p;
  p.form_ = Form::Custom;
  p.ambient_dim_ = wells.front().size();
  p.wells_ = std::move(wells);
  p.growth_exponent_ = growth_exponent;
  p.custom_value_ = std::move(value);
  p.custom_gradient_ = std::move(gradient);
  return p;
}

double MultiwellPotential::max_well_norm() const {
  double m = 0.0;
  for (const auto& w : wells_) m = std::max(m, norm(w));
  return m;
}

double MultiwellPotential::value(const Vec& u) const {
  require_finite(u);
  switch (form_) {
    case Form::ScalarDoubleWell: {
      double s = u[0] * u[0] - 1.0;
      return s * s;
    }
    case Form::ProductWells: {
      double prod = 1.0;
      for (const auto& a : wells_) {
        double d2 = 0.0;
        for (int c = 0; c < ambient_dim_; ++c) {
          double t = u[c] - a[c];
          d2 += t * t;
        }
        prod *= d2;
      }
      return prod;
    }
    case Form::Custom:
      return custom_value_(u);
  }
  return 0.0;
}

Vec MultiwellPotential::gradient(const Vec& u) const {
  require_finite(u);
  switch (form_) {
    case Form::ScalarDoubleWell: {
      // d/du (u^2-1)^2 = 4u(u^2-1)
      return Vec{4.0 * u[0] * (u[0] * u[0] - 1.0)};
    }
    case Form::ProductWells: {
      // grad prod_i d2_i = sum_i 2(u-a_i) prod_{j!=i} d2_j
      int P = well_count();
      std::vector<double> d2(P);
      for (int i = 0; i < P; ++i) {
        double s = 0.0;
        for (int c = 0; c < ambient_dim_; ++c) {
          double t = u[c] - wells_[i][c];
          s += t * t;
        }
        d2[i] = s;
      }
      Vec g(ambient_dim_);
      for (int i = 0; i < P; ++i) {
        double rest = 2.0;
        for (int j = 0; j < P; ++j)
          if (j != i) rest *= d2[j];
        for (int c = 0; c < ambient_dim_; ++c) g[c] += rest * (u[c] - wells_[i][c]);
      }
      return g;
    }
    case Form::Custom:
      return custom_gradient_(u);
  }
  return Vec(ambient_dim_);
}

double PotentialSplit::conv_curvature_bound(const MultiwellPotential& p, double radius) const {
  // Sampled directional second differences; enough for an iteration constant.
  Rng rng(mix_seed(77, static_cast<uint64_t>(radius * 64.0)));
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);
  int N = p.ambient_dim();
  double hstep = 1e-4 * std::max(1.0, radius);
  double worst = 0.0;
  for (int k = 0; k < 256; ++k) {
    Vec x(N);
    for (int c = 0; c < N; ++c) x[c] = radius * unif(rng);
    Vec e(N);
    double nn = 0.0;
    for (int c = 0; c < N; ++c) {
      e[c] = gauss(rng);
      nn += e[c] * e[c];
    }
    nn = std::sqrt(nn);
    if (nn < 1e-12) continue;
    for (int c = 0; c < N; ++c) e[c] *= hstep / nn;
    double f0 = conv_value(x);
    Vec xp = x + e, xm = x - e;
    double second = (conv_value(xp) - 2.0 * f0 + conv_value(xm)) / (hstep * hstep);
    worst = std::max(worst, std::abs(second));
  }
  return 1.25 * worst;
}

PotentialSplit PotentialSplit::standard(const MultiwellPotential& p) {
  PotentialSplit s;
  if (p.form() == MultiwellPotential::Form::ScalarDoubleWell) {
    s.conv_value = [](const Vec& u) { return u[0] * u[0] * u[0] * u[0] + 1.0; };
    s.conv_grad = [](const Vec& u) { return Vec{4.0 * u[0] * u[0] * u[0]}; };
    s.pert_value = [](const Vec& u) { return -2.0 * u[0] * u[0]; };
    s.pert_grad = [](const Vec& u) { return Vec{-4.0 * u[0]}; };
    s.hessian_bound = 4.0;
    return s;
  }

  // General construction: W_pert = eta(|u|) (W - Q), supported near the
  // wells, with Q(u) = (|u|^2 + 1)^P convex. Then W_conv = (1-eta) W + eta Q.
  const double A = std::max(1.0, p.max_well_norm());
  const double r0 = 3.0 * A;
  const double width = A;
  const int P = p.well_count();
  auto Q = [P](const Vec& u) {
    double s = 1.0;
    double r2 = dot(u, u) + 1.0;
    for (int i = 0; i < P; ++i) s *= r2;
    return s;
  };
  auto Qgrad = [P](const Vec& u) {
    double r2 = dot(u, u) + 1.0;
    double pw = 1.0;
    for (int i = 0; i < P - 1; ++i) pw *= r2;
    Vec g = u;
    g *= 2.0 * P * pw;
    return g;
  };
  MultiwellPotential pot = p;  // value semantics; shared by the closures
  s.pert_value = [pot, Q, r0, width](const Vec& u) {
    double eta = cutoff(norm(u), r0, width);
    if (eta == 0.0) return 0.0;
    return eta * (pot.value(u) - Q(u));
  };
  s.pert_grad = [pot, Q, Qgrad, r0, width](const Vec& u) {
    double r = norm(u);
    double eta = cutoff(r, r0, width);
    Vec g(u.size());
    if (eta == 0.0) return g;
    Vec dW = pot.gradient(u), dQ = Qgrad(u);
    for (int c = 0; c < u.size(); ++c) g[c] = eta * (dW[c] - dQ[c]);
    double deta = cutoff_dr(r, r0, width);
    if (deta != 0.0 && r > 1e-14) {
      double diff = pot.value(u) - Q(u);
      for (int c = 0; c < u.size(); ++c) g[c] += deta * diff * u[c] / r;
    }
    return g;
  };
  auto pert_value = s.pert_value;
  auto pert_grad = s.pert_grad;
  s.conv_value = [pot, pert_value](const Vec& u) { return pot.value(u) - pert_value(u); };
  s.conv_grad = [pot, pert_grad](const Vec& u) {
    Vec g = pot.gradient(u), gp = pert_grad(u);
    for (int c = 0; c < u.size(); ++c) g[c] -= gp[c];
    return g;
  };

  // Measure sup |D^2 W_pert| on its support (|u| <= r0 + width).
  Rng rng(mix_seed(123, P));
  std::uniform_real_distribution<double> unif(-(r0 + width), r0 + width);
  std::normal_distribution<double> gauss(0.0, 1.0);
  int N = p.ambient_dim();
  double hstep = 1e-4 * (r0 + width);
  double worst = 0.0;
  for (int k = 0; k < 2000; ++k) {
    Vec x(N);
    for (int c = 0; c < N; ++c) x[c] = unif(rng);
    Vec e(N);
    double nn = 0.0;
    for (int c = 0; c < N; ++c) {
      e[c] = gauss(rng);
      nn += e[c] * e[c];
    }
    nn = std::sqrt(nn);
    if (nn < 1e-12) continue;
    for (int c = 0; c < N; ++c) e[c] *= hstep / nn;
    double second = (s.pert_value(x + e) - 2.0 * s.pert_value(x) + s.pert_value(x - e)) / (hstep * hstep);
    worst = std::max(worst, std::abs(second));
  }
  s.hessian_bound = worst;
  return s;
}

std::string AssumptionReport::summary() const {
  std::ostringstream os;
  os << (overall ? "PASS" : "FAIL") << " (c1=" << c1 << ", c2=" << c2 << ", c3=" << c3
     << ", |D2 W_pert|<=" << hessian_bound << ")\n";
  for (const auto& c : checks)
    os << "  [" << (c.pass ? "ok" : "FAIL") << "] " << c.name << " = " << c.measured
       << (c.note.empty() ? "" : ("  " + c.note)) << "\n";
  return os.str();
}

AssumptionReport validate_assumptions(const MultiwellPotential& p, const PotentialSplit& split,
                                      double sample_box_radius, uint64_t seed) {
  for (const auto& w : p.wells())
    if (norm(w) > sample_box_radius)
      throw std::invalid_argument("validate_assumptions: sample box must enclose all wells");

  AssumptionReport rep;
  const int N = p.ambient_dim();
  Rng rng(seed);
  std::uniform_real_distribution<double> unif(-sample_box_radius, sample_box_radius);
  auto sample = [&]() {
    Vec u(N);
    for (int c = 0; c < N; ++c) u[c] = unif(rng);
    return u;
  };

  // Wells are critical zeros.
  {
    double worst_val = 0.0, worst_grad = 0.0;
    for (int i = 0; i < p.well_count(); ++i) {
      worst_val = std::max(worst_val, std::abs(p.value(p.well(i))));
      worst_grad = std::max(worst_grad, norm(p.gradient(p.well(i))));
    }
    rep.checks.push_back({"wells are zeros (max W(alpha))", worst_val <= 1e-12, worst_val, ""});
    rep.checks.push_back({"wells are critical (max |grad W(alpha)|)", worst_grad <= 1e-9, worst_grad, ""});
  }

  // No spurious zeros away from the wells.
  {
    double min_away = std::numeric_limits<double>::infinity();
    for (int k = 0; k < 4000; ++k) {
      Vec u = sample();
      double dmin = std::numeric_limits<double>::infinity();
      for (int i = 0; i < p.well_count(); ++i) dmin = std::min(dmin, dist(u, p.well(i)));
      if (dmin > 0.05) min_away = std::min(min_away, p.value(u));
    }
    rep.checks.push_back({"no spurious zeros (min W at dist>0.05)", min_away > 1e-8, min_away, ""});
  }

  // Growth window on the sphere |u| = 5 max|alpha|.
  {
    double R = 5.0 * std::max(1e-9, p.max_well_norm());
    double pexp = p.growth_exponent();
    double c1 = std::numeric_limits<double>::infinity(), c2 = 0.0, c3 = 0.0;
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int k = 0; k < 2000; ++k) {
      Vec u(N);
      double nn = 0.0;
      for (int c = 0; c < N; ++c) {
        u[c] = gauss(rng);
        nn += u[c] * u[c];
      }
      nn = std::sqrt(nn);
      if (nn < 1e-12) continue;
      for (int c = 0; c < N; ++c) u[c] *= R / nn;
      double w = p.value(u);
      double g = norm(p.gradient(u));
      c1 = std::min(c1, w / std::pow(R, pexp));
      c2 = std::max(c2, w / std::pow(R, pexp));
      c3 = std::max(c3, g / std::pow(R, pexp - 1.0));
      if (N == 1) break;  // only two points on the 0-sphere
    }
    if (N == 1) {
      Vec up{R}, un{-R};
      c1 = std::min(p.value(up), p.value(un)) / std::pow(R, pexp);
      c2 = std::max(p.value(up), p.value(un)) / std::pow(R, pexp);
      c3 = std::max(norm(p.gradient(up)), norm(p.gradient(un))) / std::pow(R, pexp - 1.0);
    }
    rep.c1 = c1;
    rep.c2 = c2;
    rep.c3 = c3;
    bool ok = c1 > 0.0 && std::isfinite(c2) && std::isfinite(c3);
    rep.checks.push_back({"growth window c1 |u|^p <= W", ok, c1, ""});
    rep.checks.push_back({"growth window W <= c2 |u|^p", ok, c2, ""});
    rep.checks.push_back({"gradient growth |grad W| <= c3 |u|^{p-1}", ok, c3, ""});
  }

  // Split identity and convexity of the convex part.
  {
    double worst_rel = 0.0, worst_conv = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < 10000; ++k) {
      Vec u = sample();
      double w = p.value(u);
      double s = split.conv_value(u) + split.pert_value(u);
      worst_rel = std::max(worst_rel, std::abs(s - w) / std::max(1.0, std::abs(w)));
      Vec v = sample();
      Vec mid = 0.5 * (u + v);
      double gap = split.conv_value(mid) - 0.5 * (split.conv_value(u) + split.conv_value(v));
      worst_conv = std::max(worst_conv, gap);
    }
    rep.checks.push_back({"split identity (max rel err)", worst_rel <= 1e-10, worst_rel, ""});
    rep.checks.push_back({"W_conv midpoint convexity (max gap)", worst_conv <= 1e-10, worst_conv, ""});
  }

  rep.hessian_bound = split.hessian_bound;
  rep.checks.push_back({"perturbation Hessian bound finite", std::isfinite(split.hessian_bound),
                        split.hessian_bound, ""});

  rep.overall = true;
  for (const auto& c : rep.checks) rep.overall = rep.overall && c.pass;
  return rep;
}

}  // namespace dgflow
