#include "dgflow/torus.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <mutex>

namespace dgflow {

namespace {
// FFTW planning is not thread-safe.
std::mutex g_fftw_mutex;
}  // namespace

struct Spectral::Impl {
  std::vector<int> dims;
  std::size_t real_count = 0;
  std::size_t complex_count = 0;
  double* real_buf = nullptr;
  fftw_complex* cplx_buf = nullptr;
  fftw_complex* cplx_buf2 = nullptr;
  fftw_plan fwd = nullptr;
  fftw_plan bwd = nullptr;

  ~Impl() {
    std::lock_guard<std::mutex> lock(g_fftw_mutex);
    if (fwd) fftw_destroy_plan(fwd);
    if (bwd) fftw_destroy_plan(bwd);
    if (real_buf) fftw_free(real_buf);
    if (cplx_buf) fftw_free(cplx_buf);
    if (cplx_buf2) fftw_free(cplx_buf2);
  }
};

Spectral::Spectral(const TorusGrid& grid) : grid_(grid), impl_(std::make_unique<Impl>()) {
  impl_->dims.assign(grid.dim, grid.n);
  impl_->real_count = grid.cell_count();
  std::size_t cc = 1;
  for (int a = 0; a < grid.dim - 1; ++a) cc *= grid.n;
  cc *= grid.n / 2 + 1;
  impl_->complex_count = cc;
  impl_->real_buf = fftw_alloc_real(impl_->real_count);
  impl_->cplx_buf = fftw_alloc_complex(impl_->complex_count);
  impl_->cplx_buf2 = fftw_alloc_complex(impl_->complex_count);
  std::lock_guard<std::mutex> lock(g_fftw_mutex);
  impl_->fwd = fftw_plan_dft_r2c(grid.dim, impl_->dims.data(), impl_->real_buf, impl_->cplx_buf,
                                 FFTW_ESTIMATE);
  impl_->bwd = fftw_plan_dft_c2r(grid.dim, impl_->dims.data(), impl_->cplx_buf2, impl_->real_buf,
                                 FFTW_ESTIMATE);
}

Spectral::~Spectral() = default;

namespace {

// iterate the half-complex spectrum; last axis runs over 0..n/2
template <typename Fn>
void for_each_mode(const TorusGrid& g, Fn&& fn) {
  const int n = g.n;
  const int last = n / 2 + 1;
  std::array<int, 3> k{};
  if (g.dim == 2) {
    std::size_t idx = 0;
    for (int k0 = 0; k0 < n; ++k0) {
      k[0] = k0 <= n / 2 ? k0 : k0 - n;
      for (int k1 = 0; k1 < last; ++k1, ++idx) {
        k[1] = k1;
        fn(idx, k);
      }
    }
  } else {
    std::size_t idx = 0;
    for (int k0 = 0; k0 < n; ++k0) {
      k[0] = k0 <= n / 2 ? k0 : k0 - n;
      for (int k1 = 0; k1 < n; ++k1) {
        k[1] = k1 <= n / 2 ? k1 : k1 - n;
        for (int k2 = 0; k2 < last; ++k2, ++idx) {
          k[2] = k2;
          fn(idx, k);
        }
      }
    }
  }
}

}  // namespace

Field Spectral::laplacian(const Field& f) {
  Field out(grid_, f.ncomp);
  const double q0 = 2.0 * kPi / grid_.length;
  const double scale = 1.0 / static_cast<double>(impl_->real_count);
  for (int c = 0; c < f.ncomp; ++c) {
    for (std::size_t i = 0; i < impl_->real_count; ++i) impl_->real_buf[i] = f.data[i * f.ncomp + c];
    fftw_execute(impl_->fwd);
    for_each_mode(grid_, [&](std::size_t idx, const std::array<int, 3>& k) {
      double q2 = 0.0;
      for (int a = 0; a < grid_.dim; ++a) q2 += (q0 * k[a]) * (q0 * k[a]);
      impl_->cplx_buf2[idx][0] = -q2 * impl_->cplx_buf[idx][0] * scale;
      impl_->cplx_buf2[idx][1] = -q2 * impl_->cplx_buf[idx][1] * scale;
    });
    fftw_execute(impl_->bwd);
    for (std::size_t i = 0; i < impl_->real_count; ++i) out.data[i * f.ncomp + c] = impl_->real_buf[i];
  }
  return out;
}

Field Spectral::gradient(const Field& f) {
  Field out(grid_, f.ncomp * grid_.dim);
  const double q0 = 2.0 * kPi / grid_.length;
  const double scale = 1.0 / static_cast<double>(impl_->real_count);
  const int n = grid_.n;
  for (int c = 0; c < f.ncomp; ++c) {
    for (std::size_t i = 0; i < impl_->real_count; ++i) impl_->real_buf[i] = f.data[i * f.ncomp + c];
    fftw_execute(impl_->fwd);
    std::vector<fftw_complex> hat(impl_->complex_count);
    std::memcpy(hat.data(), impl_->cplx_buf, impl_->complex_count * sizeof(fftw_complex));
    for (int a = 0; a < grid_.dim; ++a) {
      for_each_mode(grid_, [&](std::size_t idx, const std::array<int, 3>& k) {
        // drop the unmatched Nyquist mode of odd derivatives
        double q = (std::abs(k[a]) == n / 2) ? 0.0 : q0 * k[a];
        impl_->cplx_buf2[idx][0] = -q * hat[idx][1] * scale;
        impl_->cplx_buf2[idx][1] = q * hat[idx][0] * scale;
      });
      fftw_execute(impl_->bwd);
      for (std::size_t i = 0; i < impl_->real_count; ++i)
        out.data[i * out.ncomp + c * grid_.dim + a] = impl_->real_buf[i];
    }
  }
  return out;
}

Field Spectral::helmholtz_solve(const Field& rhs, double a, double b) {
  Field out(grid_, rhs.ncomp);
  const double q0 = 2.0 * kPi / grid_.length;
  const double scale = 1.0 / static_cast<double>(impl_->real_count);
  for (int c = 0; c < rhs.ncomp; ++c) {
    for (std::size_t i = 0; i < impl_->real_count; ++i)
      impl_->real_buf[i] = rhs.data[i * rhs.ncomp + c];
    fftw_execute(impl_->fwd);
    for_each_mode(grid_, [&](std::size_t idx, const std::array<int, 3>& k) {
      double q2 = 0.0;
      for (int ax = 0; ax < grid_.dim; ++ax) q2 += (q0 * k[ax]) * (q0 * k[ax]);
      double denom = a + b * q2;
      impl_->cplx_buf2[idx][0] = impl_->cplx_buf[idx][0] * scale / denom;
      impl_->cplx_buf2[idx][1] = impl_->cplx_buf[idx][1] * scale / denom;
    });
    fftw_execute(impl_->bwd);
    for (std::size_t i = 0; i < impl_->real_count; ++i)
      out.data[i * rhs.ncomp + c] = impl_->real_buf[i];
  }
  return out;
}

Field Spectral::mollify(const Field& f, double radius) {
  Field out(grid_, f.ncomp);
  const double q0 = 2.0 * kPi / grid_.length;
  const double scale = 1.0 / static_cast<double>(impl_->real_count);
  for (int c = 0; c < f.ncomp; ++c) {
    for (std::size_t i = 0; i < impl_->real_count; ++i) impl_->real_buf[i] = f.data[i * f.ncomp + c];
    fftw_execute(impl_->fwd);
    for_each_mode(grid_, [&](std::size_t idx, const std::array<int, 3>& k) {
      double q2 = 0.0;
      for (int ax = 0; ax < grid_.dim; ++ax) q2 += (q0 * k[ax]) * (q0 * k[ax]);
      double damp = std::exp(-0.5 * q2 * radius * radius) * scale;
      impl_->cplx_buf2[idx][0] = impl_->cplx_buf[idx][0] * damp;
      impl_->cplx_buf2[idx][1] = impl_->cplx_buf[idx][1] * damp;
    });
    fftw_execute(impl_->bwd);
    for (std::size_t i = 0; i < impl_->real_count; ++i) out.data[i * f.ncomp + c] = impl_->real_buf[i];
  }
  return out;
}

EnergyBreakdown energy(Spectral& sp, const PhaseField& u, const MultiwellPotential& p,
                       const std::vector<double>* weight) {
  if (weight) {
    if (weight->size() != u.f.cells()) throw std::invalid_argument("energy: weight size mismatch");
    for (double w : *weight)
      if (w < 0.0) throw std::invalid_argument("energy: weight must be nonnegative");
  }
  const double eps = u.epsilon;
  const double hd = std::pow(u.grid().h(), u.grid().dim);
  Field grad = sp.gradient(u.f);
  const int N = u.ncomp();
  const int d = u.grid().dim;
  EnergyBreakdown e;
  Vec uc(N);
  for (std::size_t cell = 0; cell < u.f.cells(); ++cell) {
    double w = weight ? (*weight)[cell] : 1.0;
    for (int c = 0; c < N; ++c) uc[c] = u.f.at(cell, c);
    double grad2 = 0.0;
    for (int c = 0; c < N * d; ++c) {
      double g = grad.at(cell, c);
      grad2 += g * g;
    }
    double W = p.value(uc);
    e.dirichlet += w * 0.5 * eps * grad2;
    e.potential += w * W / eps;
    e.modica_mortola += w * std::sqrt(2.0 * W * grad2);
  }
  e.dirichlet *= hd;
  e.potential *= hd;
  e.modica_mortola *= hd;
  e.total = e.dirichlet + e.potential;
  return e;
}

PhiTable::PhiTable(const MultiwellPotential& p, int well_index, const GeodesicParams& params,
                   double target_abs_error)
    : pot_(p), well_(well_index), params_(params), target_(target_abs_error), dims_(p.ambient_dim()) {
  if (dims_ > 3) throw std::invalid_argument("PhiTable: supported for N <= 3");
  lo_.assign(dims_, std::numeric_limits<double>::infinity());
  hi_.assign(dims_, -std::numeric_limits<double>::infinity());
  for (const auto& w : p.wells())
    for (int c = 0; c < dims_; ++c) {
      lo_[c] = std::min(lo_[c], w[c]);
      hi_[c] = std::max(hi_[c], w[c]);
    }
  double span = 0.0;
  for (int c = 0; c < dims_; ++c) span = std::max(span, hi_[c] - lo_[c]);
  if (span <= 0.0) span = 1.0;
  for (int c = 0; c < dims_; ++c) {
    lo_[c] -= 0.25 * span;
    hi_[c] += 0.25 * span;
  }
  well_values_.resize(p.well_count());
  for (int j = 0; j < p.well_count(); ++j)
    well_values_[j] = j == well_index
                          ? 0.0
                          : relax_geodesic(pot_, pot_.well(well_), pot_.well(j), params_.nodes,
                                           params_.budget, params_.rel_tol)
                                .action;
  build({});
}

void PhiTable::build(const std::vector<Vec>& probes) {
  int start = dims_ == 1 ? 65 : (dims_ == 2 ? 33 : 9);
  int cap = dims_ == 1 ? 1025 : (dims_ == 2 ? 129 : 17);
  int m = start;
  Rng rng(mix_seed(991, well_));
  for (;;) {
    shape_.assign(dims_, m);
    std::size_t total = 1;
    for (int c = 0; c < dims_; ++c) total *= m;
    values_.assign(total, 0.0);
    spacing_ = 0.0;
    for (int c = 0; c < dims_; ++c) spacing_ = std::max(spacing_, (hi_[c] - lo_[c]) / (m - 1));
    for (std::size_t idx = 0; idx < total; ++idx) {
      Vec u(dims_);
      std::size_t rem = idx;
      for (int c = dims_ - 1; c >= 0; --c) {
        int i = static_cast<int>(rem % m);
        rem /= m;
        u[c] = lo_[c] + (hi_[c] - lo_[c]) * i / (m - 1);
      }
      values_[idx] = relax_geodesic(pot_, pot_.well(well_), u, params_.nodes, params_.budget,
                                    params_.rel_tol)
                         .action;
    }
    // probe the interpolation error at random points
    double worst = 0.0;
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    int nprobe = dims_ == 1 ? 24 : 12;
    for (int k = 0; k < nprobe; ++k) {
      Vec u(dims_);
      for (int c = 0; c < dims_; ++c) u[c] = lo_[c] + (hi_[c] - lo_[c]) * unif(rng);
      double direct =
          relax_geodesic(pot_, pot_.well(well_), u, params_.nodes, params_.budget, params_.rel_tol)
              .action;
      worst = std::max(worst, std::abs(direct - interpolate(u)));
    }
    for (const auto& u : probes) {
      double direct =
          relax_geodesic(pot_, pot_.well(well_), u, params_.nodes, params_.budget, params_.rel_tol)
              .action;
      worst = std::max(worst, std::abs(direct - interpolate(u)));
    }
    if (worst <= target_ || m >= cap) break;
    m = 2 * (m - 1) + 1;
  }
}

double PhiTable::interpolate(const Vec& u) const {
  std::array<int, 3> base{};
  std::array<double, 3> frac{};
  const int m = shape_[0];
  for (int c = 0; c < dims_; ++c) {
    double t = (u[c] - lo_[c]) / (hi_[c] - lo_[c]) * (m - 1);
    t = std::clamp(t, 0.0, static_cast<double>(m - 1) - 1e-12);
    base[c] = static_cast<int>(t);
    frac[c] = t - base[c];
  }
  double acc = 0.0;
  int corners = 1 << dims_;
  for (int s = 0; s < corners; ++s) {
    double w = 1.0;
    std::size_t idx = 0;
    for (int c = 0; c < dims_; ++c) {
      int bit = (s >> c) & 1;
      w *= bit ? frac[c] : 1.0 - frac[c];
      idx = idx * m + static_cast<std::size_t>(base[c] + bit);
    }
    acc += w * values_[idx];
  }
  return acc;
}

double PhiTable::operator()(const Vec& u) const {
  // exact distances at the wells themselves; the multilinear table cannot
  // represent the conical zero of phi there
  for (int j = 0; j < pot_.well_count(); ++j)
    if (dist(u, pot_.well(j)) <= 1e-12) return well_values_[j];
  bool inside = true;
  for (int c = 0; c < dims_; ++c) inside = inside && u[c] >= lo_[c] && u[c] <= hi_[c];
  if (!inside) {
    // grow the box to cover the query and rebuild
    auto* self = const_cast<PhiTable*>(this);
    for (int c = 0; c < dims_; ++c) {
      double pad = 0.1 * (hi_[c] - lo_[c]);
      self->lo_[c] = std::min(lo_[c], u[c] - pad);
      self->hi_[c] = std::max(hi_[c], u[c] + pad);
    }
    self->build({u});
  }
  return interpolate(u);
}

std::vector<double> psi_field(const PhaseField& u, const PhiTable& table) {
  std::vector<double> out(u.f.cells(), 0.0);
  const int N = u.ncomp();
  Vec uc(N);
  for (std::size_t cell = 0; cell < u.f.cells(); ++cell) {
    for (int c = 0; c < N; ++c) uc[c] = u.f.at(cell, c);
    out[cell] = table(uc);
  }
  return out;
}

}  // namespace dgflow
