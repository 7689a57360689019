#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace dgflow {

inline constexpr double kPi = 3.14159265358979323846;

// Points in the order-parameter space R^N and in the torus R^d share this
// small fixed-capacity vector. N and d are small (<= 4 in practice).
class Vec {
 public:
  Vec() = default;
  explicit Vec(int n, double fill = 0.0) : n_(n) { v_.fill(0.0); for (int i = 0; i < n; ++i) v_[i] = fill; }
  Vec(std::initializer_list<double> xs) : n_(static_cast<int>(xs.size())) {
    v_.fill(0.0);
    int i = 0;
    for (double x : xs) v_[i++] = x;
  }
  static Vec from(std::span<const double> xs) {
    Vec v(static_cast<int>(xs.size()));
    for (int i = 0; i < v.n_; ++i) v.v_[i] = xs[i];
    return v;
  }
  int size() const { return n_; }
  double& operator[](int i) { return v_[i]; }
  double operator[](int i) const { return v_[i]; }
  const double* data() const { return v_.data(); }
  double* data() { return v_.data(); }
  std::span<const double> span() const { return {v_.data(), static_cast<size_t>(n_)}; }

  Vec& operator+=(const Vec& o) { for (int i = 0; i < n_; ++i) v_[i] += o.v_[i]; return *this; }
  Vec& operator-=(const Vec& o) { for (int i = 0; i < n_; ++i) v_[i] -= o.v_[i]; return *this; }
  Vec& operator*=(double s) { for (int i = 0; i < n_; ++i) v_[i] *= s; return *this; }
  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(double s, Vec a) { return a *= s; }

 private:
  static constexpr int kCap = 4;
  int n_ = 0;
  std::array<double, kCap> v_{};
};

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (int i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}
inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }
inline double dist(const Vec& a, const Vec& b) { return norm(a - b); }

inline bool all_finite(std::span<const double> xs) {
  for (double x : xs)
    if (!std::isfinite(x)) return false;
  return true;
}

// Deterministic RNG; every randomized routine takes an explicit seed.
using Rng = std::mt19937_64;

inline uint64_t mix_seed(uint64_t base, uint64_t a, uint64_t b = 0) {
  uint64_t x = base + 0x9e3779b97f4a7c15ULL * (a + 1) + 0x517cc1b727220a95ULL * (b + 1);
  x ^= x >> 33;
  x *= 0xff51afd7ed558ccdULL;
  x ^= x >> 33;
  return x;
}

// Chunked parallel loop. Work items must be independent; results must be
// written to disjoint slots so the output does not depend on scheduling.
inline void parallel_for(std::size_t count, int threads, const std::function<void(std::size_t)>& fn) {
  if (threads <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  int nt = std::min<std::size_t>(threads, count);
  std::vector<std::thread> pool;
  pool.reserve(nt);
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&, t]() {
      for (std::size_t i = t; i < count; i += nt) fn(i);
    });
  }
  for (auto& th : pool) th.join();
}

struct NotConverged : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dgflow
