#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <functional>
#include <numbers>
#include <span>
#include <thread>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

namespace llt {

using cplx = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kInvSqrt2Pi = 0.3989422804014327;  // 1/sqrt(2 pi)

/// Standard normal density in d dimensions at squared radius r2.
inline double gaussian_density(double r2, int dim = 1) {
  return std::pow(kInvSqrt2Pi, dim) * std::exp(-0.5 * r2);
}

/// Neumaier compensated accumulator. Works for double and std::complex<double>.
template <typename T>
class CompensatedSum {
 public:
  void add(T x) {
    if constexpr (std::is_same_v<T, double>) {
      add_real(sum_, comp_, x);
    } else {
      double s = sum_.real(), c = comp_.real();
      add_real(s, c, x.real());
      double si = sum_.imag(), ci = comp_.imag();
      add_real(si, ci, x.imag());
      sum_ = T(s, si);
      comp_ = T(c, ci);
    }
  }
  CompensatedSum& operator+=(T x) {
    add(x);
    return *this;
  }
  T value() const { return sum_ + comp_; }

 private:
  static void add_real(double& sum, double& comp, double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      comp += (sum - t) + x;
    } else {
      comp += (x - t) + sum;
    }
    sum = t;
  }
  T sum_{};
  T comp_{};
};

/// Nodes and weights of a quadrature rule on a real interval.
struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Composite 16-point Gauss-Legendre rule on [a, b] with `panels` equal panels.
inline QuadratureRule composite_gauss_legendre(double a, double b, int panels) {
  using Gauss = boost::math::quadrature::gauss<double, 16>;
  const auto& x = Gauss::abscissa();
  const auto& w = Gauss::weights();
  QuadratureRule rule;
  rule.nodes.reserve(static_cast<std::size_t>(panels) * 16);
  rule.weights.reserve(rule.nodes.capacity());
  const double width = (b - a) / panels;
  for (int p = 0; p < panels; ++p) {
    const double mid = a + (p + 0.5) * width;
    const double half = 0.5 * width;
    for (std::size_t i = 0; i < x.size(); ++i) {
      // abscissa() holds the non-negative half of a symmetric rule
      if (x[i] == 0.0) {
        rule.nodes.push_back(mid);
        rule.weights.push_back(half * w[i]);
        continue;
      }
      rule.nodes.push_back(mid - half * x[i]);
      rule.weights.push_back(half * w[i]);
      rule.nodes.push_back(mid + half * x[i]);
      rule.weights.push_back(half * w[i]);
    }
  }
  return rule;
}

/// Worker count: hardware concurrency, capped by LLT_LAB_THREADS when set.
inline unsigned worker_count() {
  unsigned n = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("LLT_LAB_THREADS")) {
    const long cap = std::strtol(env, nullptr, 10);
    if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
  }
  return n;
}

/// Runs body(i) for i in [0, count). Each index is handled by exactly one
/// worker; results must be written to per-index slots so output is
/// independent of scheduling.
inline void parallel_for(std::size_t count, const std::function<void(std::size_t)>& body) {
  const unsigned workers = std::min<std::size_t>(worker_count(), std::max<std::size_t>(count, 1));
  if (workers <= 1 || count < 2) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t i = w; i < count; i += workers) body(i);
    });
  }
  for (auto& t : pool) t.join();
}

/// Least-squares slope of ys against xs.
inline double least_squares_slope(std::span<const double> xs, std::span<const double> ys) {
  const std::size_t n = xs.size();
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (std::size_t i = 0; i < n; ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  return sxx > 0 ? sxy / sxx : 0.0;
}

/// x mod 2 in [0, 2).
inline double mod2(double x) {
  double r = std::fmod(x, 2.0);
  if (r < 0) r += 2.0;
  if (r >= 2.0) r = 0.0;
  return r;
}

}  // namespace llt
