#pragma once

// Fourier inversion of characteristic functions onto uniform grids.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "llt/errors.hpp"
#include "llt/lattice.hpp"
#include "llt/numerics.hpp"

namespace llt {

struct GridAxis {
  double origin = -5.0;
  double step = 0.01;
  long count = 1001;

  double at(long i) const { return origin + static_cast<double>(i) * step; }
  double back() const { return at(count - 1); }
  double max_abs() const { return std::max(std::abs(origin), std::abs(back())); }
};

/// Axis with `points` nodes spanning [lo, hi] inclusive.
inline GridAxis make_axis(double lo, double hi, long points) {
  if (points < 2 || !(hi > lo)) throw InvalidParameter("grid needs hi > lo and at least 2 points");
  return GridAxis{lo, (hi - lo) / static_cast<double>(points - 1), points};
}

inline GridAxis default_axis() { return make_axis(-5.0, 5.0, 1001); }

struct GridMeta {
  std::optional<long> n_used;
  double truncation_radius = 0.0;
  double est_tail_error = 0.0;
  double max_discarded_imag = 0.0;
};

/// Density values on a tensor grid, row-major (last axis fastest).
struct GridDensity {
  std::vector<GridAxis> axes;
  std::vector<double> values;
  GridMeta meta;

  int dim() const { return static_cast<int>(axes.size()); }
  std::size_t size() const { return values.size(); }
  double& at(long i) { return values[static_cast<std::size_t>(i)]; }
  double at(long i) const { return values[static_cast<std::size_t>(i)]; }
  double at(long i, long j) const { return values[static_cast<std::size_t>(i * axes[1].count + j)]; }

  /// Coordinates of flat index `flat`.
  std::vector<double> point(std::size_t flat) const {
    std::vector<double> x(axes.size());
    for (std::size_t a = axes.size(); a-- > 0;) {
      const auto c = static_cast<std::size_t>(axes[a].count);
      x[a] = axes[a].at(static_cast<long>(flat % c));
      flat /= c;
    }
    return x;
  }
};

inline GridDensity empty_grid(const std::vector<GridAxis>& axes) {
  GridDensity g;
  g.axes = axes;
  std::size_t n = 1;
  for (const auto& a : axes) n *= static_cast<std::size_t>(a.count);
  g.values.assign(n, 0.0);
  return g;
}

/// Trapezoid integral of a grid density over its window.
inline double integrate_grid(const GridDensity& g) {
  auto weight = [](const GridAxis& a, long i) { return (i == 0 || i == a.count - 1) ? 0.5 * a.step : a.step; };
  CompensatedSum<double> acc;
  if (g.dim() == 1) {
    for (long i = 0; i < g.axes[0].count; ++i) acc += weight(g.axes[0], i) * g.at(i);
  } else {
    for (long i = 0; i < g.axes[0].count; ++i)
      for (long j = 0; j < g.axes[1].count; ++j) acc += weight(g.axes[0], i) * weight(g.axes[1], j) * g.at(i, j);
  }
  return acc.value();
}

using CfEval = std::function<cplx(std::span<const double>)>;

/// Conservative estimate of (2 pi)^{-d} int_{|t| > R} |cf| dt from samples on
/// geometrically spaced shells, assuming monotone decay beyond R. Returns
/// +inf when the samples do not decay.
inline double estimate_tail(const CfEval& cf, int dim, double R) {
  if (dim < 1 || dim > 2) throw InvalidParameter("estimate_tail supports d = 1, 2");
  if (!(R > 0)) throw InvalidParameter("truncation radius must be positive");
  constexpr int shells = 48;
  constexpr int directions = 16;
  constexpr int radial = 8;  // samples per shell, so oscillating cfs are seen by their envelope
  std::vector<double> radius(shells + 1), sup(shells + 1);
  for (int j = 0; j <= shells; ++j) {
    radius[j] = R * std::pow(2.0, j / 4.0);
    double m = 0.0;
    for (int s = 0; s < radial; ++s) {
      const double r = radius[j] * std::pow(2.0, s / (4.0 * radial));
      if (dim == 1) {
        const double p[1] = {r}, q[1] = {-r};
        m = std::max({m, std::abs(cf(p)), std::abs(cf(q))});
      } else {
        for (int a = 0; a < directions; ++a) {
          const double phi = 2 * kPi * (a + 0.5 * s / radial) / directions;
          const double p[2] = {r * std::cos(phi), r * std::sin(phi)};
          m = std::max(m, std::abs(cf(p)));
        }
      }
    }
    sup[j] = m;
  }
  const double inf = std::numeric_limits<double>::infinity();
  if (sup[0] > 0 && sup[shells] >= 0.5 * sup[0]) return inf;
  auto shell_volume = [dim](double r0, double r1) { return dim == 1 ? 2.0 * (r1 - r0) : kPi * (r1 * r1 - r0 * r0); };
  double total = 0.0;
  for (int j = 0; j < shells; ++j) total += sup[j] * shell_volume(radius[j], radius[j + 1]);
  // beyond the last shell: power law fitted to the envelope of the last shells
  const double b = sup[shells];
  if (b > 0) {
    std::vector<double> lx, ly;
    for (int j = shells - 8; j <= shells; ++j) {
      if (sup[j] <= 0) continue;
      lx.push_back(std::log(radius[j]));
      ly.push_back(std::log(sup[j]));
    }
    const double q = lx.size() >= 2 ? -least_squares_slope(lx, ly) : 0.0;
    if (q <= dim + 0.05) return inf;
    const double r = radius[shells];
    const double surface = dim == 1 ? 2.0 : 2 * kPi * r;
    total += surface * b * r / (q - dim);
  }
  return total / std::pow(2 * kPi, dim);
}

/// (2 pi)^{-d} int_{|t_i| <= R} e^{-i<t,x>} cf(t) dt by the composite
/// trapezoid rule on each axis, for every point of `axes` (d = 1 or 2).
inline GridDensity invert(const CfEval& cf, int dim, const std::vector<GridAxis>& axes, double R, double h) {
  if (dim < 1 || dim > 2 || static_cast<int>(axes.size()) != dim)
    throw InvalidParameter("invert supports d = 1, 2 with one axis per dimension");
  if (!(R > 0) || !(h > 0)) throw InvalidParameter("truncation radius and step must be positive");
  const long half = static_cast<long>(std::ceil(R / h - 1e-9));
  const double step = R / static_cast<double>(half);
  double x_max = 0.0;
  for (const auto& a : axes) x_max = std::max(x_max, a.max_abs());
  if (step * x_max > kPi / 4 * (1 + 1e-12))
    throw InvalidParameter("quadrature step violates the anti-aliasing rule h * x_max <= pi/4");

  const long nodes = 2 * half + 1;
  std::vector<double> t(static_cast<std::size_t>(nodes)), w(static_cast<std::size_t>(nodes));
  for (long j = 0; j < nodes; ++j) {
    t[static_cast<std::size_t>(j)] = step * static_cast<double>(j - half);
    w[static_cast<std::size_t>(j)] = (j == 0 || j == nodes - 1) ? 0.5 * step : step;
  }

  // 1-d transform of a sampled row at every point of an axis
  auto transform = [&](std::span<const cplx> row, const GridAxis& axis) {
    std::vector<cplx> out(static_cast<std::size_t>(axis.count));
    parallel_for(out.size(), [&](std::size_t i) {
      const double x = axis.at(static_cast<long>(i));
      CompensatedSum<cplx> acc;
      for (long j = 0; j < nodes; ++j) {
        const auto u = static_cast<std::size_t>(j);
        acc += w[u] * std::polar(1.0, -t[u] * x) * row[u];
      }
      out[i] = acc.value();
    });
    return out;
  };

  GridDensity g = empty_grid(axes);
  g.meta.truncation_radius = R;
  g.meta.est_tail_error = estimate_tail(cf, dim, R);
  std::vector<cplx> raw;
  if (dim == 1) {
    std::vector<cplx> row(static_cast<std::size_t>(nodes));
    for (long j = 0; j < nodes; ++j) {
      const double p[1] = {t[static_cast<std::size_t>(j)]};
      row[static_cast<std::size_t>(j)] = cf(p);
    }
    raw = transform(row, axes[0]);
    for (auto& v : raw) v /= 2 * kPi;
  } else {
    // inner transform along t_2 for each t_1, then along t_1
    const auto n1 = static_cast<std::size_t>(axes[0].count), n2 = static_cast<std::size_t>(axes[1].count);
    std::vector<cplx> partial(static_cast<std::size_t>(nodes) * n2);  // [t1][x2]
    for (long j1 = 0; j1 < nodes; ++j1) {
      std::vector<cplx> row(static_cast<std::size_t>(nodes));
      for (long j2 = 0; j2 < nodes; ++j2) {
        const double p[2] = {t[static_cast<std::size_t>(j1)], t[static_cast<std::size_t>(j2)]};
        row[static_cast<std::size_t>(j2)] = cf(p);
      }
      const auto col = transform(row, axes[1]);
      std::copy(col.begin(), col.end(), partial.begin() + static_cast<std::ptrdiff_t>(j1 * static_cast<long>(n2)));
    }
    raw.assign(n1 * n2, 0.0);
    for (std::size_t i2 = 0; i2 < n2; ++i2) {
      std::vector<cplx> row(static_cast<std::size_t>(nodes));
      for (long j1 = 0; j1 < nodes; ++j1) row[static_cast<std::size_t>(j1)] = partial[static_cast<std::size_t>(j1) * n2 + i2];
      const auto col = transform(row, axes[0]);
      for (std::size_t i1 = 0; i1 < n1; ++i1) raw[i1 * n2 + i2] = col[i1] / (4 * kPi * kPi);
    }
  }
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double im = std::abs(raw[i].imag());
    if (im > 1e-6) throw InconsistentCf("inverted value has imaginary part " + format_number(im));
    g.meta.max_discarded_imag = std::max(g.meta.max_discarded_imag, im);
    g.values[i] = raw[i].real();
  }
  return g;
}

/// Scalar convenience overload of invert for d = 1.
inline GridDensity invert(const std::function<cplx(double)>& cf, const GridAxis& axis, double R, double h) {
  return invert([&cf](std::span<const double> t) { return cf(t[0]); }, 1, {axis}, R, h);
}

/// (2 pi)^{-1} int_{-R}^{R} e^{-itx} cf(t) dt for a cf vanishing outside
/// [-R, R]. Gauss-Legendre panels broken at 0 and +-R, where compactly
/// supported cfs (triangles and the like) have their kinks; the trapezoid
/// rule would leave an O(h^2) error there. Nothing is truncated.
inline GridDensity invert_compact(const std::function<cplx(double)>& cf, const GridAxis& axis, double R) {
  if (!(R > 0)) throw InvalidParameter("support radius must be positive");
  using rule = boost::math::quadrature::gauss<double, 20>;
  const double width = std::min(0.5, 2.0 / std::max(axis.max_abs(), 1e-12));
  const long panels = static_cast<long>(std::ceil(R / width - 1e-9));
  const double pw = R / static_cast<double>(panels);
  // nodes on [0, R]; the negative half mirrors them
  std::vector<double> t, w;
  const auto& abs = rule::abscissa();
  const auto& wts = rule::weights();
  for (long k = 0; k < panels; ++k) {
    const double mid = pw * (static_cast<double>(k) + 0.5);
    for (std::size_t j = 0; j < abs.size(); ++j) {
      const double a = 0.5 * pw * abs[j];
      const double wt = 0.5 * pw * wts[j];
      if (a == 0.0) {
        t.push_back(mid);
        w.push_back(wt);
      } else {
        t.insert(t.end(), {mid - a, mid + a});
        w.insert(w.end(), {wt, wt});
      }
    }
  }
  std::vector<cplx> pos(t.size()), neg(t.size());
  for (std::size_t j = 0; j < t.size(); ++j) {
    pos[j] = cf(t[j]);
    neg[j] = cf(-t[j]);
  }
  GridDensity g = empty_grid({axis});
  g.meta.truncation_radius = R;
  g.meta.est_tail_error = 0.0;
  std::vector<cplx> raw(static_cast<std::size_t>(axis.count));
  parallel_for(raw.size(), [&](std::size_t i) {
    const double x = axis.at(static_cast<long>(i));
    CompensatedSum<cplx> acc;
    for (std::size_t j = 0; j < t.size(); ++j) {
      const cplx e = std::polar(1.0, -t[j] * x);
      acc += w[j] * (e * pos[j] + std::conj(e) * neg[j]);
    }
    raw[i] = acc.value() / (2 * kPi);
  });
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const double im = std::abs(raw[i].imag());
    if (im > 1e-6) throw InconsistentCf("inverted value has imaginary part " + format_number(im));
    g.meta.max_discarded_imag = std::max(g.meta.max_discarded_imag, im);
    g.values[i] = raw[i].real();
  }
  return g;
}

/// Density of (X + S_n)/sqrt(n), S_n a sum of n symmetric +-1 signs, from the
/// cf of X alone. The smoothed cf f(t/sqrt n) cos^n(t/sqrt n) is split into
/// periods of length pi sqrt(n):
///
///   p_n(x) = sqrt(n)/(2 pi) int_{|t|<=pi/2} e^{-i t y} cos^n(t) F(t) dt,
///   F(t)   = sum_k e^{-i pi k (y + n)} f(pi k + t),   y = x sqrt(n),
///
/// with F summed by twisted_lattice_sum. cos^n t <= e^{-n t^2/2} lets the
/// t-range shrink to |t| <= sqrt(80/n).
inline GridDensity invert_bernoulli_smoothed(const std::function<cplx(double)>& source_cf, long n,
                                             const GridAxis& axis, double tol = 1e-13) {
  if (n < 1) throw InvalidParameter("n must be positive");
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const double L = std::min(kPi / 2, std::sqrt(80.0 / static_cast<double>(n)));
  GridDensity g = empty_grid({axis});
  g.meta.n_used = n;
  std::vector<double> tails(static_cast<std::size_t>(axis.count), 0.0);
  std::vector<double> imags(static_cast<std::size_t>(axis.count), 0.0);
  std::vector<long> reach(static_cast<std::size_t>(axis.count), 0);
  parallel_for(static_cast<std::size_t>(axis.count), [&](std::size_t i) {
    const double y = axis.at(static_cast<long>(i)) * sqrt_n;
    const double alpha = mod2(mod2(y) + static_cast<double>(n % 2));
    const double theta = -kPi * alpha;
    const double freq = std::abs(y) + 40.0;
    const int panels = 4 + static_cast<int>(std::ceil(2 * L * freq / 6.0));
    const auto rule = composite_gauss_legendre(-L, L, panels);
    CompensatedSum<cplx> acc;
    double tail = 0.0;
    long max_index = 0;
    for (std::size_t q = 0; q < rule.nodes.size(); ++q) {
      const double t = rule.nodes[q];
      const double weight = rule.weights[q] * std::pow(std::cos(t), static_cast<double>(n));
      if (weight == 0.0) continue;
      auto term = [&source_cf, t](long k) { return source_cf(kPi * static_cast<double>(k) + t); };
      const LatticeSum F = twisted_lattice_sum(term, theta, {tol, 20'000'000});
      acc += weight * std::polar(1.0, -t * y) * F.value;
      tail += std::abs(weight) * F.tail_estimate;
      max_index = std::max(max_index, F.truncation_index);
    }
    const cplx v = acc.value() * (sqrt_n / (2 * kPi));
    g.values[i] = v.real();
    imags[i] = std::abs(v.imag());
    tails[i] = tail * sqrt_n / (2 * kPi);
    reach[i] = max_index;
  });
  for (std::size_t i = 0; i < imags.size(); ++i) {
    if (imags[i] > 1e-6) throw InconsistentCf("inverted value has imaginary part " + format_number(imags[i]));
    g.meta.max_discarded_imag = std::max(g.meta.max_discarded_imag, imags[i]);
    g.meta.est_tail_error = std::max(g.meta.est_tail_error, tails[i]);
    g.meta.truncation_radius = std::max(g.meta.truncation_radius, kPi * sqrt_n * (static_cast<double>(reach[i]) + 0.5));
  }
  return g;
}

}  // namespace llt
