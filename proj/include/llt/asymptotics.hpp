#pragma once

// Oscillation factor A_n(x) of Bernoulli-smoothed sums when the source cf does
// not vanish on pi Z \ {0}: p_n(x) ~ A_n(x) phi(x), A_n of period 2/sqrt(n).

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

#include "llt/distributions.hpp"
#include "llt/errors.hpp"
#include "llt/inversion.hpp"
#include "llt/lattice.hpp"
#include "llt/numerics.hpp"
#include "llt/oracle.hpp"
#include "llt/smoothing.hpp"

namespace llt {

namespace detail {

inline const Univariate& bernoulli_source(const SmoothedModel& model) {
  if (model.dim() != 1) throw InvalidParameter("oscillation factor is defined for d = 1");
  if (!model.noise.is_bernoulli()) throw Unsupported("oscillation factor requires Bernoulli noise");
  return model.source.component(0);
}

/// Position of x sqrt(n) + n modulo 2, the only thing A_n depends on.
inline double lattice_offset(long n, double x) {
  if (n < 1) throw InvalidParameter("n must be positive");
  return mod2(x * std::sqrt(static_cast<double>(n)) + static_cast<double>(n));
}

}  // namespace detail

/// A_n(x) = sum_k e^{-i pi k (x sqrt n + n)} f(pi k).
inline double oscillation_factor_cf(const SmoothedModel& model, long n, double x, long max_terms = 10'000'000,
                                    double tol = 1e-12) {
  const auto& src = detail::bernoulli_source(model);
  const double a = detail::lattice_offset(n, x);
  auto term = [&src](long k) { return src.cf(kPi * static_cast<double>(k)); };
  const LatticeSum s = twisted_lattice_sum(term, -kPi * a, {tol, max_terms});
  if (std::abs(s.value.imag()) > 1e-9) throw InconsistentCf("oscillation factor has imaginary part " +
                                                            format_number(s.value.imag()));
  return s.value.real();
}

/// A_n(x) = 2 sum_m p(2m + x sqrt n + n).
inline double oscillation_factor_density(const SmoothedModel& model, long n, double x, double tol = 1e-12) {
  detail::bernoulli_source(model);
  return 2.0 * sum_density_lattice(model.source, 2.0, detail::lattice_offset(n, x), tol).value.real();
}

struct OscillationReport {
  long n = 0;
  GridAxis axis;
  GridMeta meta;
  std::vector<double> p_values;
  std::vector<double> a_values;
  double residual_sup = 0.0;
  double gaussian_residual_sup = 0.0;  // sup |p_n - phi|, for comparison
  double period_defect = 0.0;
  double method_gap = 0.0;
};

inline constexpr int kPeriodProbes = 25;

/// A_n on the grid by both formulas, the residual p_n - A_n phi, and the
/// period defect at evenly spread probes.
inline OscillationReport oscillation_report(const SmoothedModel& model, long n, const GridAxis& axis,
                                            long max_terms = 10'000'000) {
  detail::bernoulli_source(model);
  OscillationReport rep;
  rep.n = n;
  rep.axis = axis;
  const GridDensity g = density(model, n, axis);
  rep.meta = g.meta;
  rep.p_values = g.values;
  rep.a_values.resize(static_cast<std::size_t>(axis.count));
  std::vector<double> gap(rep.a_values.size());
  parallel_for(rep.a_values.size(), [&](std::size_t i) {
    const double x = axis.at(static_cast<long>(i));
    const double a_cf = oscillation_factor_cf(model, n, x, max_terms);
    const double a_den = oscillation_factor_density(model, n, x);
    rep.a_values[i] = a_cf;
    gap[i] = std::abs(a_cf - a_den);
  });
  for (std::size_t i = 0; i < rep.a_values.size(); ++i) {
    const double x = axis.at(static_cast<long>(i));
    const double phi = gaussian_density(x * x, 1);
    rep.method_gap = std::max(rep.method_gap, gap[i]);
    rep.residual_sup = std::max(rep.residual_sup, std::abs(g.values[i] - rep.a_values[i] * phi));
    rep.gaussian_residual_sup = std::max(rep.gaussian_residual_sup, std::abs(g.values[i] - phi));
  }
  const double period = 2.0 / std::sqrt(static_cast<double>(n));
  for (int j = 0; j < kPeriodProbes; ++j) {
    const double x = axis.origin + (axis.back() - axis.origin) * (j + 0.5) / kPeriodProbes;
    rep.period_defect = std::max(rep.period_defect, std::abs(oscillation_factor_cf(model, n, x + period, max_terms) -
                                                             oscillation_factor_cf(model, n, x, max_terms)));
  }
  return rep;
}

/// Least-squares slope of log residual_sup against log n.
inline double residual_slope(std::span<const OscillationReport> reports) {
  std::vector<double> lx, ly;
  for (const auto& r : reports) {
    if (!(r.residual_sup > 0)) continue;
    lx.push_back(std::log(static_cast<double>(r.n)));
    ly.push_back(std::log(r.residual_sup));
  }
  if (lx.size() < 2) return std::numeric_limits<double>::quiet_NaN();
  return least_squares_slope(lx, ly);
}

struct ParityLimits {
  double even_limit = 0.0;
  double odd_limit = 0.0;
};

/// Limits of p_{2n}(0) and p_{2n+1}(0): (2/sqrt(2 pi)) sum_m p(2m) and
/// (2/sqrt(2 pi)) sum_m p(2m + 1).
inline ParityLimits even_odd_limits(const Distribution& source, double tol = 1e-12) {
  if (source.dim() != 1) throw InvalidParameter("parity limits are defined for d = 1");
  const double c = 2.0 * kInvSqrt2Pi;
  return {c * sum_density_lattice(source, 2.0, 0.0, tol).value.real(),
          c * sum_density_lattice(source, 2.0, 1.0, tol).value.real()};
}

struct ParityRate {
  std::vector<long> n_values;
  std::vector<double> even_gap, odd_gap;
  std::vector<double> constants;  // max(gap) sqrt(n)/log(n) per n
  double constant = 0.0;          // max over n
  double spread = 0.0;            // max/min of the per-n constants
};

/// |p_{2n}(0) - even| and |p_{2n+1}(0) - odd| from the exact mixture, scaled
/// by sqrt(n)/log(n) to expose the constant of the log n/sqrt(n) rate.
inline ParityRate parity_rate(const Distribution& source, std::span<const long> n_values) {
  const ParityLimits lim = even_odd_limits(source);
  ParityRate out;
  double lo = std::numeric_limits<double>::infinity();
  for (long n : n_values) {
    if (n < 2) throw InvalidParameter("parity rate needs n >= 2");
    const double e = std::abs(exact_mixture_density(source, 2 * n, 0.0) - lim.even_limit);
    const double o = std::abs(exact_mixture_density(source, 2 * n + 1, 0.0) - lim.odd_limit);
    const double c = std::max(e, o) * std::sqrt(static_cast<double>(n)) / std::log(static_cast<double>(n));
    out.n_values.push_back(n);
    out.even_gap.push_back(e);
    out.odd_gap.push_back(o);
    out.constants.push_back(c);
    out.constant = std::max(out.constant, c);
    lo = std::min(lo, c);
  }
  out.spread = lo > 0 ? out.constant / lo : std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace llt
