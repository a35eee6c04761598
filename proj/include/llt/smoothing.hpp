#pragma once

// Densities of Z_n = (X + X_1 + ... + X_n)/sqrt(n), their distance to the
// standard normal density, and convergence studies over a schedule of n.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "llt/distributions.hpp"
#include "llt/errors.hpp"
#include "llt/inversion.hpp"
#include "llt/lattice.hpp"
#include "llt/numerics.hpp"

namespace llt {

struct SmoothedModel {
  Distribution source;
  NoiseDistribution noise;

  SmoothedModel(Distribution source_, NoiseDistribution noise_) : source(std::move(source_)), noise(std::move(noise_)) {
    if (source.dim() != noise.dim()) throw InvalidParameter("source and noise dimensions differ");
  }
  explicit SmoothedModel(Distribution source_) : SmoothedModel(source_, bernoulli_noise(source_.dim())) {}

  int dim() const { return source.dim(); }
};

namespace detail {

/// v(u)^n through n log|v| and n arg v, so large n neither under- nor overflows
/// in intermediate products.
inline cplx noise_power(cplx v, long n) {
  const double mag = std::abs(v);
  if (mag == 0.0) return 0.0;
  const double log_mag = static_cast<double>(n) * std::log(mag);
  if (log_mag < -745.0) return 0.0;
  return std::polar(std::exp(log_mag), std::remainder(static_cast<double>(n) * std::arg(v), 2 * kPi));
}

inline cplx smoothed_cf_1d(const Univariate& source, const Univariate& noise, long n, double t) {
  const double u = t / std::sqrt(static_cast<double>(n));
  const cplx f = source.cf(u);
  if (noise.symmetric_bernoulli) return f * std::pow(std::cos(u), static_cast<double>(n));
  return f * noise_power(noise.cf(u), n);
}

inline void require_n(long n) {
  if (n < 1) throw InvalidParameter("n must be positive");
}

}  // namespace detail

/// f(t/sqrt n) v(t/sqrt n)^n.
inline cplx smoothed_cf(const SmoothedModel& model, long n, std::span<const double> t) {
  detail::require_n(n);
  if (static_cast<int>(t.size()) != model.dim()) throw InvalidParameter("point dimension mismatch");
  cplx v = 1.0;
  for (int i = 0; i < model.dim(); ++i)
    v *= detail::smoothed_cf_1d(model.source.component(i), model.noise.law().component(i), n, t[static_cast<std::size_t>(i)]);
  return v;
}

inline cplx smoothed_cf(const SmoothedModel& model, long n, double t) {
  const double p[1] = {t};
  return smoothed_cf(model, n, p);
}

struct DensityOptions {
  double tol = 1e-13;             // lattice-sum tolerance (Bernoulli noise)
  double tail_target = 1e-12;     // truncation target for the trapezoid route
  std::optional<double> quad_step{};  // forces the trapezoid route with this step
};

namespace detail {

/// One coordinate of p_n on one axis.
inline GridDensity density_1d(const Univariate& source, const Univariate& noise, long n, const GridAxis& axis,
                              const DensityOptions& opts) {
  if (noise.symmetric_bernoulli) {
    if (!source.flags.cf_integrable && source.cf_decay.kind != Decay::Kind::power)
      throw Unsupported("characteristic function of the source has no usable decay");
    return invert_bernoulli_smoothed(source.cf, n, axis, opts.tol);
  }
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  auto fn = [&source, &noise, n](std::span<const double> t) { return smoothed_cf_1d(source, noise, n, t[0]); };
  if (source.cf_support_radius && !opts.quad_step) {
    GridDensity g = invert_compact([&fn](double t) { const double p[1] = {t}; return fn(p); }, axis,
                                   *source.cf_support_radius * sqrt_n);
    g.meta.n_used = n;
    return g;
  }
  double R = 0.0;
  if (source.cf_support_radius) {
    R = *source.cf_support_radius * sqrt_n;
  } else {
    if (!source.flags.cf_integrable) throw Unsupported("smoothed characteristic function is not integrable");
    for (double r = 8.0; r <= 1e5; r *= 1.5) {
      if (estimate_tail(fn, 1, r) <= opts.tail_target) {
        R = r;
        break;
      }
    }
    if (R == 0.0) throw Unsupported("smoothed characteristic function is not integrable");
  }
  const double h = opts.quad_step.value_or(std::min(0.005, kPi / (4 * std::max(axis.max_abs(), 1e-12))));
  GridDensity g = invert(fn, 1, {axis}, R, h);
  g.meta.n_used = n;
  return g;
}

}  // namespace detail

/// Grid density of p_n. Bernoulli noise goes through the periodic-block
/// inversion; other noise through the trapezoid inversion over the ball of
/// radius T sqrt(n) (compactly supported f) or a decay-certified radius.
/// Products with product noise factor into one-dimensional densities.
inline GridDensity density(const SmoothedModel& model, long n, const std::vector<GridAxis>& axes,
                           const DensityOptions& opts = {}) {
  detail::require_n(n);
  if (static_cast<int>(axes.size()) != model.dim()) throw InvalidParameter("one grid axis per dimension required");
  if (model.dim() > 2) throw Unsupported("densities implemented for d <= 2");
  std::vector<GridDensity> parts;
  for (int i = 0; i < model.dim(); ++i)
    parts.push_back(detail::density_1d(model.source.component(i), model.noise.law().component(i), n,
                                       axes[static_cast<std::size_t>(i)], opts));
  if (parts.size() == 1) return parts[0];
  GridDensity g = empty_grid(axes);
  g.meta.n_used = n;
  const long n1 = axes[0].count, n2 = axes[1].count;
  double max1 = 0, max2 = 0;
  for (double v : parts[0].values) max1 = std::max(max1, std::abs(v));
  for (double v : parts[1].values) max2 = std::max(max2, std::abs(v));
  for (long i = 0; i < n1; ++i)
    for (long j = 0; j < n2; ++j) g.values[static_cast<std::size_t>(i * n2 + j)] = parts[0].at(i) * parts[1].at(j);
  const double e1 = parts[0].meta.est_tail_error, e2 = parts[1].meta.est_tail_error;
  g.meta.est_tail_error = max1 * e2 + max2 * e1 + e1 * e2;
  g.meta.truncation_radius = std::max(parts[0].meta.truncation_radius, parts[1].meta.truncation_radius);
  g.meta.max_discarded_imag = std::max(parts[0].meta.max_discarded_imag, parts[1].meta.max_discarded_imag);
  return g;
}

inline GridDensity density(const SmoothedModel& model, long n, const GridAxis& axis, const DensityOptions& opts = {}) {
  return density(model, n, std::vector<GridAxis>{axis}, opts);
}

enum class Norm { l1, l2, sup };

inline std::string to_string(Norm n) {
  switch (n) {
    case Norm::l1:
      return "l1";
    case Norm::l2:
      return "l2";
    case Norm::sup:
      return "sup";
  }
  return "?";
}

inline Norm parse_norm(const std::string& s) {
  if (s == "l1") return Norm::l1;
  if (s == "l2") return Norm::l2;
  if (s == "sup") return Norm::sup;
  throw InvalidParameter("unknown norm: " + s);
}

struct Distance {
  double value = 0.0;
  double out_of_window = 0.0;  // bound on the part of the distance outside the grid window
};

/// Normal density sampled on the same grid as `g`.
inline std::vector<double> gaussian_on_grid(const GridDensity& g) {
  std::vector<double> phi(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) {
    const auto x = g.point(i);
    double r2 = 0;
    for (double v : x) r2 += v * v;
    phi[i] = gaussian_density(r2, g.dim());
  }
  return phi;
}

/// Distance between a grid density and the standard normal density.
/// The sup norm refines the grid maximum by a parabola through the argmax and
/// its neighbours (d = 1).
inline Distance distance_to_gaussian(const GridDensity& g, Norm norm) {
  const auto phi = gaussian_on_grid(g);
  std::vector<double> diff(g.size());
  for (std::size_t i = 0; i < g.size(); ++i) diff[i] = std::abs(g.values[i] - phi[i]);

  // mass of phi outside the window, and mass of p_n missing from it
  double phi_out = 1.0;
  for (const auto& a : g.axes) {
    const double inside = 0.5 * (std::erf(a.back() / std::sqrt(2.0)) - std::erf(a.origin / std::sqrt(2.0)));
    phi_out *= inside;
  }
  phi_out = 1.0 - phi_out;
  const double missing = std::abs(1.0 - integrate_grid(g));

  Distance out;
  if (norm == Norm::sup) {
    const auto it = std::max_element(diff.begin(), diff.end());
    out.value = *it;
    const auto i = static_cast<std::size_t>(it - diff.begin());
    if (g.dim() == 1 && i > 0 && i + 1 < diff.size()) {
      const double a = diff[i - 1], b = diff[i], c = diff[i + 1];
      const double curv = a - 2 * b + c;
      if (curv < 0) out.value = std::max(out.value, b - (c - a) * (c - a) / (8 * curv));
    }
    return out;
  }
  GridDensity tmp = g;
  if (norm == Norm::l1) {
    tmp.values = diff;
    out.value = integrate_grid(tmp);
    out.out_of_window = phi_out + missing;
  } else {
    for (auto& v : diff) v *= v;
    tmp.values = diff;
    out.value = std::sqrt(std::max(0.0, integrate_grid(tmp)));
    out.out_of_window = std::sqrt((phi_out + missing) * std::pow(kInvSqrt2Pi, g.dim()));
  }
  return out;
}

struct ConvergenceReport {
  std::vector<long> n_schedule;
  Norm norm = Norm::sup;
  std::vector<double> l1, l2, sup;
  std::vector<double> out_of_window;  // for the chosen norm
  std::vector<double> tail_error;     // inversion tail estimate per n
  double fitted_log_slope = std::numeric_limits<double>::quiet_NaN();
  std::optional<double> slope_even, slope_odd;
  bool lattice_condition = false;
  std::vector<GridAxis> axes;

  const std::vector<double>& chosen() const { return norm == Norm::l1 ? l1 : norm == Norm::l2 ? l2 : sup; }
};

/// Distances to phi over a schedule of n with least-squares slopes of
/// log distance against log n. When f(pi k) != 0 for some k != 0, even and odd
/// n are fitted separately.
inline ConvergenceReport convergence_study(const SmoothedModel& model, const std::vector<long>& schedule, Norm norm,
                                           const std::vector<GridAxis>& axes, const DensityOptions& opts = {}) {
  if (schedule.empty()) throw InvalidParameter("empty n schedule");
  for (std::size_t i = 0; i < schedule.size(); ++i) {
    detail::require_n(schedule[i]);
    if (i && schedule[i] <= schedule[i - 1]) throw InvalidParameter("n schedule must be strictly increasing");
  }
  if (norm == Norm::sup) {
    const double limit = 0.2 / std::sqrt(static_cast<double>(schedule.back()));
    for (const auto& a : axes)
      if (a.step > limit * (1 + 1e-12))
        throw InvalidParameter("grid step " + format_number(a.step) + " exceeds 0.2/sqrt(n_max) = " + format_number(limit));
  }
  ConvergenceReport rep;
  rep.n_schedule = schedule;
  rep.norm = norm;
  rep.axes = axes;
  rep.lattice_condition = check_pi_lattice_zeros(model.source, 20).max_abs <= 1e-12;
  for (long n : schedule) {
    const GridDensity g = density(model, n, axes, opts);
    rep.l1.push_back(distance_to_gaussian(g, Norm::l1).value);
    rep.l2.push_back(distance_to_gaussian(g, Norm::l2).value);
    rep.sup.push_back(distance_to_gaussian(g, Norm::sup).value);
    rep.out_of_window.push_back(distance_to_gaussian(g, norm).out_of_window);
    rep.tail_error.push_back(g.meta.est_tail_error);
  }
  auto fit = [&](int parity) -> std::optional<double> {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < schedule.size(); ++i) {
      if (parity >= 0 && schedule[i] % 2 != parity) continue;
      const double d = rep.chosen()[i];
      if (!(d > 0)) continue;
      lx.push_back(std::log(static_cast<double>(schedule[i])));
      ly.push_back(std::log(d));
    }
    if (lx.size() < 2) return std::nullopt;
    return least_squares_slope(lx, ly);
  };
  bool mixed = false;
  for (long n : schedule) mixed |= (n % 2) != (schedule[0] % 2);
  if (!rep.lattice_condition && mixed) {
    rep.slope_even = fit(0);
    rep.slope_odd = fit(1);
    if (rep.slope_even) rep.fitted_log_slope = *rep.slope_even;
    else if (rep.slope_odd) rep.fitted_log_slope = *rep.slope_odd;
  } else if (auto s = fit(-1)) {
    rep.fitted_log_slope = *s;
  }
  return rep;
}

enum class TRationale { beta3, pi_radius, unsupported };

inline std::string to_string(TRationale r) {
  switch (r) {
    case TRationale::beta3:
      return "beta3";
    case TRationale::pi_radius:
      return "pi_radius";
    case TRationale::unsupported:
      return "unsupported";
  }
  return "?";
}

struct AdmissibleT {
  double t_value = 0.0;
  TRationale rationale = TRationale::unsupported;
};

/// Whether a one-dimensional noise is symmetric, has no atom at 0, unit
/// variance, and is not the symmetric Bernoulli law; such noise admits
/// support radius pi.
inline bool admits_pi_radius(const NoiseDistribution& noise) {
  if (noise.dim() != 1) return false;
  const auto& c = noise.law().component(0);
  return c.flags.symmetric_about_0 && c.atom_at_zero == 0.0 && !c.symmetric_bernoulli && c.second_moment &&
         std::abs(*c.second_moment - 1.0) <= 1e-10 && c.mean == 0.0;
}

/// Support radius T of the source cf for which the uniform local limit holds
/// with this noise. Without a preference the larger of the available radii is
/// returned (pi when admissible, else 1/beta3).
inline AdmissibleT admissible_T(const NoiseDistribution& noise, std::optional<TRationale> prefer = std::nullopt) {
  auto via_beta3 = [&]() -> AdmissibleT {
    try {
      const double b = beta3(noise);
      if (std::isfinite(b) && b > 0) return {1.0 / b, TRationale::beta3};
    } catch (const Unsupported&) {
    }
    return {0.0, TRationale::unsupported};
  };
  if (prefer == TRationale::beta3) return via_beta3();
  if (prefer == TRationale::pi_radius)
    return admits_pi_radius(noise) ? AdmissibleT{kPi, TRationale::pi_radius} : AdmissibleT{0.0, TRationale::unsupported};
  if (admits_pi_radius(noise)) return {kPi, TRationale::pi_radius};
  return via_beta3();
}

}  // namespace llt
