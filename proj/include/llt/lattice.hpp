#pragma once

// Lattice sums over scaled integer lattices: phase-twisted series of a
// characteristic function, density lattice sums, the pi-lattice vanishing
// test, the Poisson identity check, wrapped autocorrelation and the
// regularity integrals of the cf gradient.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "llt/distributions.hpp"
#include "llt/errors.hpp"
#include "llt/numerics.hpp"

namespace llt {

struct LatticeSum {
  cplx value;
  long truncation_index = 0;
  double tail_estimate = 0.0;
  long terms_used = 0;
};

struct TwistedSumOptions {
  double tol = 1e-12;
  long max_terms = 10'000'000;
};

namespace detail {

/// Sum_{k >= M} w^k g(k) by repeated summation by parts:
/// w^M/(1-w) * sum_j (w/(1-w))^j Delta^j g(M). `g` holds g(M), g(M+1), ...
/// Stops before the finite differences drown in rounding.
inline cplx euler_tail(cplx w, std::vector<cplx> g, long M, double& error) {
  const cplx one_minus = 1.0 - w;
  const cplx ratio = w / one_minus;
  const double r = std::abs(ratio);
  double scale = 0.0;
  for (const auto& v : g) scale = std::max(scale, std::abs(v));
  cplx acc = 0.0;
  cplx factor = 1.0;
  double last = std::numeric_limits<double>::infinity();
  error = 0.0;
  for (std::size_t j = 0; j + 1 < g.size(); ++j) {
    const cplx term = factor * g[0];
    const double roundoff = std::ldexp(scale, static_cast<int>(j)) * 4e-16 * std::pow(r, static_cast<double>(j));
    if (std::abs(term) > last || roundoff > std::abs(term)) break;
    acc += term;
    last = std::abs(term);
    error = std::abs(term) + roundoff;
    for (std::size_t i = 0; i + 1 < g.size() - j; ++i) g[i] = g[i + 1] - g[i];
    factor *= ratio;
  }
  const double phase = std::arg(w) * static_cast<double>(M);
  const cplx lead = std::polar(1.0, std::remainder(phase, 2 * kPi)) / one_minus;
  error *= std::abs(lead);
  return lead * acc;
}

/// w^k for k = 1..count with periodic re-anchoring against drift.
class PhaseWalker {
 public:
  explicit PhaseWalker(double theta) : theta_(theta), step_(std::polar(1.0, theta)), current_(1.0) {}
  cplx next() {
    ++k_;
    if (k_ % 64 == 0) {
      current_ = std::polar(1.0, std::remainder(theta_ * static_cast<double>(k_), 2 * kPi));
    } else {
      current_ *= step_;
    }
    return current_;
  }

 private:
  double theta_;
  cplx step_;
  cplx current_;
  long k_ = 0;
};

}  // namespace detail

/// Sum over k in Z of e^{i theta k} term(k).
///
/// Rapidly decaying terms are summed directly, doubling K until the last
/// shell contributes < tol/10. Algebraically decaying terms switch to an
/// accelerated tail: an alternating factor (-1)^k, if detected, is folded
/// into the phase; then Euler's transformation handles phase != 1 and
/// Richardson extrapolation of the (k, -k) pair sums handles phase == 1.
inline LatticeSum twisted_lattice_sum(const std::function<cplx(long)>& term, double theta,
                                      const TwistedSumOptions& opts = {}) {
  theta = std::remainder(theta, 2 * kPi);
  LatticeSum out;
  CompensatedSum<cplx> sum;
  const cplx t0 = term(0);
  sum += t0;
  long used = 1;

  // direct summation
  double early_scale = std::abs(t0);
  double prev_shell = std::numeric_limits<double>::infinity();
  long K = 0;
  {
    detail::PhaseWalker walk(theta);
    for (long target = 16; target <= 1024; target *= 2) {
      double shell = 0.0;
      double edge = 0.0;
      for (long k = K + 1; k <= target; ++k) {
        const cplx w = walk.next();
        const cplx a = term(k), b = term(-k);
        used += 2;
        sum += w * a + std::conj(w) * b;
        shell += std::abs(a) + std::abs(b);
        edge = std::max(std::abs(a), std::abs(b));
        if (k <= 16) early_scale = std::max(early_scale, edge);
      }
      K = target;
      if (shell < opts.tol / 10) {
        out.value = sum.value();
        out.truncation_index = K;
        out.tail_estimate = shell;
        out.terms_used = used;
        return out;
      }
      if (K >= 64 && shell > prev_shell / 8) break;  // algebraic decay
      prev_shell = shell;
      if (K == 1024 && edge > 0.5 * early_scale) break;
    }
  }

  // slow decay: restart with an accelerated tail
  const long M0 = 64;
  {
    double scale_tail = 0.0;
    for (long k = 1000; k < 1004; ++k) scale_tail = std::max(scale_tail, std::abs(term(k)) + std::abs(term(-k)));
    if (!(scale_tail < 0.5 * std::max(early_scale, 1e-300)) && scale_tail > opts.tol)
      throw Unsupported("lattice series terms show no detectable decay");
  }

  auto second_diff = [&](long sign) {
    double d = 0.0;
    for (long side : {1L, -1L}) {
      cplx g[4];
      for (long i = 0; i < 4; ++i) {
        const long k = M0 + i;
        const double parity = (sign < 0 && (k % 2)) ? -1.0 : 1.0;
        g[i] = parity * term(side * k);
      }
      d += std::abs(g[2] - 2.0 * g[1] + g[0]) + std::abs(g[3] - 2.0 * g[2] + g[1]);
    }
    return d;
  };
  const bool fold = second_diff(-1) < second_diff(1);
  const double w_theta = fold ? std::remainder(theta + kPi, 2 * kPi) : theta;
  const cplx w = std::polar(1.0, w_theta);
  const double delta = std::abs(1.0 - w);
  auto parity = [fold](long k) { return (fold && (k % 2)) ? -1.0 : 1.0; };

  CompensatedSum<cplx> acc;
  acc += t0;
  used = 1;
  if (delta < 1e-9) {
    // phase is +-1: the (k, -k) pairs are real-smooth in k; Richardson in 1/N
    const double sign_base = std::cos(theta) > 0 ? 1.0 : -1.0;  // w^k for the unfolded phase, up to parity
    auto pair = [&](long k) {
      const double s = fold ? parity(k) : (sign_base < 0 && (k % 2) ? -1.0 : 1.0);
      return s * (term(k) + term(-k));
    };
    constexpr int levels = 7;
    std::vector<cplx> partial;
    CompensatedSum<cplx> run;
    long N = 0;
    for (int i = 0; i < levels; ++i) {
      const long target = M0 << i;
      for (long k = N + 1; k <= target; ++k) run += pair(k);
      used += 2 * (target - N);
      N = target;
      partial.push_back(run.value());
    }
    std::vector<cplx> table = partial;
    cplx prev_top = table.back();
    for (int j = 1; j < levels; ++j) {
      const double f = std::ldexp(1.0, j);
      std::vector<cplx> next(table.size() - 1);
      for (std::size_t i = 0; i + 1 < table.size(); ++i) next[i] = (f * table[i + 1] - table[i]) / (f - 1.0);
      prev_top = table.back();
      table = std::move(next);
    }
    out.value = t0 + table.back();
    out.tail_estimate = std::abs(table.back() - prev_top) + 1e-15 * std::abs(partial.back());
    out.truncation_index = N;
    out.terms_used = used;
    return out;
  }

  long M = std::max<long>(M0, static_cast<long>(std::ceil(100.0 / delta)));
  double cap_penalty = 0.0;
  if (M > opts.max_terms) {
    M = opts.max_terms;
    cap_penalty = (std::abs(term(M)) + std::abs(term(-M))) * 4.0 / delta;
  }
  detail::PhaseWalker walk(theta);
  for (long k = 1; k < M; ++k) {
    const cplx ph = walk.next();
    acc += ph * term(k) + std::conj(ph) * term(-k);
  }
  used += 2 * (M - 1);
  constexpr int J = 7;
  std::vector<cplx> gp(J + 1), gn(J + 1);
  for (long i = 0; i <= J; ++i) {
    gp[static_cast<std::size_t>(i)] = parity(M + i) * term(M + i);
    gn[static_cast<std::size_t>(i)] = parity(M + i) * term(-(M + i));
  }
  used += 2 * (J + 1);
  double err_p = 0.0, err_n = 0.0;
  const cplx tail_p = detail::euler_tail(w, gp, M, err_p);
  const cplx tail_n = detail::euler_tail(std::conj(w), gn, M, err_n);
  out.value = acc.value() + tail_p + tail_n;
  out.tail_estimate = err_p + err_n + cap_penalty;
  out.truncation_index = M;
  out.terms_used = used;
  return out;
}

/// Sum over m in Z^d of p(L m + a). Products factor coordinate-wise.
inline LatticeSum sum_density_lattice(const Distribution& dist, double scale, std::span<const double> offset,
                                      double tol = 1e-12) {
  if (!(scale > 0)) throw InvalidParameter("lattice scale must be positive");
  if (static_cast<int>(offset.size()) != dist.dim()) throw InvalidParameter("offset dimension mismatch");
  if (!dist.has_density()) throw Unsupported("distribution has no density");
  LatticeSum total{cplx(1.0, 0.0), 0, 0.0, 0};
  for (int i = 0; i < dist.dim(); ++i) {
    const auto& c = dist.component(i);
    if (!c.density_decay.summable()) throw Unsupported("density does not decay fast enough for a lattice sum");
    const double a = offset[static_cast<std::size_t>(i)];
    auto term = [&c, scale, a](long m) { return cplx(c.density(scale * static_cast<double>(m) + a), 0.0); };
    LatticeSum s = twisted_lattice_sum(term, 0.0, {tol, 10'000'000});
    if (s.truncation_index <= 1024 && c.density_decay.kind != Decay::Kind::power) {
      const double r = scale * static_cast<double>(s.truncation_index + 1) - std::abs(a);
      if (r > 0) {
        const double env = 2.0 * (c.density_decay.bound(r) + c.density_decay.integral_from(r) / scale);
        if (std::isfinite(env)) s.tail_estimate = std::max(s.tail_estimate, env);
      }
    }
    s.value = cplx(s.value.real(), 0.0);
    total.tail_estimate = std::abs(total.value) * s.tail_estimate + std::abs(s.value) * total.tail_estimate +
                          total.tail_estimate * s.tail_estimate;
    total.value *= s.value;
    total.truncation_index = std::max(total.truncation_index, s.truncation_index);
    total.terms_used += s.terms_used;
  }
  return total;
}

inline LatticeSum sum_density_lattice(const Distribution& dist, double scale, double offset, double tol = 1e-12) {
  const double a[1] = {offset};
  return sum_density_lattice(dist, scale, std::span<const double>(a, 1), tol);
}

/// Sum over k in Z^d of e^{i <phase, k>} f(s k).
inline LatticeSum sum_cf_lattice(const Distribution& dist, double step, std::span<const double> phase = {},
                                 double tol = 1e-12) {
  if (!(step > 0)) throw InvalidParameter("lattice step must be positive");
  if (!phase.empty() && static_cast<int>(phase.size()) != dist.dim())
    throw InvalidParameter("phase dimension mismatch");
  LatticeSum total{cplx(1.0, 0.0), 0, 0.0, 0};
  for (int i = 0; i < dist.dim(); ++i) {
    const auto& c = dist.component(i);
    const double theta = phase.empty() ? 0.0 : phase[static_cast<std::size_t>(i)];
    auto term = [&c, step](long k) { return c.cf(step * static_cast<double>(k)); };
    const LatticeSum s = twisted_lattice_sum(term, theta, {tol, 10'000'000});
    total.tail_estimate = std::abs(total.value) * s.tail_estimate + std::abs(s.value) * total.tail_estimate +
                          total.tail_estimate * s.tail_estimate;
    total.value *= s.value;
    total.truncation_index = std::max(total.truncation_index, s.truncation_index);
    total.terms_used += s.terms_used;
  }
  return total;
}

struct LatticeZeros {
  double max_abs = 0.0;
  std::vector<long> argmax_k;
};

/// max over 1 <= ||k||_inf <= K of |f(pi k)|.
inline LatticeZeros check_pi_lattice_zeros(const Distribution& dist, long K) {
  if (K < 1) throw InvalidParameter("K must be positive");
  const int d = dist.dim();
  LatticeZeros out;
  std::vector<long> k(static_cast<std::size_t>(d), -K);
  std::vector<double> t(static_cast<std::size_t>(d));
  for (;;) {
    bool zero = true;
    for (int i = 0; i < d; ++i) {
      t[static_cast<std::size_t>(i)] = kPi * static_cast<double>(k[static_cast<std::size_t>(i)]);
      zero &= k[static_cast<std::size_t>(i)] == 0;
    }
    if (!zero) {
      const double v = std::abs(dist.cf(t));
      if (v > out.max_abs || out.argmax_k.empty()) {
        out.max_abs = v;
        out.argmax_k = k;
      }
    }
    int i = 0;
    while (i < d && k[static_cast<std::size_t>(i)] == K) k[static_cast<std::size_t>(i++)] = -K;
    if (i == d) break;
    ++k[static_cast<std::size_t>(i)];
  }
  return out;
}

struct PoissonCheck {
  double lhs = 0.0;
  double rhs = 0.0;
  double gap = 0.0;
  double lhs_tail = 0.0;
  double rhs_tail = 0.0;
};

/// Reason the Poisson identity sum_m p(m) = sum_k f(2 pi k) cannot be
/// asserted for this law, or nullopt when the hypotheses hold.
inline std::optional<std::string> poisson_hypothesis_failure(const Distribution& dist) {
  if (!dist.has_density()) return "no density";
  const auto flags = dist.flags();
  if (!flags.continuous_density) return "density discontinuous";
  if (!dist.abs_moment1()) return "first absolute moment infinite";
  if (!flags.cf_integrable) return "characteristic function not integrable";
  return std::nullopt;
}

inline PoissonCheck poisson_check(const Distribution& dist, double tol = 1e-12) {
  if (auto why = poisson_hypothesis_failure(dist))
    throw Unsupported("Poisson summation hypotheses not satisfied: " + *why);
  std::vector<double> zero(static_cast<std::size_t>(dist.dim()), 0.0);
  const LatticeSum lhs = sum_density_lattice(dist, 1.0, zero, tol);
  const LatticeSum rhs = sum_cf_lattice(dist, 2 * kPi, {}, tol);
  PoissonCheck out;
  out.lhs = lhs.value.real();
  out.rhs = rhs.value.real();
  out.gap = std::abs(out.lhs - out.rhs);
  out.lhs_tail = lhs.tail_estimate;
  out.rhs_tail = rhs.tail_estimate;
  return out;
}

struct Autocorrelation {
  double value = 0.0;
  double target = 0.0;  // 2^{-d}
  double gap = 0.0;
  double tail_estimate = 0.0;
};

namespace detail {

/// int p(y + x) p(x) dx by adaptive Gauss-Kronrod over the real line.
inline double self_correlation_quadrature(const Univariate& c, double y) {
  auto integrand = [&c, y](double x) { return c.density(y + x) * c.density(x); };
  double err = 0.0;
  const double inf = std::numeric_limits<double>::infinity();
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(integrand, -inf, inf, 15, 1e-13, &err);
}

}  // namespace detail

/// sum over k in Z^d of int p(2k + x) p(x) dx, compared with 2^{-d}.
inline Autocorrelation wrapped_autocorrelation(const Distribution& dist, double tol = 1e-12) {
  if (!dist.has_density()) throw Unsupported("distribution has no density");
  Autocorrelation out;
  double value = 1.0, tail = 0.0;
  for (int i = 0; i < dist.dim(); ++i) {
    const auto& c = dist.component(i);
    if (!c.density_decay.summable()) throw Unsupported("heavy-tailed density: overlaps not summable");
    std::function<cplx(long)> term;
    if (c.self_correlation) {
      term = [&c](long k) { return cplx(c.self_correlation(2.0 * static_cast<double>(k)), 0.0); };
    } else {
      term = [&c](long k) { return cplx(detail::self_correlation_quadrature(c, 2.0 * static_cast<double>(k)), 0.0); };
    }
    const LatticeSum s = twisted_lattice_sum(term, 0.0, {tol, 1'000'000});
    tail = std::abs(value) * s.tail_estimate + std::abs(s.value) * tail + tail * s.tail_estimate;
    value *= s.value.real();
  }
  out.value = value;
  out.target = std::ldexp(1.0, -dist.dim());
  out.gap = std::abs(value - out.target);
  out.tail_estimate = tail;
  return out;
}

/// Euclidean distance from t to the lattice s Z^d.
inline double distance_to_lattice(std::span<const double> t, double s) {
  if (!(s > 0)) throw InvalidParameter("lattice step must be positive");
  double acc = 0.0;
  for (double ti : t) {
    const double r = ti - s * std::nearbyint(ti / s);
    acc += r * r;
  }
  return std::sqrt(acc);
}

enum class RegularityKind { cf_weighted, cf_gradient_weighted };

struct RegularityEstimate {
  double estimate = 0.0;
  bool diverging = false;
  double decay_exponent = 0.0;              // fitted q in shell_j ~ j^{-q}
  std::vector<double> shell_contributions;  // shell j = cells with ||k||_inf = j
};

namespace detail {

inline double regularity_integrand(const Distribution& dist, RegularityKind kind, std::span<const double> t) {
  const auto grad = dist.cf_grad(t);
  double g2 = 0.0;
  for (const auto& g : grad) g2 += std::norm(g);
  double v = std::sqrt(g2);
  if (kind == RegularityKind::cf_weighted) v *= std::abs(dist.cf(t));
  return v;
}

/// Integral over the square cell of side pi centred at c of g(t)/|t - c|^{d-1}.
/// d = 2 uses polar coordinates about the centre, which absorbs the 1/r.
inline double cell_integral(const Distribution& dist, RegularityKind kind, std::span<const double> c) {
  if (dist.dim() == 1) {
    const auto rule = composite_gauss_legendre(c[0] - kPi / 2, c[0] + kPi / 2, 4);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double t[1] = {rule.nodes[i]};
      acc += rule.weights[i] * regularity_integrand(dist, kind, t);
    }
    return acc;
  }
  // eight sectors of angle pi/4; the radial extent reaches the cell boundary
  const auto ang = composite_gauss_legendre(0.0, kPi / 4, 1);
  const auto rad = composite_gauss_legendre(0.0, 1.0, 2);
  double acc = 0.0;
  for (int s = 0; s < 8; ++s) {
    const double base = s * kPi / 4;
    for (std::size_t a = 0; a < ang.nodes.size(); ++a) {
      const double phi = base + ang.nodes[a];
      // angle to the nearest axis direction of this sector's boundary edge
      const double local = (s % 2 == 0) ? ang.nodes[a] : kPi / 4 - ang.nodes[a];
      const double rmax = (kPi / 2) / std::cos(local);
      const double cphi = std::cos(phi), sphi = std::sin(phi);
      for (std::size_t r = 0; r < rad.nodes.size(); ++r) {
        const double rr = rad.nodes[r] * rmax;
        const double t[2] = {c[0] + rr * cphi, c[1] + rr * sphi};
        acc += ang.weights[a] * rad.weights[r] * rmax * regularity_integrand(dist, kind, t);
      }
    }
  }
  return acc;
}

}  // namespace detail

/// Quadrature of the integrands |f||grad f| / ||t||^{d-1} (cf_weighted) or
/// |grad f| / ||t||^{d-1} (cf_gradient_weighted) over ||t||_inf <= pi (K + 1/2),
/// ||t|| the distance to pi Z^d. `diverging` is set when the shell
/// contributions decay no faster than 1/j.
inline RegularityEstimate regularity_integral(const Distribution& dist, RegularityKind kind, long window_K) {
  if (!dist.has_cf_grad()) throw Unsupported("cf gradient unavailable");
  if (dist.dim() > 2) throw Unsupported("regularity integral implemented for d <= 2");
  if (window_K < 4) throw InvalidParameter("window_K must be at least 4");
  const int d = dist.dim();
  RegularityEstimate out;
  out.shell_contributions.assign(static_cast<std::size_t>(window_K + 1), 0.0);
  if (d == 1) {
    for (long j = 0; j <= window_K; ++j) {
      double s = 0.0;
      for (long sign : {1L, -1L}) {
        if (j == 0 && sign < 0) continue;
        const double c[1] = {kPi * static_cast<double>(sign * j)};
        s += detail::cell_integral(dist, kind, c);
      }
      out.shell_contributions[static_cast<std::size_t>(j)] = s;
    }
  } else {
    std::vector<std::pair<long, long>> cells;
    for (long a = -window_K; a <= window_K; ++a)
      for (long b = -window_K; b <= window_K; ++b) cells.emplace_back(a, b);
    std::vector<double> values(cells.size());
    parallel_for(cells.size(), [&](std::size_t i) {
      const double c[2] = {kPi * static_cast<double>(cells[i].first), kPi * static_cast<double>(cells[i].second)};
      values[i] = detail::cell_integral(dist, kind, c);
    });
    for (std::size_t i = 0; i < cells.size(); ++i) {
      const long j = std::max(std::abs(cells[i].first), std::abs(cells[i].second));
      out.shell_contributions[static_cast<std::size_t>(j)] += values[i];
    }
  }
  CompensatedSum<double> total;
  for (double v : out.shell_contributions) total += v;
  out.estimate = total.value();

  std::vector<double> lx, ly;
  for (long j = window_K / 2; j <= window_K; ++j) {
    const double v = out.shell_contributions[static_cast<std::size_t>(j)];
    if (v <= 0) continue;
    lx.push_back(std::log(static_cast<double>(j)));
    ly.push_back(std::log(v));
  }
  out.decay_exponent = lx.size() >= 2 ? -least_squares_slope(lx, ly) : std::numeric_limits<double>::infinity();
  out.diverging = out.decay_exponent <= 1.05;
  return out;
}

}  // namespace llt
