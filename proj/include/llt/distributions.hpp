#pragma once

// Catalog of one-dimensional laws with closed-form density / characteristic
// function pairs, and their coordinate-wise products.

#include <charconv>
#include <cmath>
#include <complex>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/quadrature/exp_sinh.hpp>

#include "llt/errors.hpp"
#include "llt/numerics.hpp"

namespace llt {

/// Tail envelope of a function g on the real line: |g(x)| <= bound(|x|) for
/// |x| >= start.
struct Decay {
  enum class Kind { compact, gaussian, exponential, power };
  Kind kind = Kind::compact;
  double rate = 0.0;         // support radius, 1/sigma^2, exponential rate or power exponent
  double coefficient = 0.0;  // multiplicative constant of the envelope
  double start = 0.0;

  double bound(double r) const {
    switch (kind) {
      case Kind::compact:
        return r > rate ? 0.0 : std::numeric_limits<double>::infinity();
      case Kind::gaussian:
        return coefficient * std::exp(-0.5 * rate * r * r);
      case Kind::exponential:
        return coefficient * std::exp(-rate * r);
      case Kind::power:
        return r <= 0 ? std::numeric_limits<double>::infinity() : coefficient * std::pow(r, -rate);
    }
    return std::numeric_limits<double>::infinity();
  }

  /// Upper bound of the integral of the envelope over [r, inf).
  double integral_from(double r) const {
    r = std::max(r, start);
    switch (kind) {
      case Kind::compact:
        return r >= rate ? 0.0 : std::numeric_limits<double>::infinity();
      case Kind::gaussian:
        return coefficient * std::sqrt(kPi / (2 * rate)) * std::erfc(r * std::sqrt(rate / 2));
      case Kind::exponential:
        return coefficient * std::exp(-rate * r) / rate;
      case Kind::power:
        if (rate <= 1.0 || r <= 0) return std::numeric_limits<double>::infinity();
        return coefficient * std::pow(r, 1.0 - rate) / (rate - 1.0);
    }
    return std::numeric_limits<double>::infinity();
  }

  bool summable() const { return kind != Kind::power || rate > 1.0; }
};

struct DistributionFlags {
  bool symmetric_about_0 = false;
  bool bounded_variation_density = false;
  bool cf_nonnegative = false;
  bool continuous_density = false;
  bool cf_integrable = false;
};

/// One coordinate of a (possibly product) law. Every function is pure.
struct Univariate {
  std::string family;
  std::vector<std::pair<std::string, double>> params;

  std::function<double(double)> density;  // empty for purely atomic laws
  std::function<cplx(double)> cf;
  std::function<cplx(double)> cf_deriv;
  std::function<cplx(double)> cf_second;
  std::function<double(double)> self_correlation;  // y -> int p(y + x) p(x) dx, when closed form
  std::function<double(std::mt19937_64&)> sample;

  std::optional<double> abs_moment1;
  std::optional<double> second_moment;
  std::optional<double> abs_moment3;
  std::optional<double> cf_support_radius;
  std::optional<double> density_support_radius;
  Decay density_decay;
  Decay cf_decay;
  DistributionFlags flags;
  double mean = 0.0;
  double atom_at_zero = 0.0;
  bool symmetric_bernoulli = false;  // the law of +-1 with probability 1/2
};

inline std::string format_number(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

/// A law on R^d given as a product of one-dimensional components (d = 1 is a
/// single component). Immutable after construction.
class Distribution {
 public:
  explicit Distribution(std::vector<Univariate> components) : components_(std::move(components)) {
    if (components_.empty()) throw InvalidParameter("product of an empty list of distributions");
  }

  int dim() const { return static_cast<int>(components_.size()); }
  bool is_product() const { return components_.size() > 1; }
  const Univariate& component(int i) const { return components_.at(static_cast<std::size_t>(i)); }
  std::span<const Univariate> components() const { return components_; }

  bool has_density() const {
    for (const auto& c : components_)
      if (!c.density) return false;
    return true;
  }

  double density(double x) const { return scalar().density(x); }
  double density(std::span<const double> x) const {
    check_dim(x.size());
    double v = 1.0;
    for (std::size_t i = 0; i < components_.size(); ++i) v *= components_[i].density(x[i]);
    return v;
  }

  cplx cf(double t) const { return scalar().cf(t); }
  cplx cf(std::span<const double> t) const {
    check_dim(t.size());
    cplx v = 1.0;
    for (std::size_t i = 0; i < components_.size(); ++i) v *= components_[i].cf(t[i]);
    return v;
  }

  bool has_cf_grad() const {
    for (const auto& c : components_)
      if (!c.cf_deriv) return false;
    return true;
  }
  bool has_cf_second() const { return dim() == 1 && static_cast<bool>(components_[0].cf_second); }

  cplx cf_deriv(double t) const { return scalar().cf_deriv(t); }
  cplx cf_second(double t) const {
    if (!has_cf_second()) throw Unsupported("second derivative of the characteristic function unavailable");
    return components_[0].cf_second(t);
  }

  std::vector<cplx> cf_grad(std::span<const double> t) const {
    check_dim(t.size());
    std::vector<cplx> values(components_.size()), derivs(components_.size());
    for (std::size_t i = 0; i < components_.size(); ++i) {
      values[i] = components_[i].cf(t[i]);
      derivs[i] = components_[i].cf_deriv(t[i]);
    }
    std::vector<cplx> grad(components_.size());
    for (std::size_t i = 0; i < components_.size(); ++i) {
      cplx g = derivs[i];
      for (std::size_t j = 0; j < components_.size(); ++j)
        if (j != i) g *= values[j];
      grad[i] = g;
    }
    return grad;
  }

  /// Finite iff every coordinate has finite E|X_i|; for products this is the
  /// bound sum_i E|X_i| >= E|X|.
  std::optional<double> abs_moment1() const {
    double s = 0.0;
    for (const auto& c : components_) {
      if (!c.abs_moment1) return std::nullopt;
      s += *c.abs_moment1;
    }
    return s;
  }

  /// E|X|^2.
  std::optional<double> second_moment() const {
    double s = 0.0;
    for (const auto& c : components_) {
      if (!c.second_moment) return std::nullopt;
      s += *c.second_moment;
    }
    return s;
  }

  /// Radius of the sup-norm ball carrying the cf, when every factor is compactly supported.
  std::optional<double> cf_support_radius() const {
    std::optional<double> r;
    for (const auto& c : components_) {
      if (!c.cf_support_radius) return std::nullopt;
      r = r ? std::min(*r, *c.cf_support_radius) : *c.cf_support_radius;
    }
    return r;
  }

  DistributionFlags flags() const {
    DistributionFlags f{true, true, true, true, true};
    for (const auto& c : components_) {
      f.symmetric_about_0 &= c.flags.symmetric_about_0;
      f.bounded_variation_density &= c.flags.bounded_variation_density;
      f.cf_nonnegative &= c.flags.cf_nonnegative;
      f.continuous_density &= c.flags.continuous_density;
      f.cf_integrable &= c.flags.cf_integrable;
    }
    return f;
  }

  /// Catalog spec string, e.g. "laplace:b=1" or "product:uniform:h=1,uniform:h=1".
  std::string spec() const {
    if (components_.size() == 1) return component_spec(components_[0]);
    std::string s = "product:";
    for (std::size_t i = 0; i < components_.size(); ++i) {
      if (i) s += ',';
      s += component_spec(components_[i]);
    }
    return s;
  }

 private:
  const Univariate& scalar() const {
    if (components_.size() != 1) throw InvalidParameter("scalar evaluation of a multivariate distribution");
    return components_[0];
  }
  void check_dim(std::size_t n) const {
    if (n != components_.size()) throw InvalidParameter("point dimension does not match distribution dimension");
  }
  static std::string component_spec(const Univariate& u) {
    std::string s = u.family;
    for (std::size_t i = 0; i < u.params.size(); ++i) {
      s += (i == 0 ? ':' : ';');
      s += u.params[i].first + "=" + format_number(u.params[i].second);
    }
    return s;
  }

  std::vector<Univariate> components_;
};

using SourceDistribution = Distribution;

namespace detail {

inline void require_positive(double v, const char* what) {
  if (!(v > 0.0) || !std::isfinite(v)) throw InvalidParameter(std::string(what) + " must be positive and finite");
}

// sin(u)/u and its first two derivatives, with series near 0.
inline double sinc(double u) {
  if (std::abs(u) < 1e-4) {
    const double u2 = u * u;
    return 1.0 - u2 / 6.0 + u2 * u2 / 120.0;
  }
  return std::sin(u) / u;
}
inline double sinc_d1(double u) {
  if (std::abs(u) < 1e-4) return -u / 3.0 + u * u * u / 30.0;
  return (u * std::cos(u) - std::sin(u)) / (u * u);
}
inline double sinc_d2(double u) {
  if (std::abs(u) < 1e-3) return -1.0 / 3.0 + u * u / 10.0;
  return ((2.0 - u * u) * std::sin(u) - 2.0 * u * std::cos(u)) / (u * u * u);
}

}  // namespace detail

/// Uniform law on [-h, h]. At the endpoints the density takes the midpoint
/// value 1/(4h), which is what Fourier inversion converges to.
inline Univariate uniform_component(double h) {
  detail::require_positive(h, "uniform halfwidth");
  Univariate u;
  u.family = "uniform";
  u.params = {{"h", h}};
  u.density = [h](double x) {
    const double a = std::abs(x);
    if (a < h) return 0.5 / h;
    if (a == h) return 0.25 / h;
    return 0.0;
  };
  u.cf = [h](double t) { return cplx(detail::sinc(h * t), 0.0); };
  u.cf_deriv = [h](double t) { return cplx(h * detail::sinc_d1(h * t), 0.0); };
  u.cf_second = [h](double t) { return cplx(h * h * detail::sinc_d2(h * t), 0.0); };
  u.self_correlation = [h](double y) {
    const double a = std::abs(y);
    return a >= 2 * h ? 0.0 : (0.5 / h) * (1.0 - a / (2 * h));
  };
  u.sample = [h](std::mt19937_64& rng) { return std::uniform_real_distribution<double>(-h, h)(rng); };
  u.abs_moment1 = h / 2;
  u.second_moment = h * h / 3;
  u.abs_moment3 = h * h * h / 4;
  u.density_support_radius = h;
  u.density_decay = {Decay::Kind::compact, h, 0.5 / h, 0.0};
  u.cf_decay = {Decay::Kind::power, 1.0, 1.0 / h, 0.0};
  u.flags = {.symmetric_about_0 = true,
             .bounded_variation_density = true,
             .cf_nonnegative = false,
             .continuous_density = false,
             .cf_integrable = false};
  return u;
}

/// Two-sided exponential law with density exp(-|x|/b)/(2b).
inline Univariate laplace_component(double b) {
  detail::require_positive(b, "laplace scale");
  Univariate u;
  u.family = "laplace";
  u.params = {{"b", b}};
  u.density = [b](double x) { return std::exp(-std::abs(x) / b) / (2 * b); };
  u.cf = [b](double t) { return cplx(1.0 / (1.0 + b * b * t * t), 0.0); };
  u.cf_deriv = [b](double t) {
    const double d = 1.0 + b * b * t * t;
    return cplx(-2.0 * b * b * t / (d * d), 0.0);
  };
  u.cf_second = [b](double t) {
    const double b2 = b * b, d = 1.0 + b2 * t * t;
    return cplx((6.0 * b2 * b2 * t * t - 2.0 * b2) / (d * d * d), 0.0);
  };
  u.self_correlation = [b](double y) {
    const double a = std::abs(y) / b;
    return (1.0 + a) * std::exp(-a) / (4 * b);
  };
  u.sample = [b](std::mt19937_64& rng) {
    const double e = std::exponential_distribution<double>(1.0 / b)(rng);
    return std::bernoulli_distribution(0.5)(rng) ? e : -e;
  };
  u.abs_moment1 = b;
  u.second_moment = 2 * b * b;
  u.abs_moment3 = 6 * b * b * b;
  u.density_decay = {Decay::Kind::exponential, 1.0 / b, 0.5 / b, 0.0};
  u.cf_decay = {Decay::Kind::power, 2.0, 1.0 / (b * b), 0.0};
  u.flags = {.symmetric_about_0 = true,
             .bounded_variation_density = true,
             .cf_nonnegative = true,
             .continuous_density = true,
             .cf_integrable = true};
  return u;
}

inline Univariate gaussian_component(double sigma) {
  detail::require_positive(sigma, "gaussian sigma");
  Univariate u;
  u.family = "gaussian";
  u.params = {{"sigma", sigma}};
  const double s2 = sigma * sigma;
  u.density = [sigma, s2](double x) { return kInvSqrt2Pi / sigma * std::exp(-0.5 * x * x / s2); };
  u.cf = [s2](double t) { return cplx(std::exp(-0.5 * s2 * t * t), 0.0); };
  u.cf_deriv = [s2](double t) { return cplx(-s2 * t * std::exp(-0.5 * s2 * t * t), 0.0); };
  u.cf_second = [s2](double t) { return cplx((s2 * s2 * t * t - s2) * std::exp(-0.5 * s2 * t * t), 0.0); };
  u.self_correlation = [s2](double y) { return 0.5 / std::sqrt(kPi * s2) * std::exp(-0.25 * y * y / s2); };
  u.sample = [sigma](std::mt19937_64& rng) { return std::normal_distribution<double>(0.0, sigma)(rng); };
  u.abs_moment1 = sigma * std::sqrt(2.0 / kPi);
  u.second_moment = s2;
  u.abs_moment3 = 2.0 * std::sqrt(2.0 / kPi) * s2 * sigma;
  u.density_decay = {Decay::Kind::gaussian, 1.0 / s2, kInvSqrt2Pi / sigma, 0.0};
  u.cf_decay = {Decay::Kind::gaussian, s2, 1.0, 0.0};
  u.flags = {.symmetric_about_0 = true,
             .bounded_variation_density = true,
             .cf_nonnegative = true,
             .continuous_density = true,
             .cf_integrable = true};
  return u;
}

/// Fejer law: triangular cf (1 - |t|/T)^+ and density (1 - cos Tx)/(pi T x^2).
/// E|X| is infinite, so every moment field is left empty.
inline Univariate fejer_component(double T) {
  detail::require_positive(T, "fejer support radius");
  Univariate u;
  u.family = "fejer";
  u.params = {{"T", T}};
  u.density = [T](double x) {
    const double v = T * x;
    if (std::abs(v) < 1e-4) {
      const double v2 = v * v;
      return T / (2 * kPi) * (1.0 - v2 / 12.0 + v2 * v2 / 360.0);
    }
    const double s = std::sin(0.5 * v);
    return 2.0 * s * s / (kPi * T * x * x);
  };
  u.cf = [T](double t) { return cplx(std::max(0.0, 1.0 - std::abs(t) / T), 0.0); };
  u.cf_deriv = [T](double t) {
    if (t == 0.0 || std::abs(t) >= T) return cplx(0.0, 0.0);
    return cplx(t > 0 ? -1.0 / T : 1.0 / T, 0.0);
  };
  // inverse transform of (1 - |t|/T)^2: (2T/pi) (u - sin u)/u^3, u = T y
  u.self_correlation = [T](double y) {
    const double v = T * std::abs(y);
    if (v < 1e-2) {
      const double v2 = v * v;
      return 2 * T / kPi * (1.0 / 6.0 - v2 / 120.0 + v2 * v2 / 5040.0 - v2 * v2 * v2 / 362880.0);
    }
    return 2 * T / kPi * (v - std::sin(v)) / (v * v * v);
  };
  u.sample = [T](std::mt19937_64& rng) {
    // rejection from a Cauchy law of scale 2/T; acceptance ratio sin^2(v)(1+v^2)/(2 v^2)
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (;;) {
      const double v = std::tan(kPi * (unif(rng) - 0.5));
      const double s = detail::sinc(v);
      const double accept = 0.5 * s * s * (1.0 + v * v);
      if (unif(rng) <= accept) return 2.0 * v / T;
    }
  };
  u.cf_support_radius = T;
  u.density_decay = {Decay::Kind::power, 2.0, 2.0 / (kPi * T), 0.0};
  u.cf_decay = {Decay::Kind::compact, T, 1.0, 0.0};
  u.flags = {.symmetric_about_0 = true,
             .bounded_variation_density = true,
             .cf_nonnegative = true,
             .continuous_density = true,
             .cf_integrable = true};
  return u;
}

/// Symmetric Bernoulli law on {-1, 1}. Purely atomic: no density.
inline Univariate bernoulli_component() {
  Univariate u;
  u.family = "bernoulli";
  u.cf = [](double t) { return cplx(std::cos(t), 0.0); };
  u.cf_deriv = [](double t) { return cplx(-std::sin(t), 0.0); };
  u.cf_second = [](double t) { return cplx(-std::cos(t), 0.0); };
  u.sample = [](std::mt19937_64& rng) { return std::bernoulli_distribution(0.5)(rng) ? 1.0 : -1.0; };
  u.abs_moment1 = 1.0;
  u.second_moment = 1.0;
  u.abs_moment3 = 1.0;
  u.density_decay = {Decay::Kind::compact, 1.0, 0.0, 0.0};
  u.cf_decay = {Decay::Kind::power, 0.0, 1.0, 0.0};
  u.flags = {.symmetric_about_0 = true,
             .bounded_variation_density = false,
             .cf_nonnegative = false,
             .continuous_density = false,
             .cf_integrable = false};
  u.symmetric_bernoulli = true;
  return u;
}

inline Distribution make_uniform(double halfwidth) { return Distribution({uniform_component(halfwidth)}); }
inline Distribution make_laplace(double scale) { return Distribution({laplace_component(scale)}); }
inline Distribution make_gaussian(double sigma) { return Distribution({gaussian_component(sigma)}); }
inline Distribution make_fejer(double support_radius) { return Distribution({fejer_component(support_radius)}); }

inline Distribution product(const std::vector<Distribution>& factors) {
  if (factors.empty()) throw InvalidParameter("product of an empty list of distributions");
  std::vector<Univariate> comps;
  for (const auto& f : factors) {
    if (f.dim() != 1) throw InvalidParameter("product components must be one-dimensional");
    comps.push_back(f.component(0));
  }
  return Distribution(std::move(comps));
}

/// Law of the summands X_1, X_2, ...: mean zero and isotropic.
class NoiseDistribution {
 public:
  explicit NoiseDistribution(Distribution law) : law_(std::move(law)) {
    for (const auto& c : law_.components()) {
      if (!c.second_moment || std::abs(*c.second_moment - 1.0) > 1e-10)
        throw InvalidParameter("noise must be isotropic: unit variance per coordinate required (" + c.family + ")");
      if (c.mean != 0.0) throw InvalidParameter("noise must have mean zero");
      if (!c.sample) throw InvalidParameter("noise law has no sampler");
    }
  }

  const Distribution& law() const { return law_; }
  int dim() const { return law_.dim(); }
  cplx cf(double t) const { return law_.cf(t); }
  cplx cf(std::span<const double> t) const { return law_.cf(t); }

  bool is_bernoulli() const {
    for (const auto& c : law_.components())
      if (!c.symmetric_bernoulli) return false;
    return true;
  }

  /// sup over unit directions of E|<X_1, theta>|^3 when known in closed form (d = 1).
  std::optional<double> beta3() const {
    if (law_.dim() != 1) return std::nullopt;
    return law_.component(0).abs_moment3;
  }

  std::string spec() const { return is_bernoulli() ? "bernoulli" : law_.spec(); }

 private:
  Distribution law_;
};

inline NoiseDistribution bernoulli_noise(int dim = 1) {
  if (dim < 1) throw InvalidParameter("noise dimension must be positive");
  return NoiseDistribution(Distribution(std::vector<Univariate>(static_cast<std::size_t>(dim), bernoulli_component())));
}

/// E|X_1|^3 for one-dimensional noise: the stored closed form for catalog
/// laws, adaptive quadrature of |x|^3 p(x) otherwise.
inline double beta3(const NoiseDistribution& noise) {
  if (noise.dim() != 1) throw Unsupported("beta3 is implemented for d = 1 only");
  if (auto closed = noise.beta3()) return *closed;
  const auto& c = noise.law().component(0);
  if (!c.density) throw Unsupported("third absolute moment unavailable");
  if (c.density_decay.kind == Decay::Kind::power && c.density_decay.rate <= 4.0)
    throw Unsupported("third absolute moment infinite");
  boost::math::quadrature::exp_sinh<double> integrator;
  auto right = [&c](double x) { return x * x * x * c.density(x); };
  auto left = [&c](double x) { return x * x * x * c.density(-x); };
  return integrator.integrate(right, 0.0, std::numeric_limits<double>::infinity()) +
         integrator.integrate(left, 0.0, std::numeric_limits<double>::infinity());
}

}  // namespace llt
