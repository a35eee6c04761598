#pragma once

// Independent ground truth for the smoothed densities: the exact binomial
// mixture under Bernoulli noise, and a seeded Monte Carlo kernel estimate for
// any noise with a sampler.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "llt/distributions.hpp"
#include "llt/errors.hpp"
#include "llt/numerics.hpp"

namespace llt {

/// Binomial law of the number j of +1 signs among n, as log-weights
/// log C(n, j) - n log 2, normalised by log-sum-exp.
struct MixtureWeights {
  long n = 0;
  std::vector<double> log_weights;

  explicit MixtureWeights(long n_) : n(n_) {
    if (n < 0) throw InvalidParameter("n must be non-negative");
    log_weights.resize(static_cast<std::size_t>(n + 1));
    const double lgn = std::lgamma(static_cast<double>(n) + 1.0);
    double top = -std::numeric_limits<double>::infinity();
    for (long j = 0; j <= n; ++j) {
      const double lw = lgn - std::lgamma(static_cast<double>(j) + 1.0) - std::lgamma(static_cast<double>(n - j) + 1.0) -
                        static_cast<double>(n) * std::log(2.0);
      log_weights[static_cast<std::size_t>(j)] = lw;
      top = std::max(top, lw);
    }
    CompensatedSum<double> s;
    for (double lw : log_weights) s += std::exp(lw - top);
    const double log_norm = top + std::log(s.value());
    for (double& lw : log_weights) lw -= log_norm;
  }

  double weight(long j) const { return std::exp(log_weights[static_cast<std::size_t>(j)]); }
  double sum() const {
    CompensatedSum<double> s;
    for (long j = 0; j <= n; ++j) s += weight(j);
    return s.value();
  }
};

/// sqrt(n) sum_j C(n,j) 2^{-n} p(x sqrt(n) - (2j - n)).
inline double exact_mixture_density(const Distribution& source, const MixtureWeights& w, double x) {
  if (source.dim() != 1) throw InvalidParameter("exact_mixture_density expects a one-dimensional source");
  if (!source.has_density()) throw Unsupported("source has no pointwise density");
  const long n = w.n;
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  const double y = x * sqrt_n;
  CompensatedSum<double> acc;
  for (long j = 0; j <= n; ++j) {
    const double p = source.density(y - static_cast<double>(2 * j - n));
    if (p != 0.0) acc += w.weight(j) * p;
  }
  return sqrt_n * acc.value();
}

inline double exact_mixture_density(const Distribution& source, long n, double x) {
  if (n < 1) throw InvalidParameter("n must be positive");
  return exact_mixture_density(source, MixtureWeights(n), x);
}

/// n^{d/2} sum_{j1, j2} w_{j1} w_{j2} p(x sqrt(n) - s(j)), s(j) = (2 j1 - n, 2 j2 - n),
/// for a two-dimensional source and the Bernoulli cube noise.
inline double exact_mixture_density_2d(const Distribution& source, long n, std::span<const double> x) {
  if (source.dim() != 2 || x.size() != 2) throw InvalidParameter("exact_mixture_density_2d expects d = 2");
  if (n < 1) throw InvalidParameter("n must be positive");
  if (n > 256) throw Unsupported("exact 2-d mixture limited to n <= 256");
  if (!source.has_density()) throw Unsupported("source has no pointwise density");
  const MixtureWeights w(n);
  const double sqrt_n = std::sqrt(static_cast<double>(n));
  CompensatedSum<double> acc;
  for (long j1 = 0; j1 <= n; ++j1) {
    for (long j2 = 0; j2 <= n; ++j2) {
      const double p[2] = {x[0] * sqrt_n - static_cast<double>(2 * j1 - n), x[1] * sqrt_n - static_cast<double>(2 * j2 - n)};
      const double v = source.density(p);
      if (v != 0.0) acc += w.weight(j1) * w.weight(j2) * v;
    }
  }
  return static_cast<double>(n) * acc.value();
}

struct MonteCarloEstimate {
  std::vector<double> values;
  std::vector<double> std_errors;
  double bandwidth = 0.0;
  long samples = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline constexpr long kMonteCarloBlock = 4096;

/// Draws of Z_n = (X + X_1 + ... + X_n)/sqrt(n) for one block. Each block owns
/// an engine seeded from (seed, block index), so results do not depend on
/// how blocks are scheduled.
inline void draw_block(const Distribution& source, const NoiseDistribution& noise, long n, std::uint64_t seed,
                       long block, std::span<double> out) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(static_cast<std::uint64_t>(block) >> 32)};
  std::mt19937_64 rng(seq);
  const auto& src = source.component(0);
  const auto& nz = noise.law().component(0);
  const double inv_sqrt_n = 1.0 / std::sqrt(static_cast<double>(n));
  std::binomial_distribution<long> signs(n, 0.5);
  for (double& z : out) {
    double s = src.sample(rng);
    if (noise.is_bernoulli()) {
      s += static_cast<double>(2 * signs(rng) - n);
    } else {
      for (long k = 0; k < n; ++k) s += nz.sample(rng);
    }
    z = s * inv_sqrt_n;
  }
}

}  // namespace detail

/// Gaussian-kernel density estimate of Z_n at `x_points` from `samples`
/// draws; the bandwidth defaults to Silverman's rule on the sample.
/// Standard errors are sample standard deviations of the kernel values over
/// sqrt(samples). Deterministic given the seed.
inline MonteCarloEstimate monte_carlo_density(const Distribution& source, const NoiseDistribution& noise, long n,
                                              std::span<const double> x_points, long samples,
                                              std::optional<double> bandwidth, std::uint64_t seed) {
  if (samples <= 0) throw InvalidParameter("samples must be positive");
  if (n < 1) throw InvalidParameter("n must be positive");
  if (source.dim() != 1 || noise.dim() != 1) throw InvalidParameter("monte_carlo_density supports d = 1");
  if (!source.component(0).sample) throw Unsupported("source has no sampler");
  if (bandwidth && !(*bandwidth > 0)) throw InvalidParameter("bandwidth must be positive");

  const long blocks = (samples + detail::kMonteCarloBlock - 1) / detail::kMonteCarloBlock;
  std::vector<double> z(static_cast<std::size_t>(samples));
  parallel_for(static_cast<std::size_t>(blocks), [&](std::size_t b) {
    const long begin = static_cast<long>(b) * detail::kMonteCarloBlock;
    const long end = std::min(samples, begin + detail::kMonteCarloBlock);
    detail::draw_block(source, noise, n, seed, static_cast<long>(b),
                       std::span<double>(z).subspan(static_cast<std::size_t>(begin), static_cast<std::size_t>(end - begin)));
  });

  MonteCarloEstimate out;
  out.samples = samples;
  out.seed = seed;
  if (bandwidth) {
    out.bandwidth = *bandwidth;
  } else {
    CompensatedSum<double> s, s2;
    for (double v : z) {
      s += v;
      s2 += v * v;
    }
    const double mean = s.value() / samples;
    const double sd = std::sqrt(std::max(0.0, s2.value() / samples - mean * mean));
    std::vector<double> sorted = z;
    const auto q = [&sorted](double p) {
      const auto k = static_cast<std::size_t>(p * static_cast<double>(sorted.size() - 1));
      std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(k), sorted.end());
      return sorted[k];
    };
    const double iqr = q(0.75) - q(0.25);
    double spread = std::min(sd, iqr / 1.34);
    if (!(spread > 0)) spread = sd > 0 ? sd : 1.0;
    out.bandwidth = 0.9 * spread * std::pow(static_cast<double>(samples), -0.2);
  }

  out.values.resize(x_points.size());
  out.std_errors.resize(x_points.size());
  const double h = out.bandwidth;
  parallel_for(x_points.size(), [&](std::size_t i) {
    CompensatedSum<double> s, s2;
    for (double v : z) {
      const double u = (x_points[i] - v) / h;
      const double k = kInvSqrt2Pi * std::exp(-0.5 * u * u) / h;
      s += k;
      s2 += k * k;
    }
    const double mean = s.value() / samples;
    const double var = std::max(0.0, s2.value() / samples - mean * mean);
    out.values[i] = mean;
    out.std_errors[i] = std::sqrt(var / static_cast<double>(samples));
  });
  return out;
}

}  // namespace llt
