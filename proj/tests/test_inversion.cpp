#include "catch_amalgamated.hpp"

#include <cmath>

#include "llt/inversion.hpp"
#include "llt/oracle.hpp"

using namespace llt;
using Catch::Matchers::WithinAbs;

namespace {

double max_gap(const GridDensity& g, const std::function<double(double)>& truth) {
  double m = 0;
  for (long i = 0; i < g.axes[0].count; ++i) m = std::max(m, std::abs(g.at(i) - truth(g.axes[0].at(i))));
  return m;
}

}  // namespace

TEST_CASE("grid axes") {
  const auto a = make_axis(-5, 5, 1001);
  CHECK(a.count == 1001);
  CHECK_THAT(a.step, WithinAbs(0.01, 1e-15));
  CHECK_THAT(a.back(), WithinAbs(5.0, 1e-12));
  CHECK(a.max_abs() == 5.0);
  CHECK_THROWS_AS(make_axis(1, 1, 10), InvalidParameter);
}

TEST_CASE("trapezoid inversion recovers the normal density") {
  auto cf = [](double t) { return cplx(std::exp(-0.5 * t * t), 0.0); };
  const auto g = invert(cf, make_axis(-5, 5, 201), 40.0, 0.1);
  CHECK(max_gap(g, [](double x) { return gaussian_density(x * x); }) <= 1e-13);
  CHECK(g.meta.est_tail_error <= 1e-100);
  CHECK_THAT(integrate_grid(g), WithinAbs(1.0, 1e-6));
}

TEST_CASE("trapezoid inversion of an algebraically decaying cf stays within its tail estimate") {
  auto cf = [](double t) { return cplx(1.0 / (1.0 + t * t), 0.0); };
  const auto g = invert(cf, make_axis(-4, 4, 81), 400.0, 0.1);
  const double err = max_gap(g, [](double x) { return 0.5 * std::exp(-std::abs(x)); });
  INFO("error " << err << " estimate " << g.meta.est_tail_error);
  CHECK(std::isfinite(g.meta.est_tail_error));
  CHECK(err <= g.meta.est_tail_error);
  CHECK(err <= 1e-3);
}

TEST_CASE("two-dimensional separable inversion") {
  auto cf = [](std::span<const double> t) { return cplx(std::exp(-0.5 * (t[0] * t[0] + t[1] * t[1])), 0.0); };
  const auto ax = make_axis(-3, 3, 31);
  const auto g = invert(cf, 2, {ax, ax}, 40.0, 0.2);
  double m = 0;
  for (long i = 0; i < 31; ++i)
    for (long j = 0; j < 31; ++j) {
      const double x = ax.at(i), y = ax.at(j);
      m = std::max(m, std::abs(g.at(i, j) - gaussian_density(x * x + y * y, 2)));
    }
  CHECK(m <= 1e-13);
}

TEST_CASE("inversion preconditions") {
  auto cf = [](double t) { return cplx(std::exp(-0.5 * t * t), 0.0); };
  CHECK_THROWS_AS(invert(cf, make_axis(-5, 5, 11), 40.0, 0.5), InvalidParameter);
  CHECK_THROWS_AS(invert(cf, make_axis(-5, 5, 11), -1.0, 0.01), InvalidParameter);
  auto skewed = [](double t) { return cplx(std::exp(-0.5 * t * t), 0.5 * std::exp(-0.5 * t * t)); };
  CHECK_THROWS_AS(invert(skewed, make_axis(-5, 5, 11), 40.0, 0.1), InconsistentCf);
}

TEST_CASE("tail estimate flags characteristic functions that do not decay") {
  auto cosine = [](std::span<const double> t) { return cplx(std::cos(t[0]), 0.0); };
  CHECK(std::isinf(estimate_tail(cosine, 1, 10.0)));
  auto sinc = [](std::span<const double> t) { return cplx(std::sin(t[0]) / t[0], 0.0); };
  CHECK(std::isinf(estimate_tail(sinc, 1, 10.0)));
  auto lorentz = [](std::span<const double> t) { return cplx(1.0 / (1.0 + t[0] * t[0]), 0.0); };
  const double est = estimate_tail(lorentz, 1, 100.0);
  // exact tail (1/pi) int_100^inf dt/(1+t^2) ~ 1/(100 pi); the estimate must cover it
  CHECK(est >= 1.0 / (100 * kPi) * 0.999);
  CHECK(est <= 10.0 / (100 * kPi));
}

TEST_CASE("Bernoulli-smoothed inversion matches the exact mixture") {
  const auto axis = make_axis(-5, 5, 21);
  for (const auto& src : {make_uniform(1.0), make_laplace(1.0), make_gaussian(1.0)}) {
    for (long n : {1L, 2L, 7L, 20L}) {
      const auto g = invert_bernoulli_smoothed(src.component(0).cf, n, axis);
      const MixtureWeights w(n);
      const double gap = max_gap(g, [&](double x) { return exact_mixture_density(src, w, x); });
      INFO(src.spec() << " n = " << n);
      CHECK(gap <= 1e-9);
      CHECK(g.meta.n_used == n);
    }
  }
}

TEST_CASE("Bernoulli-smoothed inversion rejects a non-decaying source") {
  auto cosine = [](double t) { return cplx(std::cos(t), 0.0); };
  CHECK_THROWS_AS(invert_bernoulli_smoothed(cosine, 4, make_axis(-1, 1, 3)), Unsupported);
}

TEST_CASE("compact inversion is exact for a triangular cf") {
  // (1 - |t|)_+ inverts to the Fejer kernel (1 - cos x)/(pi x^2)
  auto tri = [](double t) { return cplx(std::max(0.0, 1.0 - std::abs(t)), 0.0); };
  const auto g = invert_compact(tri, make_axis(-20, 20, 81), 1.0);
  CHECK(max_gap(g, [](double x) { return x == 0 ? 1 / (2 * kPi) : (1 - std::cos(x)) / (kPi * x * x); }) <= 1e-14);
  CHECK(g.meta.est_tail_error == 0.0);
}
