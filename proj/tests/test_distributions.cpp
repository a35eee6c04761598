#include "catch_amalgamated.hpp"

#include <cmath>
#include <random>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "llt/distributions.hpp"

using namespace llt;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

std::vector<Distribution> catalog() {
  return {make_uniform(1.0), make_uniform(std::sqrt(3.0)), make_laplace(1.0), make_laplace(0.4), make_gaussian(1.0),
          make_gaussian(2.5), make_fejer(0.7), make_fejer(3.0)};
}

double total_mass(const Univariate& c) {
  auto p = [&c](double x) { return c.density(x); };
  const double inf = std::numeric_limits<double>::infinity();
  // split at the origin and at the support edge so kinks do not slow the rule
  double r = 0;
  for (const auto& [a, b] : std::vector<std::pair<double, double>>{{-inf, -1}, {-1, 0}, {0, 1}, {1, inf}})
    r += boost::math::quadrature::gauss_kronrod<double, 61>::integrate(p, a, b, 20, 1e-12);
  return r;
}

}  // namespace

TEST_CASE("densities integrate to one") {
  for (const auto& d : {make_laplace(1.0), make_laplace(0.4), make_gaussian(1.0), make_gaussian(2.5)})
    CHECK_THAT(total_mass(d.component(0)), WithinAbs(1.0, 1e-10));
  // uniform on [-1, 1] and Fejer (slow x^-2 tail) separately
  CHECK_THAT(total_mass(make_uniform(1.0).component(0)), WithinAbs(1.0, 1e-9));
  CHECK_THAT(total_mass(make_fejer(0.7).component(0)), WithinAbs(1.0, 1e-6));
}

TEST_CASE("catalog closed forms") {
  CHECK_THAT(make_uniform(1.0).cf(2.0).real(), WithinAbs(std::sin(2.0) / 2.0, 1e-15));
  CHECK_THAT(make_uniform(1.0).cf(1e-9).real(), WithinAbs(1.0, 1e-15));
  CHECK_THAT(make_laplace(1.0).cf(kPi).real(), WithinAbs(1.0 / (1.0 + kPi * kPi), 1e-15));
  CHECK_THAT(make_gaussian(2.0).cf(0.5).real(), WithinAbs(std::exp(-0.5), 1e-15));
  CHECK_THAT(make_fejer(0.7).cf(0.35).real(), WithinAbs(0.5, 1e-15));
  CHECK(make_fejer(0.7).cf(0.7001).real() == 0.0);
  CHECK_THAT(make_fejer(0.7).density(0.8), WithinAbs(0.10852725050998941, 1e-15));
  CHECK_THAT(make_fejer(0.7).density(0.0), WithinAbs(0.7 / (2 * kPi), 1e-15));
}

TEST_CASE("uniform density takes the midpoint value at the jumps") {
  const auto u = make_uniform(1.0);
  CHECK(u.density(0.999) == 0.5);
  CHECK(u.density(1.0) == 0.25);
  CHECK(u.density(-1.0) == 0.25);
  CHECK(u.density(1.001) == 0.0);
}

TEST_CASE("symmetric laws have real even characteristic functions") {
  for (const auto& d : catalog()) {
    REQUIRE(d.flags().symmetric_about_0);
    for (double t : {0.1, 0.9, 2.3, 7.5}) {
      CHECK(std::abs(d.cf(t).imag()) <= 1e-15);
      CHECK_THAT(d.cf(t).real(), WithinAbs(d.cf(-t).real(), 1e-15));
      CHECK_THAT(d.density(t), WithinAbs(d.density(-t), 1e-15));
    }
  }
}

TEST_CASE("cf derivatives agree with central differences") {
  const double h = 1e-5;
  for (const auto& d : catalog()) {
    if (!d.has_cf_grad()) continue;
    INFO(d.spec());
    for (double t : {0.3, 1.1, 2.9}) {
      if (d.cf_support_radius() && t >= *d.cf_support_radius() - 2 * h) continue;
      const double fd = (d.cf(t + h).real() - d.cf(t - h).real()) / (2 * h);
      CHECK_THAT(d.cf_deriv(t).real(), WithinAbs(fd, 1e-8));
      if (d.has_cf_second()) {
        const double fd2 = (d.cf(t + h).real() - 2 * d.cf(t).real() + d.cf(t - h).real()) / (h * h);
        CHECK_THAT(d.cf_second(t).real(), WithinAbs(fd2, 1e-4));
      }
    }
  }
}

TEST_CASE("cf gradient of a product matches finite differences") {
  const auto d = product({make_laplace(1.0), make_gaussian(0.7)});
  const double t[2] = {0.8, -1.3};
  const auto g = d.cf_grad(t);
  const double h = 1e-6;
  for (int i = 0; i < 2; ++i) {
    double tp[2] = {t[0], t[1]}, tm[2] = {t[0], t[1]};
    tp[i] += h;
    tm[i] -= h;
    const double fd = (d.cf(tp).real() - d.cf(tm).real()) / (2 * h);
    CHECK_THAT(g[static_cast<std::size_t>(i)].real(), WithinAbs(fd, 1e-8));
  }
}

TEST_CASE("sample moments match the stored moments") {
  std::mt19937_64 rng(7);
  for (const auto& d : {make_uniform(1.0), make_laplace(1.0), make_gaussian(1.5)}) {
    const auto& c = d.component(0);
    double m1 = 0, m2 = 0;
    const int N = 200000;
    for (int i = 0; i < N; ++i) {
      const double x = c.sample(rng);
      m1 += std::abs(x);
      m2 += x * x;
    }
    CHECK_THAT(m1 / N, WithinRel(*c.abs_moment1, 0.02));
    CHECK_THAT(m2 / N, WithinRel(*c.second_moment, 0.02));
  }
}

TEST_CASE("fejer sampler reproduces the density") {
  std::mt19937_64 rng(11);
  const auto d = make_fejer(1.0);
  const int N = 200000;
  int inside = 0;
  for (int i = 0; i < N; ++i)
    if (std::abs(d.component(0).sample(rng)) < 2.0) ++inside;
  auto p = [&d](double x) { return d.density(x); };
  const double mass = boost::math::quadrature::gauss_kronrod<double, 61>::integrate(p, -2.0, 2.0, 15, 1e-12);
  CHECK_THAT(static_cast<double>(inside) / N, WithinAbs(mass, 0.005));
}

TEST_CASE("product spec and dimension") {
  const auto d = product({make_uniform(1.0), make_uniform(1.0)});
  CHECK(d.dim() == 2);
  CHECK(d.spec() == "product:uniform:h=1,uniform:h=1");
  const double x[2] = {0.2, -0.4};
  CHECK(d.density(x) == 0.25);
  CHECK_THROWS_AS(d.density(0.1), InvalidParameter);
}

TEST_CASE("noise must be isotropic and centred") {
  CHECK_NOTHROW(NoiseDistribution(make_uniform(std::sqrt(3.0))));
  CHECK_NOTHROW(NoiseDistribution(make_laplace(1.0 / std::sqrt(2.0))));
  CHECK_THROWS_AS(NoiseDistribution(make_uniform(1.0)), InvalidParameter);
  CHECK_THROWS_AS(NoiseDistribution(make_fejer(1.0)), InvalidParameter);
  CHECK(bernoulli_noise(1).is_bernoulli());
  CHECK(bernoulli_noise(2).spec() == "bernoulli");
}

TEST_CASE("third absolute moment of the noise") {
  CHECK_THAT(beta3(bernoulli_noise(1)), WithinAbs(1.0, 1e-15));
  CHECK_THAT(beta3(NoiseDistribution(make_uniform(std::sqrt(3.0)))), WithinAbs(1.299038105676658, 1e-14));
  CHECK_THAT(beta3(NoiseDistribution(make_gaussian(1.0))), WithinAbs(2.0 * std::sqrt(2.0 / kPi), 1e-14));
  CHECK_THROWS_AS(beta3(bernoulli_noise(2)), Unsupported);
}

TEST_CASE("invalid parameters are rejected") {
  CHECK_THROWS_AS(make_uniform(0.0), InvalidParameter);
  CHECK_THROWS_AS(make_laplace(-1.0), InvalidParameter);
  CHECK_THROWS_AS(make_gaussian(std::nan("")), InvalidParameter);
  CHECK_THROWS_AS(product({}), InvalidParameter);
}
