#include "catch_amalgamated.hpp"

#include <cmath>
#include <string>

#include "llt/lattice.hpp"

using namespace llt;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

TEST_CASE("twisted sums of a rational term") {
  // sum e^{i theta k}/(1 + k^2) = pi cosh(pi - theta)/sinh(pi) for theta in [0, 2 pi]
  auto term = [](long k) { return cplx(1.0 / (1.0 + static_cast<double>(k * k)), 0.0); };
  for (double theta : {0.0, 0.37, 1.0, kPi, 4.4, 2 * kPi - 1e-3}) {
    INFO("theta = " << theta);
    const auto s = twisted_lattice_sum(term, theta);
    CHECK_THAT(s.value.real(), WithinAbs(kPi * std::cosh(kPi - theta) / std::sinh(kPi), 1e-11));
    CHECK(std::abs(s.value.imag()) <= 1e-12);
    CHECK(s.tail_estimate < 1e-9);
  }
}

TEST_CASE("Richardson tail on an untwisted algebraic series") {
  // sum 1/(1 + pi^2 k^2) = coth(1)
  auto term = [](long k) { return cplx(1.0 / (1.0 + kPi * kPi * static_cast<double>(k * k)), 0.0); };
  const auto s = twisted_lattice_sum(term, 0.0);
  CHECK_THAT(s.value.real(), WithinAbs(1.3130352854993313, 1e-12));
  // the accelerated tail must beat plain truncation at the same cut by orders of magnitude
  double plain = 0;
  for (long k = -s.truncation_index; k <= s.truncation_index; ++k) plain += term(k).real();
  CHECK(std::abs(plain - 1.3130352854993313) > 100 * std::abs(s.value.real() - 1.3130352854993313));
}

TEST_CASE("alternating factor is folded into the phase") {
  auto term = [](long k) { return cplx((k % 2 ? -1.0 : 1.0) / (1.0 + kPi * kPi * static_cast<double>(k * k)), 0.0); };
  CHECK_THAT(twisted_lattice_sum(term, 0.0).value.real(), WithinAbs(0.85091812823932155, 1e-12));
}

TEST_CASE("terms without decay are unsupported") {
  auto term = [](long) { return cplx(1.0, 0.0); };
  CHECK_THROWS_AS(twisted_lattice_sum(term, 0.5), Unsupported);
}

TEST_CASE("density lattice sums") {
  // 2 sum p(2m + a) for laplace(1) at a = 0.37
  CHECK_THAT(2 * sum_density_lattice(make_laplace(1.0), 2.0, 0.37).value.real(), WithinAbs(1.0254424490491807, 1e-13));
  // uniform: only the overlapping cell contributes
  CHECK(sum_density_lattice(make_uniform(1.0), 2.0, 0.3).value.real() == 0.5);
  const double a[2] = {0.0, 1.0};
  CHECK_THAT(sum_density_lattice(product({make_uniform(1.0), make_uniform(1.0)}), 2.0, a).value.real(),
             WithinAbs(0.25, 1e-15));
}

TEST_CASE("cf lattice sums with a phase") {
  const double phase[1] = {-kPi * 0.37};
  CHECK_THAT(sum_cf_lattice(make_laplace(1.0), kPi, phase).value.real(), WithinAbs(1.0254424490491807, 1e-11));
}

TEST_CASE("pi-lattice zeros") {
  CHECK(check_pi_lattice_zeros(make_uniform(1.0), 20).max_abs <= 1e-12);
  CHECK(check_pi_lattice_zeros(product({make_uniform(1.0), make_uniform(1.0)}), 6).max_abs <= 1e-12);
  const auto lap = check_pi_lattice_zeros(make_laplace(1.0), 20);
  CHECK_THAT(lap.max_abs, WithinAbs(1.0 / (1.0 + kPi * kPi), 1e-12));
  REQUIRE(lap.argmax_k.size() == 1);
  CHECK(std::abs(lap.argmax_k[0]) == 1);
  CHECK(check_pi_lattice_zeros(make_fejer(0.7), 20).max_abs == 0.0);
  CHECK_THROWS_AS(check_pi_lattice_zeros(make_uniform(1.0), 0), InvalidParameter);
}

TEST_CASE("Poisson identity for gaussians") {
  const double expected[3] = {1.0143837720622287, 1.000000005350576, 1.0};
  const double sigma[3] = {0.5, 1.0, 2.0};
  for (int i = 0; i < 3; ++i) {
    const auto p = poisson_check(make_gaussian(sigma[i]));
    INFO("sigma = " << sigma[i]);
    CHECK(p.gap <= 1e-10);
    CHECK_THAT(p.lhs, WithinAbs(expected[i], 1e-13));
  }
}

TEST_CASE("Poisson identity for laplace") {
  const auto p = poisson_check(make_laplace(1.0));
  CHECK(p.gap <= 1e-8);
  CHECK_THAT(p.lhs, WithinAbs(1.0819767068693264, 1e-13));
}

TEST_CASE("Poisson check refuses laws outside its hypotheses") {
  CHECK_THROWS_WITH(poisson_check(make_uniform(1.0)), ContainsSubstring("density discontinuous"));
  CHECK_THROWS_WITH(poisson_check(make_fejer(0.7)), ContainsSubstring("first absolute moment infinite"));
  CHECK_THROWS_AS(poisson_check(Distribution({bernoulli_component()})), Unsupported);
}

TEST_CASE("wrapped autocorrelation") {
  CHECK_THAT(wrapped_autocorrelation(make_uniform(1.0)).value, WithinAbs(0.5, 1e-10));
  CHECK_THAT(wrapped_autocorrelation(make_laplace(1.0)).value, WithinAbs(0.50927423661641044, 1e-12));
  CHECK_THAT(wrapped_autocorrelation(make_gaussian(1.0)).value, WithinAbs(0.50005172318620382, 1e-12));
  CHECK_THAT(wrapped_autocorrelation(product({make_uniform(1.0), make_uniform(1.0)})).value, WithinAbs(0.25, 1e-10));
  CHECK(wrapped_autocorrelation(product({make_uniform(1.0), make_uniform(1.0)})).target == 0.25);
}

TEST_CASE("fejer overlaps sum to one half") {
  // |f|^2 vanishes on pi Z \ {0} when T < pi
  CHECK_THAT(wrapped_autocorrelation(make_fejer(0.7), 1e-12).value, WithinAbs(0.5, 1e-9));
}

TEST_CASE("self-correlation quadrature agrees with closed forms") {
  for (const auto& d : {make_laplace(1.0), make_gaussian(0.8), make_fejer(1.3)}) {
    const auto& c = d.component(0);
    for (double y : {0.0, 0.7, 2.0, 6.0}) {
      INFO(d.spec() << " y = " << y);
      CHECK_THAT(detail::self_correlation_quadrature(c, y), WithinAbs(c.self_correlation(y), 1e-10));
    }
  }
}

TEST_CASE("autocorrelation and pi-lattice zeros agree") {
  for (const auto& d : {make_uniform(1.0), make_uniform(0.5), make_laplace(1.0), make_gaussian(0.3), make_fejer(0.7)}) {
    INFO(d.spec());
    const bool zeros = check_pi_lattice_zeros(d, 20).max_abs <= 1e-12;
    const bool half = wrapped_autocorrelation(d, 1e-10).gap <= 1e-7;
    CHECK(zeros == half);
  }
}

TEST_CASE("distance to a scaled lattice") {
  const double t[2] = {kPi + 0.3, -2 * kPi - 0.4};
  CHECK_THAT(distance_to_lattice(t, kPi), WithinAbs(0.5, 1e-14));
  CHECK_THROWS_AS(distance_to_lattice(t, 0.0), InvalidParameter);
}

TEST_CASE("regularity integrals of laplace have closed forms") {
  const long K = 20;
  const double R = kPi * (K + 0.5);
  const double fR = 1.0 / (1.0 + R * R);
  const auto grad = regularity_integral(make_laplace(1.0), RegularityKind::cf_gradient_weighted, K);
  CHECK_THAT(grad.estimate, WithinAbs(2.0 * (1.0 - fR), 1e-10));
  CHECK_FALSE(grad.diverging);
  const auto weighted = regularity_integral(make_laplace(1.0), RegularityKind::cf_weighted, K);
  CHECK_THAT(weighted.estimate, WithinAbs(1.0 - fR * fR, 1e-10));
}

TEST_CASE("uniform gradient integral diverges but the weighted one does not") {
  CHECK(regularity_integral(make_uniform(1.0), RegularityKind::cf_gradient_weighted, 20).diverging);
  CHECK_FALSE(regularity_integral(make_uniform(1.0), RegularityKind::cf_weighted, 20).diverging);
}

TEST_CASE("two-dimensional regularity integral") {
  const auto d = product({make_gaussian(1.0), make_gaussian(1.0)});
  const auto r = regularity_integral(d, RegularityKind::cf_gradient_weighted, 6);
  // central cell: |grad f|/|t| = e^{-|t|^2/2}, which factors over the square
  const double side = std::sqrt(2 * kPi) * std::erf(kPi / (2 * std::sqrt(2.0)));
  CHECK_THAT(r.shell_contributions[0], WithinAbs(side * side, 1e-8));
  CHECK(r.estimate > r.shell_contributions[0]);
  CHECK_FALSE(r.diverging);
  CHECK_THROWS_AS(regularity_integral(d, RegularityKind::cf_gradient_weighted, 3), InvalidParameter);
}
