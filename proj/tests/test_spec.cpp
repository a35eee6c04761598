#include "catch_amalgamated.hpp"

#include <cmath>

#include "llt/spec.hpp"

using namespace llt;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;

TEST_CASE("catalog specs parse to the matching distribution") {
  const auto lap = parse_spec("laplace:b=2");
  CHECK(lap.dim() == 1);
  CHECK(lap.spec() == make_laplace(2.0).spec());
  CHECK_THAT(lap.density(0.5), WithinAbs(make_laplace(2.0).density(0.5), 1e-15));
  CHECK(parse_spec("gaussian:sigma=0.5").spec() == make_gaussian(0.5).spec());
  CHECK(parse_spec("fejer:T=0.7").spec() == make_fejer(0.7).spec());
  CHECK(parse_spec("bernoulli").component(0).symmetric_bernoulli);
}

TEST_CASE("spec numbers accept square roots") {
  const auto u = parse_spec("uniform:h=sqrt(3)");
  CHECK(u.spec() == make_uniform(std::sqrt(3.0)).spec());
  CHECK_THROWS_AS(parse_spec("uniform:h=sqrt(-3)"), SpecError);
  CHECK_THROWS_AS(parse_spec("uniform:h=1x"), SpecError);
}

TEST_CASE("products") {
  const auto p = parse_spec("product:laplace:b=1,uniform:h=1");
  CHECK(p.dim() == 2);
  CHECK(p.spec() == "product:" + make_laplace(1.0).spec() + "," + make_uniform(1.0).spec());
  CHECK_THROWS_AS(parse_spec("product:laplace:b=1"), SpecError);
  CHECK_THROWS_AS(parse_spec("product:laplace:b=1,"), SpecError);
}

TEST_CASE("errors name the token and its position") {
  try {
    parse_spec("cauchy:s=1");
    FAIL("no exception");
  } catch (const SpecError& e) {
    CHECK_THAT(e.what(), ContainsSubstring("unknown distribution: cauchy"));
    CHECK(e.token == "cauchy");
    CHECK(e.position == 0);
  }
  try {
    parse_spec("product:uniform:h=1,cauchy");
    FAIL("no exception");
  } catch (const SpecError& e) {
    CHECK(e.position == 20);
    CHECK_THAT(e.what(), ContainsSubstring("(at position 20)"));
  }
  try {
    parse_spec("laplace:sigma=1");
    FAIL("no exception");
  } catch (const SpecError& e) {
    CHECK(e.token == "sigma");
    CHECK(e.position == 8);
  }
  CHECK_THROWS_WITH(parse_spec("gaussian"), ContainsSubstring("missing parameter sigma"));
  CHECK_THROWS_AS(parse_spec(""), SpecError);
  CHECK_THROWS_AS(parse_spec("bernoulli:p=1"), SpecError);
  // spec errors are parameter errors to callers that do not care
  CHECK_THROWS_AS(parse_spec("cauchy"), InvalidParameter);
}

TEST_CASE("noise specs") {
  CHECK(parse_noise_spec("bernoulli").is_bernoulli());
  CHECK(parse_noise_spec("bernoulli", 2).dim() == 2);
  CHECK(parse_noise_spec("bernoulli", 2).is_bernoulli());
  CHECK(parse_noise_spec("uniform:h=sqrt(3)").dim() == 1);
  CHECK_THROWS_AS(parse_noise_spec("uniform:h=sqrt(3)", 2), InvalidParameter);
  // noise must have unit variance
  CHECK_THROWS_AS(parse_noise_spec("uniform:h=1"), InvalidParameter);
}
