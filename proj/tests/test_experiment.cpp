#include "catch_amalgamated.hpp"

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "experiment.hpp"
#include "llt/errors.hpp"

using namespace llt::lab;
using Catch::Matchers::ContainsSubstring;
using Catch::Matchers::WithinAbs;
using nlohmann::json;

namespace {

ExperimentConfig small(const std::string& experiment, const std::string& source) {
  ExperimentConfig c;
  c.experiment = experiment;
  c.source = source;
  c.grid_min = -3;
  c.grid_max = 3;
  c.grid_points = 61;
  return c;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("config files round-trip") {
  ExperimentConfig c;
  c.experiment = "converge";
  c.source = "product:laplace:b=1,uniform:h=sqrt(3)";
  c.noise = "gaussian:sigma=1";
  c.n = {4, 16, 64, 256};
  c.grid_min = -3.3;
  c.grid_max = 0.1;
  c.grid_points = 77;
  c.norm = "l2";
  c.tol = 1.5e-10;
  c.window = 7;
  c.samples = 1000;
  c.seed = 18446744073709551615ULL;
  c.output = "/tmp/out.json";
  CHECK(parse_config(serialize(c)) == c);
  CHECK(parse_config(serialize(ExperimentConfig{})) == ExperimentConfig{});
  CHECK(parse_config("# comment\n\nn = 3\n").n == std::vector<long>{3});
  CHECK_THROWS_AS(parse_config("colour = red\n"), llt::InvalidParameter);
  CHECK_THROWS_AS(parse_config("grid_points = many\n"), llt::InvalidParameter);
  CHECK_THROWS_AS(parse_config("just words\n"), llt::InvalidParameter);
}

TEST_CASE("validation") {
  auto c = small("density", "laplace:b=1");
  CHECK_NOTHROW(validate(c));
  c.experiment = "nonsense";
  CHECK_THROWS_AS(validate(c), llt::InvalidParameter);
  c = small("density", "laplace:b=1");
  c.n = {};
  CHECK_THROWS_AS(validate(c), llt::InvalidParameter);
  c = small("density", "laplace:b=1");
  c.grid_max = c.grid_min;
  CHECK_THROWS_AS(validate(c), llt::InvalidParameter);
}

TEST_CASE("exit codes") {
  const auto bad_hypothesis = run(small("poisson", "uniform:h=1"));
  CHECK(bad_hypothesis.exit_code == 2);
  CHECK_THAT(bad_hypothesis.message, ContainsSubstring("density discontinuous"));
  CHECK(bad_hypothesis.json.empty());
  const auto bad_spec = run(small("density", "cauchy:s=1"));
  CHECK(bad_spec.exit_code == 1);
  CHECK_THAT(bad_spec.message, ContainsSubstring("unknown distribution: cauchy"));
  auto bad_noise = small("density", "laplace:b=1");
  bad_noise.noise = "uniform:h=1";
  CHECK(run(bad_noise).exit_code == 1);
}

TEST_CASE("limits experiment") {
  const auto r = run(small("limits", "laplace:b=1"));
  REQUIRE(r.exit_code == 0);
  const auto j = json::parse(r.json);
  CHECK(j.contains("llt_lab_version"));
  CHECK(j["config"]["source"] == "laplace:b=1");
  // (e^2 + 1)/(e^2 - 1)/sqrt(2 pi) and 2e/(e^2 - 1)/sqrt(2 pi)
  CHECK_THAT(j["result"]["even"].get<double>(), WithinAbs(0.5238253, 1e-5));
  CHECK_THAT(j["result"]["odd"].get<double>(), WithinAbs(0.3394672, 1e-5));
  REQUIRE(j["result"]["finite_n"].size() == 1);
}

TEST_CASE("converge experiment reports decreasing distances") {
  auto c = small("converge", "uniform:h=1");
  c.n = {4, 16, 64, 256};
  c.norm = "l1";
  const auto r = run(c);
  REQUIRE(r.exit_code == 0);
  const auto d = json::parse(r.json)["result"]["distances"].get<std::vector<double>>();
  REQUIRE(d.size() == 4);
  for (std::size_t i = 1; i < d.size(); ++i) CHECK(d[i] < d[i - 1]);
}

TEST_CASE("output files and determinism") {
  const auto dir = std::filesystem::temp_directory_path() / "llt_lab_test";
  std::filesystem::create_directories(dir);
  auto c = small("density", "laplace:b=1");
  c.n = {4, 9};
  c.samples = 20000;
  c.output = (dir / "dens.json").string();
  const auto a = run(c);
  REQUIRE(a.exit_code == 0);
  REQUIRE(a.csv_paths.size() == 2);
  CHECK(std::filesystem::path(a.csv_paths[0]).filename() == "dens_n4.csv");
  const std::string csv = slurp(a.csv_paths[1]);
  CHECK(csv.starts_with("x,p_n,phi\n"));
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 62);
  const std::string first = slurp(c.output);
  CHECK(first == a.json);
  const auto b = run(c);
  CHECK(slurp(c.output) == first);
  CHECK(b.json == a.json);
  std::filesystem::remove_all(dir);
}
