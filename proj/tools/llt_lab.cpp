// llt_lab: command-line experiments on smoothed local limit theorems.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "experiment.hpp"
#include "llt/errors.hpp"

namespace {

std::vector<long> parse_n_list(const std::string& text) {
  std::vector<long> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stol(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw llt::InvalidParameter("invalid n: " + item);
    }
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  using llt::lab::ExperimentConfig;
  CLI::App app{"Local limit theorem lab: smoothed densities, lattice sums, oscillation factors"};
  app.set_version_flag("--version", std::string(LLT_VERSION));
  app.require_subcommand(0, 1);

  std::string config_path;
  bool dump_config = false;
  app.add_option("--config", config_path, "key = value config file (flags given after a subcommand override it)");
  app.add_flag("--dump-config", dump_config, "print the resolved config instead of running");

  struct Flags {
    std::string source, noise, n, norm, output;
    std::vector<double> grid;
    double tol = 0;
    long window = 0, samples = -1;
    std::uint64_t seed = 0;
  } flags;

  for (const auto& name : llt::lab::experiment_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--source", flags.source, "source spec, e.g. laplace:b=1 or product:uniform:h=1,uniform:h=1");
    sub->add_option("--noise", flags.noise, "noise spec (default bernoulli), e.g. uniform:h=sqrt(3)");
    sub->add_option("--n", flags.n, "n or comma-separated increasing schedule");
    sub->add_option("--grid", flags.grid, "grid as MIN MAX POINTS")->expected(3);
    sub->add_option("--norm", flags.norm, "l1, l2 or sup");
    sub->add_option("--tol", flags.tol, "summation tolerance");
    sub->add_option("--window", flags.window, "lattice window K");
    sub->add_option("--samples", flags.samples, "Monte Carlo cross-check draws (density)");
    sub->add_option("--seed", flags.seed, "random seed");
    sub->add_option("--output,-o", flags.output, "JSON output path; CSV curves are written beside it");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  ExperimentConfig config;
  try {
    if (!config_path.empty()) {
      std::ifstream in(config_path);
      if (!in) throw llt::InvalidParameter("cannot read config " + config_path);
      std::stringstream text;
      text << in.rdbuf();
      config = llt::lab::parse_config(text.str());
    }
    const auto subs = app.get_subcommands();
    if (!subs.empty()) {
      const auto* sub = subs.front();
      config.experiment = sub->get_name();
      auto given = [sub](const char* opt) { return sub->count(opt) > 0; };
      if (given("--source")) config.source = flags.source;
      if (given("--noise")) config.noise = flags.noise;
      if (given("--n")) config.n = parse_n_list(flags.n);
      if (given("--grid")) {
        config.grid_min = flags.grid[0];
        config.grid_max = flags.grid[1];
        config.grid_points = static_cast<long>(flags.grid[2]);
      }
      if (given("--norm")) config.norm = flags.norm;
      if (given("--tol")) config.tol = flags.tol;
      if (given("--window")) config.window = flags.window;
      if (given("--samples")) config.samples = flags.samples;
      if (given("--seed")) config.seed = flags.seed;
      if (given("--output")) config.output = flags.output;
    } else if (config_path.empty()) {
      std::cerr << app.help();
      return 1;
    }
  } catch (const llt::InvalidParameter& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }

  if (dump_config) {
    std::cout << llt::lab::serialize(config);
    return 0;
  }

  const auto result = llt::lab::run(config);
  if (result.exit_code != 0) {
    std::cerr << (result.exit_code == 2 ? "unsupported: " : "error: ") << result.message << '\n';
    return result.exit_code;
  }
  if (config.output.empty()) std::cout << result.json;
  return 0;
}
