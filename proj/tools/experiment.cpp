#include "experiment.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "llt/asymptotics.hpp"
#include "llt/errors.hpp"
#include "llt/inversion.hpp"
#include "llt/lattice.hpp"
#include "llt/oracle.hpp"
#include "llt/smoothing.hpp"
#include "llt/spec.hpp"

#ifndef LLT_VERSION
#define LLT_VERSION "unknown"
#endif

namespace llt::lab {

using nlohmann::json;

namespace {

std::string join_n(const std::vector<long>& n) {
  std::string s;
  for (std::size_t i = 0; i < n.size(); ++i) s += (i ? "," : "") + std::to_string(n[i]);
  return s;
}

std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <class T>
T parse_value(const std::string& key, const std::string& v) {
  T out{};
  const auto [end, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || end != v.data() + v.size())
    throw InvalidParameter("invalid value for " + key + ": " + v);
  return out;
}

std::vector<long> parse_schedule(const std::string& v) {
  std::vector<long> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_value<long>("n", trim(item)));
  return out;
}

json grid_meta_json(const GridMeta& m) {
  json j;
  j["n_used"] = m.n_used ? json(*m.n_used) : json(nullptr);
  j["truncation_radius"] = m.truncation_radius;
  j["est_tail_error"] = m.est_tail_error;
  j["max_discarded_imag"] = m.max_discarded_imag;
  return j;
}

std::string csv_path(const ExperimentConfig& c, long n, bool several) {
  std::filesystem::path p(c.output);
  std::string stem = p.stem().string();
  if (several) stem += "_n" + std::to_string(n);
  return (p.parent_path() / (stem + ".csv")).string();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidParameter("cannot write " + path);
  f << text;
}

std::string fmt(double v) { return format_number(v); }

struct Context {
  const ExperimentConfig& config;
  Distribution source;
  std::vector<GridAxis> axes;
  RunResult& result;

  NoiseDistribution noise() const { return parse_noise_spec(config.noise, source.dim()); }
  SmoothedModel model() const { return SmoothedModel(source, noise()); }
};

json run_check_condition(Context& ctx) {
  const auto zeros = check_pi_lattice_zeros(ctx.source, ctx.config.window);
  json j;
  j["max_abs_cf_on_pi_lattice"] = zeros.max_abs;
  j["argmax_k"] = zeros.argmax_k;
  j["window"] = ctx.config.window;
  j["condition_holds"] = zeros.max_abs <= ctx.config.tol;
  try {
    const auto ac = wrapped_autocorrelation(ctx.source, ctx.config.tol);
    j["autocorrelation"] = {{"value", ac.value}, {"target", ac.target}, {"gap", ac.gap}, {"tail_estimate", ac.tail_estimate}};
  } catch (const Unsupported& e) {
    j["autocorrelation"] = {{"unsupported", e.what()}};
  }
  if (ctx.source.dim() == 1) {
    json samples = json::array();
    for (long k = 1; k <= std::min<long>(5, ctx.config.window); ++k) {
      const cplx f = ctx.source.cf(kPi * static_cast<double>(k));
      samples.push_back({{"k", k}, {"re", f.real()}, {"im", f.imag()}});
    }
    j["cf_at_pi_k"] = samples;
  }
  return j;
}

json run_poisson(Context& ctx) {
  const auto p = poisson_check(ctx.source, ctx.config.tol);
  return {{"density_sum", p.lhs}, {"cf_sum", p.rhs}, {"gap", p.gap}, {"density_sum_tail", p.lhs_tail},
          {"cf_sum_tail", p.rhs_tail}};
}

json run_autocorr(Context& ctx) {
  const auto ac = wrapped_autocorrelation(ctx.source, ctx.config.tol);
  return {{"value", ac.value}, {"target", ac.target}, {"gap", ac.gap}, {"tail_estimate", ac.tail_estimate}};
}

json run_density(Context& ctx) {
  const auto model = ctx.model();
  const auto& c = ctx.config;
  const bool several = c.n.size() > 1;
  json runs = json::array();
  for (long n : c.n) {
    const GridDensity g = density(model, n, ctx.axes, {.tol = std::max(c.tol * 0.1, 1e-15)});
    const auto phi = gaussian_on_grid(g);
    json r;
    r["n"] = n;
    r["meta"] = grid_meta_json(g.meta);
    r["integral"] = integrate_grid(g);
    r["distance"] = {{"l1", distance_to_gaussian(g, Norm::l1).value},
                     {"l2", distance_to_gaussian(g, Norm::l2).value},
                     {"sup", distance_to_gaussian(g, Norm::sup).value}};
    if (g.dim() == 1 && c.samples > 0) {
      std::vector<double> probes;
      for (int k = 0; k < 5; ++k) probes.push_back(g.axes[0].at(g.axes[0].count * (2 * k + 1) / 10));
      const auto mc = monte_carlo_density(model.source, model.noise, n, probes, c.samples, std::nullopt, c.seed);
      json m = json::array();
      for (std::size_t i = 0; i < probes.size(); ++i) {
        const long idx = g.axes[0].count * (2 * static_cast<long>(i) + 1) / 10;
        m.push_back({{"x", probes[i]}, {"p_n", g.at(idx)}, {"monte_carlo", mc.values[i]}, {"std_error", mc.std_errors[i]}});
      }
      r["monte_carlo"] = {{"bandwidth", mc.bandwidth}, {"samples", mc.samples}, {"seed", mc.seed}, {"probes", m}};
    }
    runs.push_back(r);
    if (!c.output.empty()) {
      std::ostringstream csv;
      if (g.dim() == 1) {
        csv << "x,p_n,phi\n";
        for (std::size_t i = 0; i < g.size(); ++i) csv << fmt(g.axes[0].at(static_cast<long>(i))) << ',' << fmt(g.values[i]) << ',' << fmt(phi[i]) << '\n';
      } else {
        csv << "x,y,p_n,phi\n";
        for (std::size_t i = 0; i < g.size(); ++i) {
          const auto x = g.point(i);
          csv << fmt(x[0]) << ',' << fmt(x[1]) << ',' << fmt(g.values[i]) << ',' << fmt(phi[i]) << '\n';
        }
      }
      const auto path = csv_path(c, n, several);
      write_text(path, csv.str());
      ctx.result.csv_paths.push_back(path);
    }
  }
  return {{"runs", runs}};
}

json run_converge(Context& ctx) {
  const auto& c = ctx.config;
  const auto rep = convergence_study(ctx.model(), c.n, parse_norm(c.norm), ctx.axes,
                                     {.tol = std::max(c.tol * 0.1, 1e-15)});
  json j;
  j["norm"] = c.norm;
  j["n"] = rep.n_schedule;
  j["distances"] = rep.chosen();
  j["l1"] = rep.l1;
  j["l2"] = rep.l2;
  j["sup"] = rep.sup;
  j["out_of_window"] = rep.out_of_window;
  j["est_tail_error"] = rep.tail_error;
  j["lattice_condition"] = rep.lattice_condition;
  j["fitted_log_slope"] = rep.fitted_log_slope;
  j["slope_even"] = rep.slope_even ? json(*rep.slope_even) : json(nullptr);
  j["slope_odd"] = rep.slope_odd ? json(*rep.slope_odd) : json(nullptr);
  return j;
}

json run_oscillate(Context& ctx) {
  const auto& c = ctx.config;
  if (ctx.axes.size() != 1) throw InvalidParameter("oscillate expects a one-dimensional source");
  const auto model = ctx.model();
  const bool several = c.n.size() > 1;
  std::vector<OscillationReport> reports;
  json runs = json::array();
  for (long n : c.n) {
    auto rep = oscillation_report(model, n, ctx.axes[0]);
    runs.push_back({{"n", n},
                    {"meta", grid_meta_json(rep.meta)},
                    {"residual_sup", rep.residual_sup},
                    {"gaussian_residual_sup", rep.gaussian_residual_sup},
                    {"period_defect", rep.period_defect},
                    {"method_gap", rep.method_gap}});
    if (!c.output.empty()) {
      std::ostringstream csv;
      csv << "x,p_n,phi,A_n,residual\n";
      for (long i = 0; i < rep.axis.count; ++i) {
        const double x = rep.axis.at(i);
        const double phi = gaussian_density(x * x, 1);
        const auto k = static_cast<std::size_t>(i);
        csv << fmt(x) << ',' << fmt(rep.p_values[k]) << ',' << fmt(phi) << ',' << fmt(rep.a_values[k]) << ','
            << fmt(rep.p_values[k] - rep.a_values[k] * phi) << '\n';
      }
      const auto path = csv_path(c, n, several);
      write_text(path, csv.str());
      ctx.result.csv_paths.push_back(path);
    }
    reports.push_back(std::move(rep));
  }
  std::vector<OscillationReport> fit;
  for (const auto& r : reports)
    if (r.n >= 64) fit.push_back(r);
  const double slope = residual_slope(fit);
  return {{"runs", runs}, {"residual_log_slope", std::isfinite(slope) ? json(slope) : json(nullptr)}};
}

json run_limits(Context& ctx) {
  const auto lim = even_odd_limits(ctx.source, ctx.config.tol);
  json j{{"even", lim.even_limit}, {"odd", lim.odd_limit}};
  if (ctx.config.noise == "bernoulli") {
    json finite = json::array();
    for (long n : ctx.config.n) {
      finite.push_back({{"n", n},
                        {"p_2n_at_0", exact_mixture_density(ctx.source, 2 * n, 0.0)},
                        {"p_2n_plus_1_at_0", exact_mixture_density(ctx.source, 2 * n + 1, 0.0)}});
    }
    j["finite_n"] = finite;
  }
  return j;
}

json run_regularity(Context& ctx) {
  json j;
  for (auto kind : {RegularityKind::cf_weighted, RegularityKind::cf_gradient_weighted}) {
    const auto r = regularity_integral(ctx.source, kind, ctx.config.window);
    j[kind == RegularityKind::cf_weighted ? "cf_weighted" : "cf_gradient_weighted"] = {
        {"estimate", r.estimate},
        {"diverging", r.diverging},
        {"decay_exponent", r.decay_exponent},
        {"shell_contributions", r.shell_contributions}};
  }
  j["window"] = ctx.config.window;
  return j;
}

json config_json(const ExperimentConfig& c) {
  return {{"experiment", c.experiment}, {"source", c.source},   {"noise", c.noise},   {"n", c.n},
          {"grid", {c.grid_min, c.grid_max, c.grid_points}},    {"norm", c.norm},     {"tol", c.tol},
          {"window", c.window},         {"samples", c.samples}, {"seed", c.seed}};
}

}  // namespace

std::string serialize(const ExperimentConfig& c) {
  std::ostringstream s;
  s << "experiment = " << c.experiment << '\n'
    << "source = " << c.source << '\n'
    << "noise = " << c.noise << '\n'
    << "n = " << join_n(c.n) << '\n'
    << "grid_min = " << fmt(c.grid_min) << '\n'
    << "grid_max = " << fmt(c.grid_max) << '\n'
    << "grid_points = " << c.grid_points << '\n'
    << "norm = " << c.norm << '\n'
    << "tol = " << fmt(c.tol) << '\n'
    << "window = " << c.window << '\n'
    << "samples = " << c.samples << '\n'
    << "seed = " << c.seed << '\n'
    << "output = " << c.output << '\n';
  return s.str();
}

ExperimentConfig parse_config(const std::string& text) {
  ExperimentConfig c;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InvalidParameter("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string v = trim(line.substr(eq + 1));
    if (key == "experiment") c.experiment = v;
    else if (key == "source") c.source = v;
    else if (key == "noise") c.noise = v;
    else if (key == "n") c.n = parse_schedule(v);
    else if (key == "grid_min") c.grid_min = parse_value<double>(key, v);
    else if (key == "grid_max") c.grid_max = parse_value<double>(key, v);
    else if (key == "grid_points") c.grid_points = parse_value<long>(key, v);
    else if (key == "norm") c.norm = v;
    else if (key == "tol") c.tol = parse_value<double>(key, v);
    else if (key == "window") c.window = parse_value<long>(key, v);
    else if (key == "samples") c.samples = parse_value<long>(key, v);
    else if (key == "seed") c.seed = parse_value<std::uint64_t>(key, v);
    else if (key == "output") c.output = v;
    else throw InvalidParameter("unknown config key: " + key);
  }
  return c;
}

void validate(const ExperimentConfig& c) {
  const auto& names = experiment_names();
  if (std::find(names.begin(), names.end(), c.experiment) == names.end())
    throw InvalidParameter("unknown experiment: " + c.experiment);
  if (!(c.grid_max > c.grid_min) || c.grid_points < 2) throw InvalidParameter("grid needs min < max and at least 2 points");
  if (c.n.empty()) throw InvalidParameter("empty n schedule");
  for (long n : c.n)
    if (n < 1) throw InvalidParameter("n must be positive");
  if (!(c.tol > 0)) throw InvalidParameter("tol must be positive");
  if (c.window < 1) throw InvalidParameter("window must be positive");
  if (c.samples < 0) throw InvalidParameter("samples must be non-negative");
  parse_norm(c.norm);
}

RunResult run(const ExperimentConfig& config) {
  RunResult result;
  try {
    validate(config);
    Context ctx{config, parse_spec(config.source), {}, result};
    ctx.axes.assign(static_cast<std::size_t>(ctx.source.dim()), make_axis(config.grid_min, config.grid_max, config.grid_points));
    json out;
    const auto& e = config.experiment;
    if (e == "check-condition") out = run_check_condition(ctx);
    else if (e == "poisson") out = run_poisson(ctx);
    else if (e == "autocorr") out = run_autocorr(ctx);
    else if (e == "density") out = run_density(ctx);
    else if (e == "converge") out = run_converge(ctx);
    else if (e == "oscillate") out = run_oscillate(ctx);
    else if (e == "limits") out = run_limits(ctx);
    else out = run_regularity(ctx);
    json doc{{"llt_lab_version", LLT_VERSION}, {"config", config_json(config)}, {"result", out}};
    result.json = doc.dump(2) + "\n";
    if (!config.output.empty()) write_text(config.output, result.json);
  } catch (const Unsupported& ex) {
    result = {};
    result.exit_code = 2;
    result.message = ex.what();
  } catch (const InconsistentCf& ex) {
    result = {};
    result.exit_code = 2;
    result.message = ex.what();
  } catch (const InvalidParameter& ex) {
    result = {};
    result.exit_code = 1;
    result.message = ex.what();
  }
  return result;
}

}  // namespace llt::lab
