// sensornet: solve, sweep, verify, simulate and inspect sensor-selection scenarios.

#include "sensornet/error.hpp"
#include "sensornet/experiments.hpp"
#include "sensornet/objective.hpp"
#include "sensornet/report_json.hpp"
#include "sensornet/scenario.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace {

using namespace sensornet;

enum ExitCode { kOk = 0, kInfeasible = 2, kSolverFailure = 3, kConfigError = 4 };

struct Common {
  std::string scenario;
  std::string problem = "static-lops";
  std::string min_cost_scheme = "digital";
  double resource_cap = -1.0;
  int J = 1000;
  int max_regen = 20;
  std::string seed_text;
  long trials = 0;
  long steps = 10000;
  int restrict_type = -1;
  int restrict_bw = -1;
  double fw_tol = 1e-6;
  int fw_max_iter = 5000;
  int bisection_steps = 40;
  std::string output;
  bool timing = false;
};

void add_common(CLI::App* app, Common& c, bool needs_problem) {
  app->add_option("scenario", c.scenario, "Scenario JSON file")->required();
  if (needs_problem) {
    app->add_option("--problem", c.problem,
                    "static-lops | static-blops | dynamic-lops | dynamic-blops | min-cost-static | min-cost-dynamic");
    app->add_option("--scheme", c.min_cost_scheme, "Transmission scheme for the min-cost problems (analog|digital)");
    app->add_option("--resource-cap", c.resource_cap, "Channel cap N (LoPS) or bandwidth cap W in Hz (BLoPS)");
    app->add_option("-J,--realizations", c.J, "Rounding draws per round");
    app->add_option("--max-regen", c.max_regen, "Extra rounding rounds when no draw is feasible");
    app->add_option("--steps", c.steps, "Time steps per dynamic Monte Carlo trial");
    app->add_option("--restrict-type", c.restrict_type, "Only allow this sensor type (1..K)");
    app->add_option("--restrict-bw", c.restrict_bw, "Only allow this bandwidth column (0..B-1)");
    app->add_option("--fw-tol", c.fw_tol, "Frank-Wolfe gap tolerance relative to tr(Sigma_theta)");
    app->add_option("--fw-max-iter", c.fw_max_iter, "Frank-Wolfe iteration cap");
    app->add_option("--bisection-steps", c.bisection_steps, "Bisection steps for the min-cost static problem");
    app->add_flag("--timing", c.timing, "Record wall-clock milliseconds (breaks byte-for-byte reproducibility)");
  }
  app->add_option("--seed", c.seed_text, "Seed (falls back to $SENSORNET_SEED, then 1)");
  app->add_option("-o,--output", c.output, "Write the result here instead of stdout");
}

std::uint64_t resolve_seed(const std::string& text) {
  std::string s = text;
  if (s.empty()) {
    if (const char* env = std::getenv("SENSORNET_SEED")) s = env;
  }
  if (s.empty()) return 1;
  try {
    std::size_t used = 0;
    const unsigned long long v = std::stoull(s, &used, 0);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("seed", "'" + s + "' is not an unsigned integer");
  }
}

RunConfig make_config(const Common& c, std::vector<double> grid) {
  RunConfig cfg;
  cfg.scenario_path = c.scenario;
  const auto id = parse_problem_id(c.problem);
  if (!id) throw ConfigError("problem", "unknown problem '" + c.problem + "'");
  cfg.problem = *id;
  if (c.min_cost_scheme == "analog") {
    cfg.min_cost_scheme = Scheme::analog;
  } else if (c.min_cost_scheme == "digital") {
    cfg.min_cost_scheme = Scheme::digital;
  } else {
    throw ConfigError("scheme", "expected analog or digital");
  }
  if (c.resource_cap >= 0.0) cfg.resource_cap = c.resource_cap;
  cfg.grid = std::move(grid);
  cfg.rounding.realizations = c.J;
  cfg.rounding.max_regen = c.max_regen;
  cfg.rounding.seed = resolve_seed(c.seed_text);
  cfg.trials = c.trials;
  cfg.steps = c.steps;
  cfg.timing = c.timing;
  cfg.relax.fw_tol_rel = c.fw_tol;
  cfg.relax.fw_max_iter = c.fw_max_iter;
  cfg.relax.bisection_steps = c.bisection_steps;
  if (c.restrict_type >= 0) cfg.relax.restriction.type = c.restrict_type;
  if (c.restrict_bw >= 0) cfg.relax.restriction.bandwidth = c.restrict_bw;
  return cfg;
}

// "a,b,c" or "lo:hi:n" (n evenly spaced points, inclusive).
std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> out;
  try {
    if (text.find(':') != std::string::npos) {
      std::stringstream ss(text);
      std::string lo, hi, n;
      std::getline(ss, lo, ':');
      std::getline(ss, hi, ':');
      std::getline(ss, n, ':');
      const double a = std::stod(lo), b = std::stod(hi);
      const int count = std::stoi(n);
      if (count < 1) throw ConfigError("lambdas", "point count must be >= 1");
      for (int i = 0; i < count; ++i) out.push_back(count == 1 ? a : a + (b - a) * i / (count - 1));
    } else {
      std::stringstream ss(text);
      std::string item;
      while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    }
  } catch (const std::invalid_argument&) {
    throw ConfigError("lambdas", "cannot parse '" + text + "'");
  } catch (const std::out_of_range&) {
    throw ConfigError("lambdas", "value out of range in '" + text + "'");
  }
  return out;
}

void write_text(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error("write to '" + path + "' failed");
}

int run_solve(const Common& c, double value, bool simulate_only) {
  const Scenario s = load_scenario_file(c.scenario);
  RunConfig cfg = make_config(c, {value});
  cfg.validate();
  const LinkTable link = build_link_table(s, source_model(cfg.problem));
  const PointResult p = run_point(s, link, cfg, value);
  const OrderedJson doc = simulate_only && p.sim ? to_json(*p.sim) : to_json(p);
  write_text(c.output, doc.dump(2) + "\n");
  if (p.report.status == SolveStatus::infeasible) return kInfeasible;
  return kOk;
}

int run_sweep_cmd(const Common& c, const std::string& grid_text, const std::string& format_text, int jobs) {
  const auto format = parse_output_format(format_text);
  if (!format) throw ConfigError("format", "expected csv or json");
  const Scenario s = load_scenario_file(c.scenario);
  RunConfig cfg = make_config(c, parse_grid(grid_text));
  cfg.jobs = jobs;
  if (is_min_cost(cfg.problem)) throw ConfigError("problem", "sweep runs the error-minimizing problems only");
  const SweepResult result = run_sweep(s, cfg);
  if (c.output.empty()) {
    emit_results(std::cout, result.rows, *format);
  } else {
    emit_results(c.output, result.rows, *format);
  }
  if (result.failure) std::rethrow_exception(result.failure);
  for (const auto& r : result.rows) {
    if (r.status == "infeasible") return kInfeasible;
  }
  return kOk;
}

int run_verify(const Common& c) {
  const Scenario s = load_scenario_file(c.scenario);
  VerifyOptions o;
  o.seed = resolve_seed(c.seed_text);
  const VerificationReport r = verify_propositions(s, o);
  for (const auto& check : r.checks) {
    std::fprintf(stderr, "%-28s %s  max deviation %.3g (tol %.1g, %ld cases)%s%s\n", check.name.c_str(),
                 check.passed ? "PASS" : "FAIL", check.max_deviation, check.tolerance, check.cases,
                 check.detail.empty() ? "" : "  ", check.detail.c_str());
  }
  write_text(c.output, to_json(r).dump(2) + "\n");
  return kOk;
}

int run_dump_links(const Common& c, const std::string& model) {
  const Scenario s = load_scenario_file(c.scenario);
  SourceModel m;
  if (model == "static") {
    m = SourceModel::static_vector;
  } else if (model == "dynamic") {
    m = SourceModel::dynamic_scalar;
  } else {
    throw ConfigError("model", "expected static or dynamic");
  }
  std::ostringstream out;
  write_link_csv(out, build_link_table(s, m));
  write_text(c.output, out.str());
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sensor location, power and bandwidth selection"};
  app.require_subcommand(1);

  Common solve_opts, sweep_opts, verify_opts, sim_opts, dump_opts;
  double solve_value = 0.0, sim_value = 0.0;
  std::string grid_text, format_text = "csv", model = "static";
  int jobs = 1;

  auto* solve = app.add_subcommand("solve", "Relax, round and optionally simulate one budget point");
  add_common(solve, solve_opts, true);
  solve->add_option("--lambda,--xi", solve_value, "Cost cap lambda, or error target xi for min-cost problems")
      ->required();
  solve->add_option("--trials", solve_opts.trials, "Monte Carlo trials (0 = none)");

  auto* sweep = app.add_subcommand("sweep", "Run a cost-cap grid and emit one row per value");
  add_common(sweep, sweep_opts, true);
  sweep->add_option("--lambdas", grid_text, "Comma list or lo:hi:count")->required();
  sweep->add_option("--format", format_text, "csv or json");
  sweep->add_option("--jobs", jobs, "Grid points solved concurrently");
  sweep->add_option("--trials", sweep_opts.trials, "Monte Carlo trials per row (0 = none)");

  auto* verify = app.add_subcommand("verify", "Check the closed-form properties on a scenario");
  add_common(verify, verify_opts, false);

  auto* sim = app.add_subcommand("simulate", "Solve and round one point, then report the Monte Carlo estimate");
  add_common(sim, sim_opts, true);
  sim->add_option("--lambda,--xi", sim_value, "Cost cap or error target")->required();
  sim_opts.trials = 10000;
  sim->add_option("--trials", sim_opts.trials, "Monte Carlo trials");

  auto* dump = app.add_subcommand("dump-links", "Write the per-link table as CSV");
  add_common(dump, dump_opts, false);
  dump->add_option("--model", model, "static or dynamic");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfigError;
  }

  try {
    if (*solve) return run_solve(solve_opts, solve_value, false);
    if (*sweep) return run_sweep_cmd(sweep_opts, grid_text, format_text, jobs);
    if (*verify) return run_verify(verify_opts);
    if (*sim) {
      if (sim_opts.trials < 1) throw ConfigError("trials", "simulate needs at least one trial");
      return run_solve(sim_opts, sim_value, true);
    }
    if (*dump) return run_dump_links(dump_opts, model);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfigError;
  } catch (const DomainError& e) {
    std::cerr << "invalid input: " << e.what() << "\n";
    return kConfigError;
  } catch (const InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << "\n";
    return kInfeasible;
  } catch (const SolverError& e) {
    std::cerr << "solver failure: " << e.what() << "\n";
    return kSolverFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kSolverFailure;
  }
  return kOk;
}
