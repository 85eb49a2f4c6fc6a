#include "sensornet/experiments.hpp"

#include "sensornet/error.hpp"
#include "sensornet/objective.hpp"
#include "sensornet/random.hpp"
#include "sensornet/report_json.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>
#include <ostream>
#include <thread>

namespace sensornet {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kInf = std::numeric_limits<double>::infinity();

bool same(double a, double b) { return (std::isnan(a) && std::isnan(b)) || a == b; }

std::string csv_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_counts(const std::vector<int>& counts) {
  std::string s;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(counts[i]);
  }
  return s;
}

void fill_counts(const Selection& sel, ResultRow& row) {
  const SelectionShape& sh = sel.shape();
  row.counts_by_type.assign(sh.types, 0);
  row.counts_by_bw.assign(sh.bandwidths, 0);
  const auto cells = sel.assignment();
  if (!cells) return;
  for (int c : *cells) {
    const int k = sh.cell_type(c);
    ++row.counts_by_type[k];
    if (k > 0) ++row.counts_by_bw[sh.cell_bandwidth(c)];
  }
}

void check_restriction(const Restriction& r, const SelectionShape& shape) {
  if (r.type && (*r.type < 1 || *r.type >= shape.types)) {
    throw ConfigError("restrict_type", "must name a sensor type in 1.." + std::to_string(shape.types - 1));
  }
  if (r.bandwidth && (*r.bandwidth < 0 || *r.bandwidth >= shape.bandwidths)) {
    throw ConfigError("restrict_bw", "must name a bandwidth column in 0.." + std::to_string(shape.bandwidths - 1));
  }
}

SolveReport relax_point(const Scenario& s, const LinkTable& link, const RunConfig& cfg, ProblemId id, double value,
                        double cap) {
  switch (id) {
    case ProblemId::StaticLoPS: return solve_static_lops(s, link, value, cap, cfg.relax);
    case ProblemId::StaticBLoPS: return solve_static_blops(s, link, value, cap, cfg.relax);
    case ProblemId::DynamicLoPS: return solve_dynamic_lops(s, link, value, cap, cfg.relax);
    case ProblemId::DynamicBLoPS: return solve_dynamic_blops(s, link, value, cap, cfg.relax);
    case ProblemId::MinCostStatic: return solve_min_cost_static(s, link, value, cfg.min_cost_scheme, cfg.relax);
    case ProblemId::MinCostDynamic: return solve_min_cost_dynamic(s, link, value, cfg.min_cost_scheme, cfg.relax);
  }
  throw DomainError("unknown problem id");
}

}  // namespace

void RunConfig::validate() const {
  if (grid.empty()) throw ConfigError("lambda", "at least one grid value is required");
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (!std::isfinite(grid[i])) throw ConfigError("lambda", "grid values must be finite");
    if (i > 0 && !(grid[i] > grid[i - 1])) throw ConfigError("lambda", "grid must be strictly increasing");
  }
  if (trials < 0) throw ConfigError("trials", "must be >= 0");
  if (steps < 1) throw ConfigError("steps", "must be >= 1");
  if (jobs < 1) throw ConfigError("jobs", "must be >= 1");
  if (rounding.realizations < 1) throw ConfigError("J", "must be >= 1");
  if (rounding.max_regen < 0) throw ConfigError("max_regen", "must be >= 0");
  if (resource_cap && !(*resource_cap >= 0.0)) throw ConfigError("resource_cap", "must be nonnegative");
  if (!(relax.fw_tol_rel > 0.0)) throw ConfigError("fw_tol", "must be positive");
}

bool ResultRow::operator==(const ResultRow& o) const {
  return same(lambda, o.lambda) && status == o.status && same(relaxed, o.relaxed) && same(rounded, o.rounded) &&
         same(mc, o.mc) && same(mc_ci, o.mc_ci) && counts_by_type == o.counts_by_type &&
         counts_by_bw == o.counts_by_bw && same(ms, o.ms) && feasible == o.feasible && error == o.error;
}

PointResult run_point(const Scenario& s, const LinkTable& link, const RunConfig& cfg, double value) {
  const auto start = std::chrono::steady_clock::now();
  const ProblemId id = cfg.problem;
  const Scheme scheme = problem_scheme(id, cfg.min_cost_scheme);
  const ResourceMode mode = problem_mode(scheme);
  const double cap = cfg.resource_cap.value_or(default_resource_cap(s, mode));
  check_restriction(cfg.relax.restriction, problem_shape(link, scheme));

  PointResult p;
  p.row.lambda = value;
  p.report = relax_point(s, link, cfg, id, value, cap);
  const SelectionShape shape = p.report.relaxed_selection.shape();
  p.costs = cell_costs(s, shape, mode);
  p.budget = is_min_cost(id) ? SelectionBudget{kInf, p.report.resource_cap} : SelectionBudget{value, cap};

  auto finish = [&] {
    if (cfg.timing) {
      p.row.ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    }
  };
  p.row.mc = kNaN;
  p.row.mc_ci = kNaN;
  if (p.report.status == SolveStatus::infeasible) {
    p.row.status = "infeasible";
    p.row.relaxed = kNaN;
    p.row.rounded = kNaN;
    fill_counts(Selection(shape), p.row);
    finish();
    return p;
  }

  const double a = s.dynamic_prior.a, q = s.dynamic_prior.drive_var;
  std::optional<StaticObjective> trace;
  std::optional<GammaCoefficients> coeffs;
  if (is_dynamic(id)) {
    coeffs = gamma_coefficients(link, scheme);
  } else {
    trace.emplace(link, scheme);
  }
  // Error-side objective and its optimization sense.
  const SelectionObjective error_fn = [&](const Selection& sel) {
    return trace ? trace->value(sel) : coeffs->values.dot(sel.weights());
  };
  const Sense error_sense = trace ? Sense::minimize : Sense::maximize;
  auto to_error = [&](double v) { return trace ? v : kalman_mmse_from_gamma(std::max(0.0, v), a, q); };

  if (!is_min_cost(id)) {
    p.rounding = randomized_round(p.report.relaxed_selection, p.costs, p.budget, error_fn, error_sense, cfg.rounding);
    p.row.relaxed = trace ? p.report.relaxed_value : p.report.mmse;
    p.row.rounded = to_error(p.rounding->value);
  } else {
    // Targets: trace <= xi, or gamma >= the bound implied by xi.
    const double xi = value;
    const double gamma_min = trace ? 0.0 : gamma_bound_from_error(xi, a, q);
    const SelectionPredicate meets = [&](const Selection& sel) {
      const double v = error_fn(sel);
      return trace ? v <= xi * (1.0 + 1e-12) : v >= gamma_min * (1.0 - 1e-12);
    };
    const SelectionObjective cost_fn = [&](const Selection& sel) { return p.costs.total_cost(sel); };
    try {
      p.rounding = randomized_round(p.report.relaxed_selection, p.costs, p.budget, cost_fn, Sense::minimize,
                                    cfg.rounding, meets);
    } catch (const InfeasibleError&) {
      // Fall back to bisection on the cost cap: round the error-optimal relaxation at each cap and
      // keep the cheapest rounded selection that meets the target.
      double lambda_max = 0.0;
      for (int k = 1; k < shape.types; ++k) lambda_max = std::max(lambda_max, s.sensor_types[k].cost);
      lambda_max *= shape.locations;
      const ProblemId inner = trace ? (scheme == Scheme::analog ? ProblemId::StaticLoPS : ProblemId::StaticBLoPS)
                                    : (scheme == Scheme::analog ? ProblemId::DynamicLoPS : ProblemId::DynamicBLoPS);
      auto attempt = [&](double lambda) -> std::optional<RoundingOutcome> {
        const SolveReport rep = relax_point(s, link, cfg, inner, lambda, p.report.resource_cap);
        if (rep.status != SolveStatus::optimal) return std::nullopt;
        try {
          RoundingOutcome o = randomized_round(rep.relaxed_selection, p.costs, {lambda, p.report.resource_cap},
                                               error_fn, error_sense, cfg.rounding);
          if (!meets(o.selection)) return std::nullopt;
          o.value = p.costs.total_cost(o.selection);
          return o;
        } catch (const InfeasibleError&) {
          return std::nullopt;
        }
      };
      auto best = attempt(lambda_max);
      if (!best) throw;
      double lo = std::max(0.0, p.report.bound), hi = lambda_max;
      for (int step = 0; step < cfg.relax.bisection_steps && hi - lo > 1e-9 * std::max(1.0, hi); ++step) {
        const double mid = 0.5 * (lo + hi);
        if (auto o = attempt(mid)) {
          hi = mid;
          if (o->value < best->value) best = std::move(o);
        } else {
          lo = mid;
        }
      }
      p.rounding = std::move(best);
    }
    p.row.relaxed = p.report.relaxed_value;
    p.row.rounded = p.rounding->value;
  }

  const Selection& chosen = p.rounding->selection;
  p.verdict = feasibility_check(chosen, p.costs, p.budget);
  p.row.feasible = p.verdict.ok;
  fill_counts(chosen, p.row);

  if (cfg.trials > 0) {
    SimOptions so;
    so.trials = cfg.trials;
    so.seed = cfg.rounding.seed;
    so.steps = cfg.steps;
    if (is_dynamic(id)) {
      p.sim = simulate_dynamic(s, link, chosen, scheme, so);
    } else if (scheme == Scheme::analog) {
      p.sim = simulate_static_analog(s, link, chosen, so);
    } else {
      p.sim = simulate_static_digital(s, link, chosen, so);
    }
    p.sim->problem = is_dynamic(id) ? "dynamic" : "static";
    p.row.mc = p.sim->empirical_mse;
    p.row.mc_ci = p.sim->ci_halfwidth;
  }
  finish();
  return p;
}

SweepResult run_sweep(const Scenario& s, const RunConfig& cfg) {
  cfg.validate();
  const LinkTable link = build_link_table(s, source_model(cfg.problem));
  const std::size_t n = cfg.grid.size();
  std::vector<ResultRow> rows(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        rows[i] = run_point(s, link, cfg, cfg.grid[i]).row;
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const int threads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(cfg.jobs), n));
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  SweepResult out;
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) {
      ResultRow err;
      err.lambda = cfg.grid[i];
      err.status = "error";
      err.relaxed = err.rounded = err.mc = err.mc_ci = kNaN;
      try {
        std::rethrow_exception(errors[i]);
      } catch (const std::exception& e) {
        err.error = e.what();
      } catch (...) {
        err.error = "unknown failure";
      }
      out.rows.push_back(std::move(err));
      out.failure = errors[i];
      break;
    }
    out.rows.push_back(std::move(rows[i]));
  }
  return out;
}

std::optional<OutputFormat> parse_output_format(std::string_view text) {
  if (text == "csv") return OutputFormat::csv;
  if (text == "json") return OutputFormat::json;
  return std::nullopt;
}

void emit_results(std::ostream& out, const std::vector<ResultRow>& rows, OutputFormat format) {
  if (format == OutputFormat::json) {
    OrderedJson arr = OrderedJson::array();
    for (const auto& r : rows) arr.push_back(to_json(r));
    out << arr.dump(2) << "\n";
    return;
  }
  out << kCsvHeader << "\n";
  char ms[32];
  for (const auto& r : rows) {
    std::snprintf(ms, sizeof ms, "%.3f", r.ms);
    out << csv_number(r.lambda) << ',' << csv_number(r.relaxed) << ',' << csv_number(r.rounded) << ','
        << csv_number(r.mc) << ',' << csv_number(r.mc_ci) << ',' << join_counts(r.counts_by_type) << ','
        << join_counts(r.counts_by_bw) << ',' << ms << "\n";
  }
}

void emit_results(const std::string& path, const std::vector<ResultRow>& rows, OutputFormat format) {
  if (rows.empty()) throw Error("emit_results: no rows to write");
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("emit_results: cannot open '" + path + "' for writing");
  emit_results(out, rows, format);
  out.flush();
  if (!out) throw Error("emit_results: write to '" + path + "' failed");
}

std::vector<ResultRow> parse_results_json(std::string_view text) {
  OrderedJson doc;
  try {
    doc = OrderedJson::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("results", e.what());
  }
  if (!doc.is_array()) throw ConfigError("results", "expected a JSON array of rows");
  std::vector<ResultRow> rows;
  for (const auto& j : doc) rows.push_back(row_from_json(j));
  return rows;
}

// ---- proposition checks ----------------------------------------------------------

bool VerificationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

namespace {

double rel_dev(double value, double reference) {
  if (value == reference) return 0.0;
  return std::abs(value - reference) / std::max(std::abs(reference), std::numeric_limits<double>::min());
}

void record(CheckResult& c, double dev, const std::string& where) {
  ++c.cases;
  if (dev > c.max_deviation || std::isnan(dev)) {
    c.max_deviation = std::isnan(dev) ? kInf : dev;
    c.detail = where;
  }
}

void close(CheckResult& c) {
  c.passed = c.max_deviation <= c.tolerance;
  if (c.cases == 0) c.detail = "no applicable cases";
}

std::string tag(int l, int k) { return "l=" + std::to_string(l) + " k=" + std::to_string(k); }

CheckResult check_grid_invariance(const Scenario& s, double tol) {
  CheckResult c{"snr-grid-invariance", true, 0.0, tol, 0, ""};
  const int n = s.grid.channels();
  const double temp = s.noise.temperature_k;
  for (int nt = 1; nt <= n; ++nt) {
    if (n % nt) continue;
    ResourceGrid g = s.grid;
    g.time_channels = nt;
    g.freq_channels = n / nt;
    for (int l = 0; l < s.num_locations(); ++l) {
      for (int k = 1; k < s.num_types(); ++k) {
        const double p = node_power(s.harvested_power(l), s.sensor_types[k]);
        if (!(p > 0.0)) continue;
        for (const auto& bw : s.bandwidths) {
          const double direct = snr(p, s.channel_gains(l), temp, bw.hz);
          const double routed = snr_via_grid(p, s.channel_gains(l), temp, g, bw.channels);
          record(c, rel_dev(routed, direct),
                 tag(l, k) + " N_T=" + std::to_string(nt) + " N_b=" + std::to_string(bw.channels));
        }
      }
    }
  }
  close(c);
  return c;
}

CheckResult check_analog_copies(const Scenario& s, double tol) {
  CheckResult c{"analog-copy-invariance", true, 0.0, tol, 0, ""};
  constexpr int kCopies[] = {1, 2, 5, 10, 50};
  const double sigma_phi2 = receiver_noise(s.noise.temperature_k, s.grid.channel_hz());
  const LinkTable base = build_link_table(s, SourceModel::static_vector);
  for (int l = 0; l < s.num_locations(); ++l) {
    for (int k = 1; k < s.num_types(); ++k) {
      const double p = node_power(s.harvested_power(l), s.sensor_types[k]);
      if (!(p > 0.0)) continue;
      double reference = 0.0;
      for (int n : kCopies) {
        const double p_hat = per_channel_power(p, s.grid.interval_s, s.grid.slot_s(), n);
        const double v =
            analog_noise_var(base.sigma_x2(l), s.noise.measurement_var, s.channel_gains(l), p_hat, sigma_phi2 / n);
        if (n == 1) reference = v;
        record(c, rel_dev(v, reference), tag(l, k) + " N_b=" + std::to_string(n));
      }
    }
  }
  if (s.num_types() > 1) {
    // The analog objective of a fixed all-sensors selection must not move with the catalog N_b.
    double reference = 0.0;
    for (int n : kCopies) {
      Scenario copy = s;
      copy.bandwidths = {{s.grid.bandwidth_hz * n / s.grid.channels(), n}};
      finalize(copy);
      const LinkTable t = build_link_table(copy, SourceModel::static_vector);
      const SelectionShape shape = problem_shape(t, Scheme::analog);
      std::vector<int> cells(shape.locations, shape.cell(shape.types - 1, 0));
      const double v = static_error_trace(t, Selection::from_assignment(shape, cells), Scheme::analog);
      if (n == 1) reference = v;
      record(c, rel_dev(v, reference), "objective N_b=" + std::to_string(n));
    }
  }
  close(c);
  return c;
}

CheckResult check_gamma_ranking(const Scenario& s, const VerifyOptions& o) {
  CheckResult c{"gamma-mmse-ranking", true, 0.0, o.tolerance, 0, ""};
  if (s.num_sources() != 1 || s.num_types() < 2) {
    close(c);
    if (s.num_sources() != 1) c.detail = "vector source: not applicable";
    return c;
  }
  const double a = s.dynamic_prior.a, q = s.dynamic_prior.drive_var;
  const LinkTable link = build_link_table(s, SourceModel::dynamic_scalar);
  long misordered = 0;
  for (Scheme scheme : {Scheme::analog, Scheme::digital}) {
    const GammaCoefficients coeffs = gamma_coefficients(link, scheme);
    const SelectionShape& sh = coeffs.shape;
    std::vector<std::pair<double, double>> gm;  // (gamma, M)
    for (int i = 0; i < o.ranking_selections; ++i) {
      std::vector<int> cells(sh.locations);
      for (int l = 0; l < sh.locations; ++l) {
        cells[l] = static_cast<int>(counter_hash(o.seed, {static_cast<std::uint64_t>(scheme == Scheme::digital),
                                                          static_cast<std::uint64_t>(i),
                                                          static_cast<std::uint64_t>(l)}) %
                                    static_cast<std::uint64_t>(sh.cells_per_location()));
      }
      const double g = gamma(Selection::from_assignment(sh, cells), coeffs);
      const double m = kalman_mmse_from_gamma(g, a, q);
      const double residual = std::abs(a * a * g * m * m + (1.0 + q * g - a * a) * m - q) / q;
      record(c, residual, std::string(to_string(scheme)) + " residual, selection " + std::to_string(i));
      record(c, rel_dev(kalman_riccati_iterate(g, a, q), m),
             std::string(to_string(scheme)) + " riccati, selection " + std::to_string(i));
      gm.emplace_back(g, m);
    }
    for (std::size_t i = 0; i < gm.size(); ++i) {
      for (std::size_t j = 0; j < gm.size(); ++j) {
        if (gm[i].first > gm[j].first && !(gm[i].second < gm[j].second)) ++misordered;
      }
    }
  }
  close(c);
  if (misordered > 0) {
    c.passed = false;
    c.detail = std::to_string(misordered) + " selection pairs ranked differently by gamma and M";
  }
  return c;
}

CheckResult check_quantization_limit(const Scenario& s, double tol) {
  CheckResult c{"quantization-wideband-limit", true, 0.0, tol, 0, ""};
  const double temp = s.noise.temperature_k, w = s.grid.bandwidth_hz;
  const int n = s.grid.channels();
  const LinkTable base = build_link_table(s, SourceModel::static_vector);
  long saturated = 0;
  for (int l = 0; l < s.num_locations(); ++l) {
    for (int k = 1; k < s.num_types(); ++k) {
      const double p = node_power(s.harvested_power(l), s.sensor_types[k]);
      const double g = s.channel_gains(l);
      const double sx2 = base.sigma_x2(l);
      const auto limit = quantization_var_limit(sx2, p, g, n, temp, w);
      if (limit.saturated) {
        ++saturated;
        continue;
      }
      // log Q falls short of its limit E by about E^2 / (2 N_b); pick N_b so that gap is far below tol.
      const double e = p * g * n / (kBoltzmann * temp * w);
      const double nb = std::max(1.0, std::ceil(e * e / (1e-3 * tol)));
      const double wb = w * nb / n;
      const double v = quantization_var(sx2, snr(p, g, temp, wb), static_cast<long long>(nb));
      record(c, rel_dev(v, limit.value), tag(l, k) + " N_b=" + csv_number(nb));
    }
  }
  close(c);
  if (saturated > 0) c.detail += (c.detail.empty() ? "" : "; ") + std::to_string(saturated) + " saturated links";
  return c;
}

}  // namespace

VerificationReport verify_propositions(const Scenario& s, const VerifyOptions& o) {
  VerificationReport r;
  r.checks.push_back(check_grid_invariance(s, o.tolerance));
  r.checks.push_back(check_analog_copies(s, o.tolerance));
  r.checks.push_back(check_gamma_ranking(s, o));
  r.checks.push_back(check_quantization_limit(s, o.tolerance));
  return r;
}

}  // namespace sensornet
