#include "sensornet/report_json.hpp"

#include "sensornet/error.hpp"

#include <cmath>
#include <limits>

namespace sensornet {

namespace {

// JSON has no NaN or infinity; both become null.
OrderedJson num(double v) { return std::isfinite(v) ? OrderedJson(v) : OrderedJson(nullptr); }

double num_or_nan(const OrderedJson& j) {
  return j.is_null() ? std::numeric_limits<double>::quiet_NaN() : j.get<double>();
}

}  // namespace

OrderedJson to_json(const Selection& sel) {
  const SelectionShape& sh = sel.shape();
  OrderedJson j;
  j["shape"] = {{"locations", sh.locations}, {"types", sh.types}, {"bandwidths", sh.bandwidths}};
  const int per = sh.cells_per_location();
  if (const auto cells = sel.assignment()) {
    OrderedJson arr = OrderedJson::array();
    for (int c : *cells) arr.push_back({sh.cell_type(c), sh.cell_bandwidth(c)});
    j["cells"] = std::move(arr);
  } else {
    OrderedJson arr = OrderedJson::array();
    for (int l = 0; l < sh.locations; ++l) {
      OrderedJson row = OrderedJson::array();
      for (int c = 0; c < per; ++c) row.push_back(sel.weights()(l * per + c));
      arr.push_back(std::move(row));
    }
    j["weights"] = std::move(arr);
  }
  return j;
}

OrderedJson to_json(const SolveReport& r) {
  OrderedJson j;
  j["problem_id"] = to_string(r.problem);
  j["status"] = to_string(r.status);
  j["scheme"] = to_string(r.scheme);
  j["resource_mode"] = to_string(r.mode);
  j["cost_cap"] = num(r.cost_cap);
  j["resource_cap"] = num(r.resource_cap);
  j["relaxed_value"] = num(r.relaxed_value);
  j["bound"] = num(r.bound);
  j["fw_gap"] = num(r.fw_gap);
  j["iterations"] = r.iterations;
  if (is_min_cost(r.problem)) {
    j["target"] = num(r.target);
    j["error_value"] = num(r.error_value);
  }
  if (is_dynamic(r.problem)) {
    j["gamma"] = num(r.gamma);
    j["mmse"] = num(r.mmse);
  }
  j["relaxed_selection"] = to_json(r.relaxed_selection);
  return j;
}

OrderedJson to_json(const RoundingOutcome& o) {
  OrderedJson j;
  j["objective_value"] = num(o.value);
  j["realizations_drawn"] = o.realizations;
  j["feasible_count"] = o.feasible_count;
  j["regeneration_rounds"] = o.regeneration_rounds;
  j["boolean_selection"] = to_json(o.selection);
  return j;
}

OrderedJson to_json(const SimReport& r) {
  OrderedJson j;
  j["problem"] = r.problem;
  j["scheme"] = to_string(r.scheme);
  j["trials"] = r.trials;
  if (r.problem == "dynamic") j["steps"] = r.steps;
  j["empirical_mse"] = num(r.empirical_mse);
  j["ci_halfwidth"] = num(r.ci_halfwidth);
  j["predicted"] = num(r.predicted);
  if (r.problem == "dynamic") j["filter_variance"] = num(r.filter_variance);
  return j;
}

OrderedJson to_json(const FeasibilityVerdict& v) {
  OrderedJson j;
  j["ok"] = v.ok;
  j["violations"] = v.violations;
  return j;
}

OrderedJson to_json(const VerificationReport& r) {
  OrderedJson checks = OrderedJson::array();
  for (const auto& c : r.checks) {
    OrderedJson j;
    j["name"] = c.name;
    j["passed"] = c.passed;
    j["max_deviation"] = num(c.max_deviation);
    j["tolerance"] = c.tolerance;
    j["cases"] = c.cases;
    j["detail"] = c.detail;
    checks.push_back(std::move(j));
  }
  OrderedJson j;
  j["all_passed"] = r.all_passed();
  j["checks"] = std::move(checks);
  return j;
}

OrderedJson to_json(const ResultRow& r) {
  OrderedJson j;
  j["lambda"] = num(r.lambda);
  j["status"] = r.status;
  j["relaxed"] = num(r.relaxed);
  j["rounded"] = num(r.rounded);
  j["mc"] = num(r.mc);
  j["mc_ci"] = num(r.mc_ci);
  j["counts_by_type"] = r.counts_by_type;
  j["counts_by_bw"] = r.counts_by_bw;
  j["ms"] = r.ms;
  j["feasible"] = r.feasible;
  j["error"] = r.error;
  return j;
}

OrderedJson to_json(const PointResult& p) {
  OrderedJson j;
  j["report"] = to_json(p.report);
  if (p.rounding) j["rounding"] = to_json(*p.rounding);
  j["feasibility"] = to_json(p.verdict);
  if (p.sim) j["simulation"] = to_json(*p.sim);
  j["row"] = to_json(p.row);
  return j;
}

ResultRow row_from_json(const OrderedJson& j) {
  try {
    ResultRow r;
    r.lambda = num_or_nan(j.at("lambda"));
    r.status = j.at("status").get<std::string>();
    r.relaxed = num_or_nan(j.at("relaxed"));
    r.rounded = num_or_nan(j.at("rounded"));
    r.mc = num_or_nan(j.at("mc"));
    r.mc_ci = num_or_nan(j.at("mc_ci"));
    r.counts_by_type = j.at("counts_by_type").get<std::vector<int>>();
    r.counts_by_bw = j.at("counts_by_bw").get<std::vector<int>>();
    r.ms = j.at("ms").get<double>();
    r.feasible = j.at("feasible").get<bool>();
    r.error = j.at("error").get<std::string>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("results", std::string("malformed result row: ") + e.what());
  }
}

}  // namespace sensornet
