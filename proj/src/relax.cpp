#include "sensornet/relax.hpp"

#include "sensornet/error.hpp"
#include "sensornet/objective.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace sensornet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct ProblemName {
  ProblemId id;
  const char* name;
};

constexpr ProblemName kProblemNames[] = {
    {ProblemId::StaticLoPS, "static-lops"},         {ProblemId::StaticBLoPS, "static-blops"},
    {ProblemId::DynamicLoPS, "dynamic-lops"},       {ProblemId::DynamicBLoPS, "dynamic-blops"},
    {ProblemId::MinCostStatic, "min-cost-static"},  {ProblemId::MinCostDynamic, "min-cost-dynamic"},
};

SolveReport blank_report(ProblemId id, Scheme scheme, const SelectionShape& shape, const SelectionBudget& budget) {
  SolveReport r;
  r.problem = id;
  r.scheme = scheme;
  r.mode = problem_mode(scheme);
  r.relaxed_selection = Selection(shape);
  r.cost_cap = budget.cost_cap;
  r.resource_cap = budget.resource_cap;
  return r;
}

void require_model(const LinkTable& link, SourceModel model, const char* who) {
  if (link.model() != model) {
    throw DomainError(std::string(who) + ": link table was built for the other source model");
  }
}

SolveReport solve_static(const Scenario& s, const LinkTable& link, ProblemId id, Scheme scheme,
                         const SelectionBudget& budget, const RelaxOptions& o) {
  require_model(link, SourceModel::static_vector, "static solve");
  const StaticObjective obj(link, scheme);
  SolveReport r = blank_report(id, scheme, obj.shape(), budget);
  if (budget.cost_cap < 0 || budget.resource_cap < 0) {
    r.status = SolveStatus::infeasible;
    return r;
  }
  const CellCosts costs = cell_costs(s, obj.shape(), r.mode);
  const SelectionPolytope poly(costs, budget, o.restriction);

  FwOptions fw;
  fw.tol = o.fw_tol_rel * obj.prior_trace();
  fw.max_iter = o.fw_max_iter;
  const FwResult res = frank_wolfe([&](const Eigen::VectorXd& x) { return obj.value(x); },
                                   [&](const Eigen::VectorXd& x) { return obj.gradient(x); },
                                   [&](const Eigen::VectorXd& d) { return poly.lmo(d, o.lp); },
                                   initial_point(costs, budget, o.restriction), fw);
  r.relaxed_selection = Selection(obj.shape(), res.x);
  r.relaxed_value = res.value;
  r.fw_gap = res.gap;
  r.bound = res.value - res.gap;
  r.iterations = res.iterations;
  return r;
}

SolveReport solve_dynamic(const Scenario& s, const LinkTable& link, ProblemId id, Scheme scheme,
                          const SelectionBudget& budget, const RelaxOptions& o) {
  require_model(link, SourceModel::dynamic_scalar, "dynamic solve");
  const GammaCoefficients coeffs = gamma_coefficients(link, scheme);
  SolveReport r = blank_report(id, scheme, coeffs.shape, budget);
  if (budget.cost_cap < 0 || budget.resource_cap < 0) {
    r.status = SolveStatus::infeasible;
    return r;
  }
  const CellCosts costs = cell_costs(s, coeffs.shape, r.mode);
  const SelectionPolytope poly(costs, budget, o.restriction);
  const LpResult lp = poly.solve(coeffs.values, Sense::maximize, o.lp);
  if (lp.status != LpStatus::optimal) {
    r.status = SolveStatus::infeasible;
    return r;
  }
  r.relaxed_selection = Selection(coeffs.shape, lp.x);
  r.relaxed_value = lp.value;
  r.bound = lp.dual_bound;
  r.iterations = lp.iterations;
  r.gamma = lp.value;
  r.mmse = kalman_mmse_from_gamma(std::max(0.0, lp.value), s.dynamic_prior.a, s.dynamic_prior.drive_var);
  return r;
}

}  // namespace

const char* to_string(ProblemId id) {
  for (const auto& p : kProblemNames) {
    if (p.id == id) return p.name;
  }
  return "?";
}

std::optional<ProblemId> parse_problem_id(std::string_view text) {
  for (const auto& p : kProblemNames) {
    if (text == p.name) return p.id;
  }
  return std::nullopt;
}

bool is_dynamic(ProblemId id) {
  return id == ProblemId::DynamicLoPS || id == ProblemId::DynamicBLoPS || id == ProblemId::MinCostDynamic;
}

bool is_min_cost(ProblemId id) { return id == ProblemId::MinCostStatic || id == ProblemId::MinCostDynamic; }

SourceModel source_model(ProblemId id) {
  return is_dynamic(id) ? SourceModel::dynamic_scalar : SourceModel::static_vector;
}

const char* to_string(SolveStatus status) { return status == SolveStatus::optimal ? "optimal" : "infeasible"; }

Scheme problem_scheme(ProblemId id, Scheme min_cost_scheme) {
  switch (id) {
    case ProblemId::StaticLoPS:
    case ProblemId::DynamicLoPS: return Scheme::analog;
    case ProblemId::StaticBLoPS:
    case ProblemId::DynamicBLoPS: return Scheme::digital;
    default: return min_cost_scheme;
  }
}

ResourceMode problem_mode(Scheme scheme) {
  return scheme == Scheme::analog ? ResourceMode::channels : ResourceMode::bandwidth;
}

double default_resource_cap(const Scenario& s, ResourceMode mode) {
  return mode == ResourceMode::channels ? static_cast<double>(s.budgets.channel_cap) : s.budgets.bandwidth_cap_hz;
}

Eigen::VectorXd initial_point(const CellCosts& costs, const SelectionBudget& budget, const Restriction& restriction) {
  const SelectionShape& sh = costs.shape;
  const int per = sh.cells_per_location();
  int allowed = 0;
  double unit_cost = 0.0, unit_use = 0.0;
  for (int c = 0; c < per; ++c) {
    if (!restriction.allows(sh.cell_type(c), sh.cell_bandwidth(c))) continue;
    ++allowed;
    unit_cost += costs.cost(c);
    unit_use += costs.use(c);
  }
  // Per-location cost and use of the uniform row.
  unit_cost /= allowed;
  unit_use /= allowed;
  double t = 1.0;
  const double total_cost = unit_cost * sh.locations, total_use = unit_use * sh.locations;
  if (total_cost > budget.cost_cap) t = std::min(t, std::max(0.0, budget.cost_cap) / total_cost);
  if (total_use > budget.resource_cap) t = std::min(t, std::max(0.0, budget.resource_cap) / total_use);

  Eigen::VectorXd x = Eigen::VectorXd::Zero(sh.size());
  for (int l = 0; l < sh.locations; ++l) {
    for (int c = 0; c < per; ++c) {
      if (restriction.allows(sh.cell_type(c), sh.cell_bandwidth(c))) x(l * per + c) = t / allowed;
    }
    x(l * per) += 1.0 - t;
  }
  return x;
}

SolveReport solve_static_lops(const Scenario& s, const LinkTable& link, double lambda, double channels,
                              const RelaxOptions& o) {
  return solve_static(s, link, ProblemId::StaticLoPS, Scheme::analog, {lambda, channels}, o);
}

SolveReport solve_static_blops(const Scenario& s, const LinkTable& link, double lambda, double bandwidth_hz,
                               const RelaxOptions& o) {
  return solve_static(s, link, ProblemId::StaticBLoPS, Scheme::digital, {lambda, bandwidth_hz}, o);
}

SolveReport solve_dynamic_lops(const Scenario& s, const LinkTable& link, double lambda, double channels,
                               const RelaxOptions& o) {
  return solve_dynamic(s, link, ProblemId::DynamicLoPS, Scheme::analog, {lambda, channels}, o);
}

SolveReport solve_dynamic_blops(const Scenario& s, const LinkTable& link, double lambda, double bandwidth_hz,
                                const RelaxOptions& o) {
  return solve_dynamic(s, link, ProblemId::DynamicBLoPS, Scheme::digital, {lambda, bandwidth_hz}, o);
}

SolveReport solve_min_cost_static(const Scenario& s, const LinkTable& link, double xi, Scheme scheme,
                                  const RelaxOptions& o) {
  require_model(link, SourceModel::static_vector, "solve_min_cost_static");
  if (!(xi > 0.0)) throw DomainError("solve_min_cost_static: target error must be positive");
  const ResourceMode mode = problem_mode(scheme);
  const double cap = default_resource_cap(s, mode);
  const SelectionShape shape = problem_shape(link, scheme);

  double lambda_max = 0.0;
  for (int k = 1; k < shape.types; ++k) {
    if (o.restriction.type && *o.restriction.type != k) continue;
    lambda_max = std::max(lambda_max, s.sensor_types[k].cost);
  }
  lambda_max *= shape.locations;

  auto at = [&](double lambda) { return solve_static(s, link, ProblemId::MinCostStatic, scheme, {lambda, cap}, o); };

  SolveReport best = at(0.0);
  long iterations = best.iterations;
  double lo = 0.0, hi = 0.0;
  if (best.relaxed_value > xi) {
    best = at(lambda_max);
    iterations += best.iterations;
    if (best.relaxed_value > xi) {
      SolveReport r = blank_report(ProblemId::MinCostStatic, scheme, shape, {kInf, cap});
      r.status = SolveStatus::infeasible;
      r.target = xi;
      r.error_value = best.relaxed_value;
      r.iterations = iterations;
      return r;
    }
    hi = lambda_max;
    for (int step = 0; step < o.bisection_steps; ++step) {
      const double mid = 0.5 * (lo + hi);
      SolveReport rep = at(mid);
      iterations += rep.iterations;
      if (rep.relaxed_value <= xi) {
        hi = mid;
        best = std::move(rep);
      } else {
        lo = mid;
      }
    }
  }

  SolveReport r = best;
  r.problem = ProblemId::MinCostStatic;
  r.status = SolveStatus::optimal;
  r.target = xi;
  r.error_value = best.relaxed_value;
  r.relaxed_value = hi;
  r.bound = lo;
  r.cost_cap = hi;
  r.resource_cap = cap;
  r.iterations = iterations;
  return r;
}

SolveReport solve_min_cost_dynamic(const Scenario& s, const LinkTable& link, double xi, Scheme scheme,
                                   const RelaxOptions& o) {
  require_model(link, SourceModel::dynamic_scalar, "solve_min_cost_dynamic");
  const double a = s.dynamic_prior.a, q = s.dynamic_prior.drive_var;
  const double gamma_min = gamma_bound_from_error(xi, a, q);
  const GammaCoefficients coeffs = gamma_coefficients(link, scheme);
  const ResourceMode mode = problem_mode(scheme);
  const SelectionBudget budget{kInf, default_resource_cap(s, mode)};
  SolveReport r = blank_report(ProblemId::MinCostDynamic, scheme, coeffs.shape, budget);
  r.target = xi;

  const CellCosts costs = cell_costs(s, coeffs.shape, mode);
  SelectionPolytope poly(costs, budget, o.restriction);
  poly.add_constraint(-coeffs.values, -gamma_min);
  const int per = coeffs.shape.cells_per_location();
  Eigen::VectorXd price(coeffs.shape.size());
  for (int l = 0; l < coeffs.shape.locations; ++l) {
    for (int c = 0; c < per; ++c) price(l * per + c) = costs.cost(c);
  }
  const LpResult lp = poly.solve(price, Sense::minimize, o.lp);
  if (lp.status != LpStatus::optimal) {
    r.status = SolveStatus::infeasible;
    return r;
  }
  r.relaxed_selection = Selection(coeffs.shape, lp.x);
  r.relaxed_value = lp.value;
  r.bound = lp.dual_bound;
  r.iterations = lp.iterations;
  r.cost_cap = lp.value;
  r.gamma = coeffs.values.dot(lp.x);
  r.mmse = kalman_mmse_from_gamma(std::max(0.0, r.gamma), a, q);
  r.error_value = r.mmse;
  return r;
}

}  // namespace sensornet
