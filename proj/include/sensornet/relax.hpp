#pragma once

#include "sensornet/budget.hpp"
#include "sensornet/frank_wolfe.hpp"
#include "sensornet/link.hpp"
#include "sensornet/lp.hpp"
#include "sensornet/scenario.hpp"
#include "sensornet/selection.hpp"

#include <optional>
#include <string_view>

namespace sensornet {

enum class ProblemId { StaticLoPS, StaticBLoPS, DynamicLoPS, DynamicBLoPS, MinCostStatic, MinCostDynamic };

// "static-lops", "static-blops", "dynamic-lops", "dynamic-blops", "min-cost-static", "min-cost-dynamic"
const char* to_string(ProblemId id);
std::optional<ProblemId> parse_problem_id(std::string_view text);

bool is_dynamic(ProblemId id);
bool is_min_cost(ProblemId id);
SourceModel source_model(ProblemId id);

enum class SolveStatus { optimal, infeasible };
const char* to_string(SolveStatus status);

struct RelaxOptions {
  double fw_tol_rel = 1e-6;  // gap target relative to tr(Sigma_theta)
  int fw_max_iter = 5000;
  int bisection_steps = 40;
  LpOptions lp;
  Restriction restriction;
};

struct SolveReport {
  ProblemId problem = ProblemId::StaticLoPS;
  SolveStatus status = SolveStatus::optimal;
  Scheme scheme = Scheme::analog;
  ResourceMode mode = ResourceMode::channels;
  Selection relaxed_selection;
  // Error-min problems: tr of the error covariance. gamma-max problems: gamma. Min-cost: cost.
  double relaxed_value = 0.0;
  // Certified bound on the relaxed optimum: below it for min problems, above for gamma-max.
  double bound = 0.0;
  double fw_gap = 0.0;
  long iterations = 0;
  double cost_cap = 0.0;
  double resource_cap = 0.0;
  double target = 0.0;         // xi for min-cost problems
  double gamma = 0.0;          // dynamic problems
  double mmse = 0.0;           // dynamic problems: steady-state error at gamma
  double error_value = 0.0;    // error reached by the relaxed selection (min-cost problems)
};

SolveReport solve_static_lops(const Scenario& scenario, const LinkTable& link, double lambda, double channels,
                              const RelaxOptions& options = {});
SolveReport solve_static_blops(const Scenario& scenario, const LinkTable& link, double lambda, double bandwidth_hz,
                               const RelaxOptions& options = {});
SolveReport solve_dynamic_lops(const Scenario& scenario, const LinkTable& link, double lambda, double channels,
                               const RelaxOptions& options = {});
SolveReport solve_dynamic_blops(const Scenario& scenario, const LinkTable& link, double lambda, double bandwidth_hz,
                                const RelaxOptions& options = {});

// Smallest cost cap whose relaxed error-min solve reaches tr <= xi, by bisection over
// [0, sum_l max_k c_k]. The resource cap comes from the scenario budgets.
SolveReport solve_min_cost_static(const Scenario& scenario, const LinkTable& link, double xi, Scheme scheme,
                                  const RelaxOptions& options = {});
// LP: min cost subject to gamma(s) >= gamma_bound_from_error(xi) and the resource cap.
SolveReport solve_min_cost_dynamic(const Scenario& scenario, const LinkTable& link, double xi, Scheme scheme,
                                   const RelaxOptions& options = {});

// Scheme and resource accounting a problem uses.
Scheme problem_scheme(ProblemId id, Scheme min_cost_scheme = Scheme::digital);
ResourceMode problem_mode(Scheme scheme);
// Resource cap from the scenario budgets: channel count N for LoPS, bandwidth W for BLoPS.
double default_resource_cap(const Scenario& scenario, ResourceMode mode);

// Uniform weights over the allowed cells, pulled toward (k = 0, b = 0) until the budgets hold.
Eigen::VectorXd initial_point(const CellCosts& costs, const SelectionBudget& budget,
                              const Restriction& restriction = {});

}  // namespace sensornet
