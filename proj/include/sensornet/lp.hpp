#pragma once

#include "sensornet/budget.hpp"
#include "sensornet/selection.hpp"

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <iosfwd>

namespace sensornet {

enum class Sense { minimize, maximize };
enum class LpStatus { optimal, infeasible, unbounded };

const char* to_string(LpStatus status);

// optimize c'x  s.t.  A_ub x <= b_ub,  A_eq x = b_eq,  0 <= x <= upper
struct LinearProgram {
  Eigen::VectorXd objective;
  Eigen::SparseMatrix<double> a_ub;
  Eigen::VectorXd b_ub;
  Eigen::SparseMatrix<double> a_eq;
  Eigen::VectorXd b_eq;
  Eigen::VectorXd upper;  // empty: every variable in [0, 1]
  Sense sense = Sense::minimize;

  int num_vars() const { return static_cast<int>(objective.size()); }
  double upper_bound(int j) const { return upper.size() == 0 ? 1.0 : upper(j); }
  // Throws DomainError on inconsistent dimensions or non-finite data.
  void validate() const;
};

struct LpOptions {
  double tol = 1e-9;          // primal feasibility and reduced-cost tolerance
  int refactor_every = 64;    // pivots between fresh basis inversions
  int degenerate_streak = 50; // consecutive degenerate pivots before switching to Bland's rule
  long max_iter = 0;          // 0 picks 50 * (rows + columns) + 1000
};

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  Eigen::VectorXd x;
  double value = 0.0;
  // Bound implied by the final duals: below value for min, above for max.
  double dual_bound = 0.0;
  long iterations = 0;
  bool used_bland = false;
};

// Bounded-variable two-phase revised simplex. Dantzig pricing with lowest-index ties;
// a streak of degenerate pivots switches to Bland's rule for the rest of the phase.
// Throws SolverError only when Bland's rule also runs out of iterations.
LpResult solve_lp(const LinearProgram& lp, const LpOptions& options = {});

// Plain-text dump, one row per line.
void write_lp(std::ostream& out, const LinearProgram& lp);

// {s in [0,1]^n : row sums = 1, cost <= cap, resource <= cap, masked cells = 0} plus
// optional extra "<=" rows.
class SelectionPolytope {
 public:
  SelectionPolytope(CellCosts costs, SelectionBudget budget, Restriction restriction = {});

  void add_constraint(const Eigen::VectorXd& coeffs, double rhs);

  const CellCosts& costs() const { return costs_; }
  const SelectionBudget& budget() const { return budget_; }
  const Restriction& restriction() const { return restriction_; }

  LinearProgram program(const Eigen::VectorXd& objective, Sense sense) const;
  LpResult solve(const Eigen::VectorXd& objective, Sense sense, const LpOptions& options = {}) const;

  // Vertex minimizing objective. Throws InfeasibleError when the budgets admit nothing.
  Eigen::VectorXd lmo(const Eigen::VectorXd& objective, const LpOptions& options = {}) const;

 private:
  CellCosts costs_;
  SelectionBudget budget_;
  Restriction restriction_;
  std::vector<Eigen::VectorXd> extra_rows_;
  std::vector<double> extra_rhs_;
};

Selection lmo_selection_polytope(const Selection& objective, const CellCosts& costs, const SelectionBudget& budget,
                                 const Restriction& restriction = {});

}  // namespace sensornet
