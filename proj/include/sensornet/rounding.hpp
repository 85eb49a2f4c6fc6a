#pragma once

#include "sensornet/budget.hpp"
#include "sensornet/lp.hpp"
#include "sensornet/selection.hpp"

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace sensornet {

using SelectionObjective = std::function<double(const Selection&)>;
using SelectionPredicate = std::function<bool(const Selection&)>;

struct RoundingOptions {
  int realizations = 1000;  // J per round
  int max_regen = 20;
  std::uint64_t seed = 0;
};

struct RoundingOutcome {
  Selection selection;
  double value = 0.0;
  long realizations = 0;    // draws made across all rounds
  long feasible_count = 0;  // |Omega| in the final round
  int regeneration_rounds = 0;
};

// Draws J Boolean realizations with P[cell] = relaxed weight, keeps those within the budgets
// (and satisfying `extra` when given) and returns the best one. Empty feasible sets trigger up to
// max_regen fresh rounds before an InfeasibleError. Ties go to the earliest draw.
RoundingOutcome randomized_round(const Selection& relaxed, const CellCosts& costs, const SelectionBudget& budget,
                                 const SelectionObjective& objective, Sense sense,
                                 const RoundingOptions& options = {}, const SelectionPredicate& extra = {});

// The cell drawn for location l in draw j of round r.
int draw_cell(const Selection& relaxed, int location, std::uint64_t seed, int round, long draw);

struct ExhaustiveResult {
  Selection selection;
  double value = 0.0;
  long long evaluated = 0;  // feasible candidates scored
};

inline constexpr long long kEnumerationCap = 20'000'000;

// Exact Boolean optimum by depth-first enumeration with budget pruning. Throws DomainError when
// the candidate count exceeds cap and InfeasibleError when nothing is feasible.
ExhaustiveResult exhaustive_search(const CellCosts& costs, const SelectionBudget& budget,
                                   const SelectionObjective& objective, Sense sense,
                                   const SelectionPredicate& extra = {}, const Restriction& restriction = {},
                                   long long cap = kEnumerationCap);

struct FeasibilityVerdict {
  bool ok = true;
  std::vector<std::string> violations;
};

FeasibilityVerdict feasibility_check(const Selection& sel, const CellCosts& costs, const SelectionBudget& budget);

}  // namespace sensornet
