#include "sensornet/rounding.hpp"

#include "sensornet/error.hpp"
#include "sensornet/random.hpp"

#include <cmath>
#include <cstdio>

namespace sensornet {

namespace {

bool better(double candidate, double incumbent, Sense sense) {
  return sense == Sense::minimize ? candidate < incumbent : candidate > incumbent;
}

}  // namespace

int draw_cell(const Selection& relaxed, int location, std::uint64_t seed, int round, long draw) {
  const int per = relaxed.shape().cells_per_location();
  const auto row = relaxed.weights().segment(location * per, per);
  double total = 0.0;
  for (int c = 0; c < per; ++c) total += std::max(0.0, row(c));
  if (!(total > 0.0)) throw DomainError("randomized_round: location " + std::to_string(location) + " has no mass");
  const double u =
      to_unit(counter_hash(seed, {static_cast<std::uint64_t>(round), static_cast<std::uint64_t>(draw),
                                  static_cast<std::uint64_t>(location)})) *
      total;
  double cum = 0.0;
  int last = -1;
  for (int c = 0; c < per; ++c) {
    const double w = std::max(0.0, row(c));
    if (w == 0.0) continue;
    cum += w;
    last = c;
    if (u < cum) return c;
  }
  return last;
}

RoundingOutcome randomized_round(const Selection& relaxed, const CellCosts& costs, const SelectionBudget& budget,
                                 const SelectionObjective& objective, Sense sense, const RoundingOptions& o,
                                 const SelectionPredicate& extra) {
  if (o.realizations < 1 || o.max_regen < 0) throw DomainError("randomized_round: need J >= 1 and max_regen >= 0");
  if (!(relaxed.shape() == costs.shape)) throw DomainError("randomized_round: shape mismatch");
  relaxed.validate(1e-6);

  const SelectionShape& sh = relaxed.shape();
  const int per = sh.cells_per_location();
  RoundingOutcome out;
  std::vector<int> cells(sh.locations);
  Selection candidate(sh);

  for (int round = 0; round <= o.max_regen; ++round) {
    out.regeneration_rounds = round;
    out.feasible_count = 0;
    bool have = false;
    for (long j = 0; j < o.realizations; ++j) {
      ++out.realizations;
      double cost = 0.0, use = 0.0;
      for (int l = 0; l < sh.locations; ++l) {
        cells[l] = draw_cell(relaxed, l, o.seed, round, j);
        cost += costs.cost(cells[l]);
        use += costs.use(cells[l]);
      }
      if (!within_cap(cost, budget.cost_cap) || !within_cap(use, budget.resource_cap)) continue;
      candidate.weights().setZero();
      for (int l = 0; l < sh.locations; ++l) candidate.weights()(l * per + cells[l]) = 1.0;
      if (extra && !extra(candidate)) continue;
      ++out.feasible_count;
      const double v = objective(candidate);
      if (!have || better(v, out.value, sense)) {
        out.selection = candidate;
        out.value = v;
        have = true;
      }
    }
    if (have) return out;
  }
  throw InfeasibleError("randomized rounding: no feasible realization in " + std::to_string(o.max_regen + 1) +
                        " rounds of " + std::to_string(o.realizations) +
                        " draws; increase J or loosen the budgets");
}

ExhaustiveResult exhaustive_search(const CellCosts& costs, const SelectionBudget& budget,
                                   const SelectionObjective& objective, Sense sense, const SelectionPredicate& extra,
                                   const Restriction& restriction, long long cap) {
  const SelectionShape& sh = costs.shape;
  const int per = sh.cells_per_location();
  std::vector<int> allowed;
  for (int c = 0; c < per; ++c) {
    if (restriction.allows(sh.cell_type(c), sh.cell_bandwidth(c))) allowed.push_back(c);
  }
  long double count = 1.0L;
  for (int l = 0; l < sh.locations; ++l) count *= static_cast<long double>(allowed.size());
  if (count > static_cast<long double>(cap)) {
    throw DomainError("exhaustive_search: " + std::to_string(static_cast<double>(count)) +
                      " candidates exceed the enumeration cap; use the rounding path");
  }

  ExhaustiveResult out;
  bool have = false;
  Selection sel(sh);
  // Depth-first over locations; partial sums only grow, so a cap violation prunes the subtree.
  auto recurse = [&](auto&& self, int l, double cost, double use) -> void {
    if (l == sh.locations) {
      if (extra && !extra(sel)) return;
      ++out.evaluated;
      const double v = objective(sel);
      if (!have || better(v, out.value, sense)) {
        out.selection = sel;
        out.value = v;
        have = true;
      }
      return;
    }
    for (int c : allowed) {
      const double nc = cost + costs.cost(c), nu = use + costs.use(c);
      if (!within_cap(nc, budget.cost_cap) || !within_cap(nu, budget.resource_cap)) continue;
      sel.weights()(l * per + c) = 1.0;
      self(self, l + 1, nc, nu);
      sel.weights()(l * per + c) = 0.0;
    }
  };
  recurse(recurse, 0, 0.0, 0.0);
  if (!have) throw InfeasibleError("exhaustive_search: no Boolean selection satisfies the budgets");
  return out;
}

FeasibilityVerdict feasibility_check(const Selection& sel, const CellCosts& costs, const SelectionBudget& budget) {
  FeasibilityVerdict v;
  auto fail = [&](std::string msg) {
    v.ok = false;
    v.violations.push_back(std::move(msg));
  };
  if (!(sel.shape() == costs.shape)) {
    fail("shape mismatch");
    return v;
  }
  if (!sel.is_boolean()) fail("selection is not Boolean");
  const int per = sel.shape().cells_per_location();
  for (int l = 0; l < sel.shape().locations; ++l) {
    int nnz = 0;
    for (int c = 0; c < per; ++c) nnz += sel.weights()(l * per + c) != 0.0;
    if (nnz != 1) fail("||S_" + std::to_string(l) + "||_0 = " + std::to_string(nnz));
  }
  char buf[160];
  const double cost = costs.total_cost(sel);
  if (!within_cap(cost, budget.cost_cap)) {
    std::snprintf(buf, sizeof buf, "cost %.17g exceeds %.17g", cost, budget.cost_cap);
    fail(buf);
  }
  const double use = costs.total_use(sel);
  if (!within_cap(use, budget.resource_cap)) {
    std::snprintf(buf, sizeof buf, "%s %.17g exceeds %.17g", to_string(costs.mode), use, budget.resource_cap);
    fail(buf);
  }
  return v;
}

}  // namespace sensornet
