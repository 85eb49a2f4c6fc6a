#pragma once

#include "sensornet/scenario.hpp"
#include "sensornet/selection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <vector>

namespace sensornet {

// LoPS counts one channel per placed sensor; BLoPS sums the resource block w_b in Hz.
enum class ResourceMode { channels, bandwidth };

const char* to_string(ResourceMode mode);

struct SelectionBudget {
  double cost_cap = std::numeric_limits<double>::infinity();
  double resource_cap = std::numeric_limits<double>::infinity();
};

// Fixes the sensor type and/or the bandwidth every placed sensor may use. The auxiliary
// type is always allowed.
struct Restriction {
  std::optional<int> type;
  std::optional<int> bandwidth;

  bool allows(int k, int b) const {
    if (k == 0) return true;
    return (!type || *type == k) && (!bandwidth || *bandwidth == b);
  }
  bool active() const { return type.has_value() || bandwidth.has_value(); }
};

// Per-cell price and resource use. Type 0 contributes nothing to either sum.
struct CellCosts {
  SelectionShape shape;
  std::vector<double> type_cost;  // by k
  std::vector<double> resource;   // by b
  ResourceMode mode = ResourceMode::channels;

  double cost(int cell) const {
    const int k = shape.cell_type(cell);
    return k == 0 ? 0.0 : type_cost[k];
  }
  double use(int cell) const {
    return shape.cell_type(cell) == 0 ? 0.0 : resource[shape.cell_bandwidth(cell)];
  }

  double total_cost(const Selection& sel) const;
  double total_use(const Selection& sel) const;
};

CellCosts cell_costs(const Scenario& scenario, const SelectionShape& shape, ResourceMode mode);

// Relative slack granted to "<=" budget comparisons on Boolean selections.
inline constexpr double kBudgetSlack = 1e-9;

inline bool within_cap(double used, double cap) {
  return used <= cap + kBudgetSlack * std::max(1.0, std::abs(cap));
}

}  // namespace sensornet
