#include "sensornet/budget.hpp"

#include "sensornet/error.hpp"

namespace sensornet {

const char* to_string(ResourceMode mode) { return mode == ResourceMode::channels ? "channels" : "bandwidth"; }

double CellCosts::total_cost(const Selection& sel) const {
  const int n = shape.cells_per_location();
  double total = 0.0;
  for (int l = 0; l < shape.locations; ++l) {
    for (int c = 0; c < n; ++c) total += sel.weights()(l * n + c) * cost(c);
  }
  return total;
}

double CellCosts::total_use(const Selection& sel) const {
  const int n = shape.cells_per_location();
  double total = 0.0;
  for (int l = 0; l < shape.locations; ++l) {
    for (int c = 0; c < n; ++c) total += sel.weights()(l * n + c) * use(c);
  }
  return total;
}

CellCosts cell_costs(const Scenario& s, const SelectionShape& shape, ResourceMode mode) {
  if (shape.types != s.num_types()) throw DomainError("cell_costs: shape does not match the sensor catalog");
  if (mode == ResourceMode::bandwidth && shape.bandwidths != s.num_bandwidths()) {
    throw DomainError("cell_costs: bandwidth mode needs the full bandwidth catalog");
  }
  CellCosts out;
  out.shape = shape;
  out.mode = mode;
  for (const auto& t : s.sensor_types) out.type_cost.push_back(t.cost);
  for (int b = 0; b < shape.bandwidths; ++b) {
    out.resource.push_back(mode == ResourceMode::channels ? 1.0 : s.bandwidths[b].hz);
  }
  return out;
}

}  // namespace sensornet
