#include "sensornet/selection.hpp"

#include "sensornet/error.hpp"

#include <cmath>
#include <string>

namespace sensornet {

Selection::Selection(SelectionShape shape) : shape_(shape), weights_(Eigen::VectorXd::Zero(shape.size())) {}

Selection::Selection(SelectionShape shape, Eigen::VectorXd weights) : shape_(shape), weights_(std::move(weights)) {
  if (weights_.size() != shape_.size()) throw DomainError("Selection: weight vector does not match shape");
}

Selection Selection::all_auxiliary(SelectionShape shape) {
  Selection s(shape);
  for (int l = 0; l < shape.locations; ++l) s(l, 0, 0) = 1.0;
  return s;
}

Selection Selection::from_assignment(SelectionShape shape, std::span<const int> cells) {
  if (static_cast<int>(cells.size()) != shape.locations) {
    throw DomainError("Selection::from_assignment: one cell per location required");
  }
  Selection s(shape);
  for (int l = 0; l < shape.locations; ++l) {
    const int c = cells[l];
    if (c < 0 || c >= shape.cells_per_location()) throw DomainError("Selection::from_assignment: cell out of range");
    s.weights_(l * shape.cells_per_location() + c) = 1.0;
  }
  return s;
}

double Selection::row_sum(int l) const {
  const int n = shape_.cells_per_location();
  return weights_.segment(l * n, n).sum();
}

bool Selection::is_boolean() const {
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    if (weights_(i) != 0.0 && weights_(i) != 1.0) return false;
  }
  return true;
}

std::optional<std::vector<int>> Selection::assignment() const {
  if (!is_boolean()) return std::nullopt;
  const int n = shape_.cells_per_location();
  std::vector<int> cells(shape_.locations, -1);
  for (int l = 0; l < shape_.locations; ++l) {
    for (int c = 0; c < n; ++c) {
      if (weights_(l * n + c) == 1.0) {
        if (cells[l] != -1) return std::nullopt;
        cells[l] = c;
      }
    }
    if (cells[l] == -1) return std::nullopt;
  }
  return cells;
}

void Selection::validate(double tol) const {
  for (Eigen::Index i = 0; i < weights_.size(); ++i) {
    if (!(weights_(i) >= -tol && weights_(i) <= 1.0 + tol)) {
      throw DomainError("Selection: entry " + std::to_string(i) + " outside [0,1]");
    }
  }
  for (int l = 0; l < shape_.locations; ++l) {
    if (std::abs(row_sum(l) - 1.0) > tol) {
      throw DomainError("Selection: location " + std::to_string(l) + " weights do not sum to 1");
    }
  }
}

}  // namespace sensornet
