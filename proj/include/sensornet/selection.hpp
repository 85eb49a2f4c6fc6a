#pragma once

#include <Eigen/Dense>

#include <optional>
#include <span>
#include <vector>

namespace sensornet {

// Dimensions of the (location, type, bandwidth) selection tensor. Type 0 is "no sensor".
struct SelectionShape {
  int locations = 0;
  int types = 1;       // K + 1
  int bandwidths = 1;  // B

  int cells_per_location() const { return types * bandwidths; }
  int size() const { return locations * cells_per_location(); }
  int index(int l, int k, int b) const { return (l * types + k) * bandwidths + b; }
  // Cell = k * B + b within one location.
  int cell(int k, int b) const { return k * bandwidths + b; }
  int cell_type(int cell) const { return cell / bandwidths; }
  int cell_bandwidth(int cell) const { return cell % bandwidths; }

  bool operator==(const SelectionShape&) const = default;
};

class Selection {
 public:
  Selection() = default;
  explicit Selection(SelectionShape shape);
  Selection(SelectionShape shape, Eigen::VectorXd weights);

  // Every location assigned to (k = 0, b = 0).
  static Selection all_auxiliary(SelectionShape shape);
  // One cell index (k * B + b) per location.
  static Selection from_assignment(SelectionShape shape, std::span<const int> cells);

  const SelectionShape& shape() const { return shape_; }
  const Eigen::VectorXd& weights() const { return weights_; }
  Eigen::VectorXd& weights() { return weights_; }

  double operator()(int l, int k, int b) const { return weights_(shape_.index(l, k, b)); }
  double& operator()(int l, int k, int b) { return weights_(shape_.index(l, k, b)); }

  double row_sum(int l) const;
  bool is_boolean() const;
  // Defined only for Boolean selections with one cell per location.
  std::optional<std::vector<int>> assignment() const;

  // Throws DomainError unless every entry is in [0,1] and rows sum to one within tol.
  void validate(double tol = 1e-9) const;

  bool operator==(const Selection& other) const {
    return shape_ == other.shape_ && weights_ == other.weights_;
  }

 private:
  SelectionShape shape_;
  Eigen::VectorXd weights_;
};

}  // namespace sensornet
