#pragma once

#include <Eigen/Dense>

#include <functional>
#include <vector>

namespace sensornet {

using ValueFn = std::function<double(const Eigen::VectorXd&)>;
using GradientFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;
// Returns a vertex minimizing <direction, v> over the feasible polytope.
using LinearOracle = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct FwOptions {
  double tol = 1e-6;        // stop once the duality gap <grad, x - v> falls below this
  int max_iter = 5000;
  bool away_steps = true;
  int line_search_steps = 60;
};

struct FwResult {
  Eigen::VectorXd x;
  double value = 0.0;
  double gap = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> values;  // f after each step
};

// Conditional gradient with away steps. Each step length is the exact line-search minimizer
// along the chosen direction (bisection on the directional derivative); plain FW steps also try
// the open-loop length 2/(t+2) and keep whichever gives the lower value.
// On hitting max_iter the last iterate is returned with its gap and converged = false.
FwResult frank_wolfe(const ValueFn& f, const GradientFn& grad, const LinearOracle& lmo, Eigen::VectorXd x0,
                     const FwOptions& options = {});

}  // namespace sensornet
