#pragma once

#include "sensornet/link.hpp"
#include "sensornet/scenario.hpp"
#include "sensornet/selection.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace sensornet {

struct SimOptions {
  long trials = 10000;
  std::uint64_t seed = 0;
  long steps = 10000;          // dynamic only
  double burn_in = 0.2;        // dynamic only: leading fraction of steps left out of the average
  double z = 1.959963984540054;  // two-sided 95% normal quantile
  // Static only: per-location multipliers on the estimator weights (empty = exact MAP weights).
  Eigen::VectorXd weight_scale;
  std::ostream* trace = nullptr;  // per-trial CSV "trial,sq_error" when set
};

struct SimReport {
  double empirical_mse = 0.0;
  double ci_halfwidth = 0.0;
  long trials = 0;
  double predicted = 0.0;
  Scheme scheme = Scheme::analog;
  std::string problem;
  long steps = 0;
  double filter_variance = 0.0;  // dynamic: the filter's own error variance after the last step
};

// Static vector source. The analog chain normalizes by sigma_x, scales by sqrt(P_hat), sends
// N_b copies through AWGN and averages them at the FC; the estimate is the posterior mean.
SimReport simulate_static_analog(const Scenario& scenario, const LinkTable& link, const Selection& sel,
                                 const SimOptions& options);

// Digital chain under the additive Gaussian quantization model: y = h'theta + v + q, q ~ N(0, sigma_q^2).
SimReport simulate_static_digital(const Scenario& scenario, const LinkTable& link, const Selection& sel,
                                  const SimOptions& options);

// Scalar Gauss-Markov source tracked by a Kalman filter; reports the post-burn-in mean squared
// error against the closed-form steady state.
SimReport simulate_dynamic(const Scenario& scenario, const LinkTable& link, const Selection& sel, Scheme scheme,
                           const SimOptions& options);

// Order-independent summation used for every Monte Carlo aggregate.
double pairwise_sum(const double* values, std::size_t n);

}  // namespace sensornet
