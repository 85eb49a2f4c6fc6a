#pragma once

#include "sensornet/link.hpp"
#include "sensornet/selection.hpp"

#include <Eigen/Dense>

namespace sensornet {

// Analog problems always transmit on one channel, so their selection tensor has a single
// bandwidth column; digital problems keep the full catalog.
SelectionShape problem_shape(const LinkTable& link, Scheme scheme);

// 1/sigma^2 for every cell of problem_shape(link, scheme); exactly 0 for k = 0.
Eigen::VectorXd information_weights(const LinkTable& link, Scheme scheme);

// A-optimal static objective tr[(Sigma^-1 + sum_l w_l h_l h_l^T)^-1] with w_l = sum_{k,b} s * info.
class StaticObjective {
 public:
  StaticObjective(const Eigen::MatrixXd& prior, const Eigen::MatrixXd& regressors, SelectionShape shape,
                  Eigen::VectorXd info);
  StaticObjective(const LinkTable& link, Scheme scheme);

  const SelectionShape& shape() const { return shape_; }
  const Eigen::VectorXd& info() const { return info_; }
  double prior_trace() const { return prior_trace_; }

  double value(const Eigen::VectorXd& s) const;
  Eigen::VectorXd gradient(const Eigen::VectorXd& s) const;
  double value(const Selection& sel) const { return value(sel.weights()); }
  Eigen::VectorXd gradient(const Selection& sel) const { return gradient(sel.weights()); }

  // Posterior covariance for a selection; used by the Monte Carlo estimator.
  Eigen::MatrixXd posterior_cov(const Eigen::VectorXd& s) const;

 private:
  Eigen::LLT<Eigen::MatrixXd> factor(const Eigen::VectorXd& s) const;

  SelectionShape shape_;
  Eigen::MatrixXd prior_inv_;
  Eigen::MatrixXd regressors_;
  Eigen::VectorXd info_;
  double prior_trace_ = 0.0;
};

double static_error_trace(const LinkTable& link, const Selection& sel, Scheme scheme);
Eigen::VectorXd static_gradient(const LinkTable& link, const Selection& sel, Scheme scheme);

// ---- dynamic scalar source ------------------------------------------------

double analog_gamma_coefficient(double h, double sigma_v2, double sigma_x2, double received_power,
                                double sigma_phi2);
double digital_gamma_coefficient(double h, double sigma_v2, double sigma_q2);

struct GammaCoefficients {
  SelectionShape shape;
  Eigen::VectorXd values;
};

// Throws DomainError unless the link table describes a scalar source.
GammaCoefficients gamma_coefficients(const LinkTable& link, Scheme scheme);

double gamma(const Selection& sel, const GammaCoefficients& coeffs);

// Positive root of a^2 g M^2 + (1 + s g - a^2) M - s = 0 (g = gamma, s = drive variance).
double kalman_mmse_from_gamma(double gamma, double a, double drive_var);

// Scalar Riccati fixed point, started from the stationary prior variance.
double kalman_riccati_iterate(double gamma, double a, double drive_var, double tol = 1e-14,
                              int max_iter = 1'000'000);

// Smallest gamma whose steady-state error does not exceed target.
double gamma_bound_from_error(double target, double a, double drive_var);

}  // namespace sensornet
