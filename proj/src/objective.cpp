#include "sensornet/objective.hpp"

#include "sensornet/error.hpp"

#include <cmath>
#include <string>

namespace sensornet {

SelectionShape problem_shape(const LinkTable& link, Scheme scheme) {
  SelectionShape shape = link.shape();
  if (scheme == Scheme::analog) shape.bandwidths = 1;
  return shape;
}

Eigen::VectorXd information_weights(const LinkTable& link, Scheme scheme) {
  const SelectionShape shape = problem_shape(link, scheme);
  Eigen::VectorXd info(shape.size());
  for (int l = 0; l < shape.locations; ++l) {
    for (int k = 0; k < shape.types; ++k) {
      for (int b = 0; b < shape.bandwidths; ++b) {
        info(shape.index(l, k, b)) = k == 0 ? 0.0 : link.info_weight(l, k, b, scheme);
      }
    }
  }
  return info;
}

StaticObjective::StaticObjective(const Eigen::MatrixXd& prior, const Eigen::MatrixXd& regressors,
                                 SelectionShape shape, Eigen::VectorXd info)
    : shape_(shape), regressors_(regressors), info_(std::move(info)), prior_trace_(prior.trace()) {
  if (info_.size() != shape_.size() || regressors_.rows() != shape_.locations ||
      regressors_.cols() != prior.rows()) {
    throw DomainError("StaticObjective: inconsistent dimensions");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(prior);
  if (llt.info() != Eigen::Success) throw DomainError("StaticObjective: prior covariance is not positive definite");
  prior_inv_ = llt.solve(Eigen::MatrixXd::Identity(prior.rows(), prior.cols()));
  prior_inv_ = 0.5 * (prior_inv_ + prior_inv_.transpose());
}

StaticObjective::StaticObjective(const LinkTable& link, Scheme scheme)
    : StaticObjective(link.prior, link.regressors, problem_shape(link, scheme), information_weights(link, scheme)) {}

Eigen::LLT<Eigen::MatrixXd> StaticObjective::factor(const Eigen::VectorXd& s) const {
  if (s.size() != shape_.size()) throw DomainError("StaticObjective: selection size mismatch");
  const int n = shape_.cells_per_location();
  Eigen::VectorXd w(shape_.locations);
  for (int l = 0; l < shape_.locations; ++l) {
    w(l) = s.segment(l * n, n).dot(info_.segment(l * n, n));
  }
  Eigen::MatrixXd fisher = prior_inv_;
  fisher.noalias() += regressors_.transpose() * w.asDiagonal() * regressors_;
  Eigen::LLT<Eigen::MatrixXd> llt(fisher);
  if (llt.info() != Eigen::Success) {
    throw SolverError("StaticObjective: information matrix lost positive definiteness");
  }
  return llt;
}

double StaticObjective::value(const Eigen::VectorXd& s) const {
  const auto llt = factor(s);
  const auto m = prior_inv_.rows();
  // tr(F^-1) = ||L^-1||_F^2
  const Eigen::MatrixXd linv = llt.matrixL().solve(Eigen::MatrixXd::Identity(m, m));
  return linv.squaredNorm();
}

Eigen::VectorXd StaticObjective::gradient(const Eigen::VectorXd& s) const {
  const auto llt = factor(s);
  const Eigen::MatrixXd z = llt.solve(regressors_.transpose());  // m x L
  const int n = shape_.cells_per_location();
  Eigen::VectorXd g(shape_.size());
  for (int l = 0; l < shape_.locations; ++l) {
    const double q = z.col(l).squaredNorm();
    g.segment(l * n, n) = -q * info_.segment(l * n, n);
  }
  return g;
}

Eigen::MatrixXd StaticObjective::posterior_cov(const Eigen::VectorXd& s) const {
  const auto llt = factor(s);
  return llt.solve(Eigen::MatrixXd::Identity(prior_inv_.rows(), prior_inv_.cols()));
}

double static_error_trace(const LinkTable& link, const Selection& sel, Scheme scheme) {
  const StaticObjective obj(link, scheme);
  if (!(sel.shape() == obj.shape())) throw DomainError("static_error_trace: selection shape mismatch");
  return obj.value(sel);
}

Eigen::VectorXd static_gradient(const LinkTable& link, const Selection& sel, Scheme scheme) {
  const StaticObjective obj(link, scheme);
  if (!(sel.shape() == obj.shape())) throw DomainError("static_gradient: selection shape mismatch");
  return obj.gradient(sel);
}

// ---- dynamic ----------------------------------------------------------------

double analog_gamma_coefficient(double h, double sigma_v2, double sigma_x2, double received_power,
                                double sigma_phi2) {
  if (received_power <= 0.0) return 0.0;
  return h * h * received_power / (sigma_v2 * received_power + sigma_x2 * sigma_phi2);
}

double digital_gamma_coefficient(double h, double sigma_v2, double sigma_q2) {
  return h * h / (sigma_v2 + sigma_q2);
}

GammaCoefficients gamma_coefficients(const LinkTable& link, Scheme scheme) {
  if (link.regressors.cols() != 1) {
    throw DomainError("gamma_coefficients: requires a scalar source (m = 1)");
  }
  const SelectionShape shape = problem_shape(link, scheme);
  GammaCoefficients out{shape, Eigen::VectorXd::Zero(shape.size())};
  for (int l = 0; l < shape.locations; ++l) {
    const double h = link.regressors(l, 0);
    for (int k = 1; k < shape.types; ++k) {
      for (int b = 0; b < shape.bandwidths; ++b) {
        const auto& e = link.at(l, k, b);
        double c = 0.0;
        if (scheme == Scheme::analog) {
          // N_b averaged copies act like N_b times the per-channel received power.
          const double received = link.channel_gains(l) * e.p_hat * e.channels;
          c = analog_gamma_coefficient(h, link.sigma_v2, link.sigma_x2(l), received, link.sigma_phi2);
        } else {
          c = digital_gamma_coefficient(h, link.sigma_v2, e.sigma_q2);
        }
        out.values(shape.index(l, k, b)) = c;
      }
    }
  }
  return out;
}

double gamma(const Selection& sel, const GammaCoefficients& coeffs) {
  if (!(sel.shape() == coeffs.shape)) throw DomainError("gamma: selection shape mismatch");
  return sel.weights().dot(coeffs.values);
}

double kalman_mmse_from_gamma(double gamma_value, double a, double drive_var) {
  if (gamma_value < 0 || drive_var <= 0 || std::abs(a) >= 1) {
    throw DomainError("kalman_mmse_from_gamma: need gamma >= 0, drive variance > 0, |a| < 1");
  }
  const double a2 = a * a;
  const double lin = 1.0 + drive_var * gamma_value - a2;
  // Root of A M^2 + lin M - s = 0 in the cancellation-free form 2s / (lin + sqrt(lin^2 + 4 A s)).
  return 2.0 * drive_var / (lin + std::sqrt(lin * lin + 4.0 * a2 * gamma_value * drive_var));
}

double kalman_riccati_iterate(double gamma_value, double a, double drive_var, double tol, int max_iter) {
  if (tol <= 0) throw DomainError("kalman_riccati_iterate: tol must be positive");
  const double a2 = a * a;
  double m = drive_var / (1.0 - a2);
  for (int it = 0; it < max_iter; ++it) {
    const double predicted = a2 * m + drive_var;
    const double next = predicted / (1.0 + gamma_value * predicted);
    const double delta = std::abs(next - m);
    m = next;
    if (delta < tol) return m;
  }
  throw SolverError("kalman_riccati_iterate: no convergence after " + std::to_string(max_iter) +
                    " iterations, last iterate " + std::to_string(m));
}

double gamma_bound_from_error(double target, double a, double drive_var) {
  const double a2 = a * a;
  const double prior = drive_var / (1.0 - a2);
  if (!(target > 0.0) || target > prior) {
    throw DomainError("gamma_bound_from_error: target must lie in (0, sigma_u^2/(1-a^2)]");
  }
  return std::max(0.0, (drive_var - (1.0 - a2) * target) / (a2 * target * target + drive_var * target));
}

}  // namespace sensornet
