#include "sensornet/montecarlo.hpp"

#include "sensornet/error.hpp"
#include "sensornet/objective.hpp"
#include "sensornet/random.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>

namespace sensornet {

double pairwise_sum(const double* v, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += v[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(v, half) + pairwise_sum(v + half, n - half);
}

namespace {

struct Sensor {
  int location = 0;
  Eigen::VectorXd h;
  double amplitude = 0.0;   // sqrt(g * P_hat)
  double sigma_x = 0.0;
  double copy_noise = 0.0;  // std of the averaged channel noise, sqrt(sigma_phi^2 / N_b)
  double quant_sd = 0.0;    // sqrt(sigma_q^2)
  double noise_var = 0.0;   // equivalent noise the estimator assumes
};

std::vector<Sensor> placed_sensors(const LinkTable& link, const Selection& sel, Scheme scheme) {
  const SelectionShape shape = problem_shape(link, scheme);
  if (!(sel.shape() == shape)) throw DomainError("simulation: selection shape does not match the scheme");
  const auto cells = sel.assignment();
  if (!cells) throw DomainError("simulation: selection must be Boolean with one cell per location");
  std::vector<Sensor> out;
  for (int l = 0; l < shape.locations; ++l) {
    const int k = shape.cell_type((*cells)[l]);
    const int b = shape.cell_bandwidth((*cells)[l]);
    if (k == 0) continue;
    const LinkEntry& e = link.at(l, k, b);
    Sensor s;
    s.location = l;
    s.h = link.regressors.row(l).transpose();
    s.amplitude = std::sqrt(link.channel_gains(l) * e.p_hat);
    s.sigma_x = std::sqrt(link.sigma_x2(l));
    s.copy_noise = std::sqrt(link.sigma_phi2 / e.channels);
    s.quant_sd = std::sqrt(e.sigma_q2);
    s.noise_var = link.noise_var(l, k, b, scheme);
    if (!std::isfinite(s.noise_var)) continue;  // no power: the FC hears nothing
    out.push_back(std::move(s));
  }
  return out;
}

// What the FC hands to the estimator for one sensor, in measurement units.
double observe(const Sensor& s, double clean, double sigma_v, Scheme scheme, std::mt19937_64& rng,
               std::normal_distribution<double>& n01) {
  const double x = clean + sigma_v * n01(rng);
  if (scheme == Scheme::digital) return x + s.quant_sd * n01(rng);
  const double received = s.amplitude * x / s.sigma_x + s.copy_noise * n01(rng);
  return received * s.sigma_x / s.amplitude;
}

void summarize(std::vector<double>& per_trial, double z, SimReport& r) {
  const std::size_t n = per_trial.size();
  r.trials = static_cast<long>(n);
  r.empirical_mse = pairwise_sum(per_trial.data(), n) / static_cast<double>(n);
  if (n < 2) {
    r.ci_halfwidth = 0.0;
    return;
  }
  std::vector<double> dev(n);
  for (std::size_t i = 0; i < n; ++i) dev[i] = (per_trial[i] - r.empirical_mse) * (per_trial[i] - r.empirical_mse);
  const double var = pairwise_sum(dev.data(), n) / static_cast<double>(n - 1);
  r.ci_halfwidth = z * std::sqrt(var / static_cast<double>(n));
}

void write_trace(const SimOptions& o, const std::vector<double>& per_trial) {
  if (o.trace == nullptr) return;
  *o.trace << "trial,sq_error\n";
  char buf[64];
  for (std::size_t i = 0; i < per_trial.size(); ++i) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g\n", i, per_trial[i]);
    *o.trace << buf;
  }
}

std::mt19937_64 trial_rng(std::uint64_t seed, long trial) {
  return std::mt19937_64(counter_hash(seed, {static_cast<std::uint64_t>(trial)}));
}

SimReport simulate_static(const LinkTable& link, const Selection& sel, const SimOptions& o, Scheme scheme) {
  if (o.trials < 1) throw DomainError("simulation: trials must be >= 1");
  if (link.model() != SourceModel::static_vector) throw DomainError("simulation: static link table required");
  const std::vector<Sensor> sensors = placed_sensors(link, sel, scheme);
  const int m = static_cast<int>(link.prior.rows());
  const int ns = static_cast<int>(sensors.size());
  if (o.weight_scale.size() != 0 && o.weight_scale.size() != link.shape().locations) {
    throw DomainError("simulation: weight_scale must have one entry per location");
  }

  const Eigen::LLT<Eigen::MatrixXd> prior_llt(link.prior);
  const Eigen::MatrixXd prior_root = prior_llt.matrixL();
  Eigen::MatrixXd h(ns, m);
  Eigen::VectorXd w(ns);
  for (int i = 0; i < ns; ++i) {
    h.row(i) = sensors[i].h.transpose();
    const double scale = o.weight_scale.size() ? o.weight_scale(sensors[i].location) : 1.0;
    w(i) = scale / sensors[i].noise_var;
  }
  Eigen::MatrixXd fisher = prior_llt.solve(Eigen::MatrixXd::Identity(m, m));
  fisher.noalias() += h.transpose() * w.asDiagonal() * h;
  const Eigen::MatrixXd gain = fisher.llt().solve(h.transpose() * w.asDiagonal());  // m x ns

  SimReport r;
  r.scheme = scheme;
  r.problem = "static";
  r.predicted = StaticObjective(link, scheme).value(sel);
  const double sigma_v = std::sqrt(link.sigma_v2);

  std::vector<double> per_trial(static_cast<std::size_t>(o.trials));
  Eigen::VectorXd noise(m), theta(m), z(ns);
  for (long t = 0; t < o.trials; ++t) {
    std::mt19937_64 rng = trial_rng(o.seed, t);
    std::normal_distribution<double> n01(0.0, 1.0);
    for (int i = 0; i < m; ++i) noise(i) = n01(rng);
    theta.noalias() = prior_root * noise;
    for (int i = 0; i < ns; ++i) z(i) = observe(sensors[i], sensors[i].h.dot(theta), sigma_v, scheme, rng, n01);
    per_trial[t] = (theta - gain * z).squaredNorm();
  }
  summarize(per_trial, o.z, r);
  write_trace(o, per_trial);
  return r;
}

}  // namespace

SimReport simulate_static_analog(const Scenario&, const LinkTable& link, const Selection& sel, const SimOptions& o) {
  return simulate_static(link, sel, o, Scheme::analog);
}

SimReport simulate_static_digital(const Scenario&, const LinkTable& link, const Selection& sel,
                                  const SimOptions& o) {
  return simulate_static(link, sel, o, Scheme::digital);
}

SimReport simulate_dynamic(const Scenario& scenario, const LinkTable& link, const Selection& sel, Scheme scheme,
                           const SimOptions& o) {
  if (o.trials < 1 || o.steps < 1) throw DomainError("simulation: trials and steps must be >= 1");
  if (!(o.burn_in >= 0.0 && o.burn_in < 1.0)) throw DomainError("simulation: burn-in fraction must be in [0, 1)");
  if (link.model() != SourceModel::dynamic_scalar || link.regressors.cols() != 1) {
    throw DomainError("simulate_dynamic: needs a scalar source and a dynamic link table");
  }
  const std::vector<Sensor> sensors = placed_sensors(link, sel, scheme);
  const DynamicPrior& dp = scenario.dynamic_prior;
  const double a = dp.a, q = dp.drive_var, stationary = dp.stationary_var();
  const double sigma_u = std::sqrt(q), sigma_v = std::sqrt(link.sigma_v2);

  double gamma_total = 0.0;
  for (const auto& s : sensors) gamma_total += s.h(0) * s.h(0) / s.noise_var;

  SimReport r;
  r.scheme = scheme;
  r.problem = "dynamic";
  r.steps = o.steps;
  r.predicted = kalman_mmse_from_gamma(gamma_total, a, q);

  const long burn = static_cast<long>(std::floor(o.burn_in * static_cast<double>(o.steps)));
  const long kept = o.steps - burn;
  std::vector<double> per_trial(static_cast<std::size_t>(o.trials));
  std::vector<double> errors(static_cast<std::size_t>(kept));
  double filter_var = stationary;
  for (long t = 0; t < o.trials; ++t) {
    std::mt19937_64 rng = trial_rng(o.seed, t);
    std::normal_distribution<double> n01(0.0, 1.0);
    double theta = dp.initial_mean + std::sqrt(stationary) * n01(rng);
    double mean = dp.initial_mean, var = stationary;
    for (long step = 0; step < o.steps; ++step) {
      theta = a * theta + sigma_u * n01(rng);
      mean *= a;
      var = a * a * var + q;
      double innovation = 0.0;
      for (const auto& s : sensors) {
        const double h = s.h(0);
        const double z = observe(s, h * theta, sigma_v, scheme, rng, n01);
        innovation += h / s.noise_var * (z - h * mean);
      }
      var = var / (1.0 + gamma_total * var);
      mean += var * innovation;
      if (step >= burn) errors[step - burn] = (theta - mean) * (theta - mean);
    }
    per_trial[t] = pairwise_sum(errors.data(), errors.size()) / static_cast<double>(kept);
    filter_var = var;
  }
  r.filter_variance = filter_var;
  summarize(per_trial, o.z, r);
  write_trace(o, per_trial);
  return r;
}

}  // namespace sensornet
