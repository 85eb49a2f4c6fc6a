#include "sensornet/link.hpp"

#include "sensornet/error.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>

namespace sensornet {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// exp() overflows just above this.
constexpr double kMaxLogLevels = 709.0;

// floor(exp(log_value)) with a snap-to-integer guard so exact powers never floor one short.
QuantizerLevels floor_exp(double log_value) {
  if (log_value > kMaxLogLevels) return {kInf, true};
  double v = std::exp(log_value);
  const double r = std::nearbyint(v);
  if (std::abs(v - r) <= 1e-9 * std::max(1.0, r)) v = r;
  return {std::max(1.0, std::floor(v)), false};
}

}  // namespace

const char* to_string(Scheme scheme) { return scheme == Scheme::analog ? "analog" : "digital"; }

double per_channel_power(double power_w, double interval_s, double slot_s, int channels) {
  return power_w * interval_s / (slot_s * channels);
}

double receiver_noise(double temperature_k, double channel_hz) { return kBoltzmann * temperature_k * channel_hz; }

double snr(double power_w, double gain, double temperature_k, double bandwidth_hz) {
  return power_w * gain / (kBoltzmann * temperature_k * bandwidth_hz);
}

double snr_via_grid(double power_w, double gain, double temperature_k, const ResourceGrid& grid, int channels) {
  const double p_hat = per_channel_power(power_w, grid.interval_s, grid.slot_s(), channels);
  return p_hat * gain / receiver_noise(temperature_k, grid.channel_hz());
}

double snr_with_copies(double p_hat, double gain, double sigma_phi2, int copies) {
  if (copies < 1) throw DomainError("snr_with_copies: copies must be >= 1");
  return p_hat * gain / (sigma_phi2 / copies);
}

double measurement_power(const Eigen::VectorXd& h, const Eigen::MatrixXd& prior, double sigma_v2) {
  if (prior.rows() != h.size() || prior.cols() != h.size()) {
    throw DomainError("measurement_power: regressor and prior dimensions differ");
  }
  return h.dot(prior * h) + sigma_v2;
}

double analog_noise_var(double sigma_x2, double sigma_v2, double gain, double p_hat, double sigma_phi2) {
  const double received = gain * p_hat;
  if (sigma_phi2 == 0.0) return sigma_v2;
  if (received <= 0.0) return kInf;
  return sigma_v2 + sigma_x2 * sigma_phi2 / received;
}

double analog_noise_var(const Eigen::VectorXd& h, const Eigen::MatrixXd& prior, double sigma_v2, double gain,
                        double p_hat, double sigma_phi2) {
  return analog_noise_var(measurement_power(h, prior, sigma_v2), sigma_v2, gain, p_hat, sigma_phi2);
}

QuantizerLevels quantization_levels(double snr_value, long long channels) {
  if (snr_value < 0 || channels < 1) throw DomainError("quantization_levels: need snr >= 0 and N_b >= 1");
  const double log_q = static_cast<double>(channels) * std::log1p(snr_value);
  // When 1 + snr is exact and the result fits the mantissa, pow avoids the rounding of exp(log).
  if ((1.0 + snr_value) - 1.0 == snr_value && log_q < 36.7) {
    return {std::max(1.0, std::floor(std::pow(1.0 + snr_value, static_cast<double>(channels)))), false};
  }
  return floor_exp(log_q);
}

double quantization_var(double sigma_x2, double snr_value, long long channels) {
  const auto q = quantization_levels(snr_value, channels);
  if (q.saturated) return 0.0;
  const double inv = 1.0 / q.value;
  return sigma_x2 * inv * inv;
}

QuantizationLimit quantization_var_limit(double sigma_x2, double power_w, double gain, int total_channels,
                                         double temperature_k, double bandwidth_hz) {
  if (bandwidth_hz <= 0) throw DomainError("quantization_var_limit: W must be positive");
  const double exponent = power_w * gain * total_channels / (kBoltzmann * temperature_k * bandwidth_hz);
  const auto q = floor_exp(exponent);
  if (q.saturated) return {0.0, true};
  const double inv = 1.0 / q.value;
  return {sigma_x2 * inv * inv, false};
}

double digital_noise_var(double sigma_v2, double sigma_q2) { return sigma_v2 + sigma_q2; }

LinkTable::LinkTable(SelectionShape shape, SourceModel model)
    : shape_(shape), model_(model), entries_(static_cast<std::size_t>(shape.size())) {}

double LinkTable::noise_var(int l, int k, int b, Scheme scheme) const {
  const auto& e = at(l, k, b);
  return scheme == Scheme::analog ? e.sigma_e2 : e.sigma_et2;
}

double LinkTable::info_weight(int l, int k, int b, Scheme scheme) const {
  const double v = noise_var(l, k, b, scheme);
  return std::isinf(v) ? 0.0 : 1.0 / v;
}

LinkTable build_link_table(const Scenario& s, SourceModel model) {
  const SelectionShape shape{s.num_locations(), s.num_types(), s.num_bandwidths()};
  LinkTable t(shape, model);

  if (model == SourceModel::dynamic_scalar) {
    if (s.num_sources() != 1) throw DomainError("build_link_table: dynamic model needs exactly one source");
    t.prior = Eigen::MatrixXd::Constant(1, 1, s.dynamic_prior.stationary_var());
  } else {
    t.prior = s.static_prior;
  }
  t.regressors = s.regressors;
  t.channel_gains = s.channel_gains;
  t.sigma_v2 = s.noise.measurement_var;
  t.sigma_phi2 = receiver_noise(s.noise.temperature_k, s.grid.channel_hz());
  t.sigma_x2.resize(shape.locations);

  const double temp = s.noise.temperature_k;
  for (int l = 0; l < shape.locations; ++l) {
    const Eigen::VectorXd h = s.regressors.row(l).transpose();
    const double sx2 = measurement_power(h, t.prior, t.sigma_v2);
    t.sigma_x2(l) = sx2;
    const double g = s.channel_gains(l);
    for (int k = 0; k < shape.types; ++k) {
      const double p = node_power(s.harvested_power(l), s.sensor_types[k]);
      for (int b = 0; b < shape.bandwidths; ++b) {
        const auto& bw = s.bandwidths[b];
        LinkEntry& e = t.at(l, k, b);
        e.channels = bw.channels;
        e.power = p;
        e.p_hat = per_channel_power(p, s.grid.interval_s, s.grid.slot_s(), bw.channels);
        e.snr = snr(p, g, temp, bw.hz);
        e.analog_snr = snr_with_copies(e.p_hat, g, t.sigma_phi2, bw.channels);
        e.levels = quantization_levels(e.snr, bw.channels);
        e.sigma_q2 = e.levels.saturated ? 0.0 : sx2 / (e.levels.value * e.levels.value);
        if (k == 0) {
          e.sigma_e2 = kInf;
          e.sigma_et2 = kInf;
        } else {
          // Averaging N_b copies divides the receiver noise by N_b.
          e.sigma_e2 = analog_noise_var(sx2, t.sigma_v2, g, e.p_hat, t.sigma_phi2 / bw.channels);
          e.sigma_et2 = digital_noise_var(t.sigma_v2, e.sigma_q2);
        }
      }
    }
  }
  return t;
}

void write_link_csv(std::ostream& out, const LinkTable& t) {
  out << "l,k,b,P,P_hat,snr,sigma_x2,sigma_e2,Q,sigma_q2,sigma_etilde2\n";
  char buf[512];
  const auto& sh = t.shape();
  for (int l = 0; l < sh.locations; ++l) {
    for (int k = 0; k < sh.types; ++k) {
      for (int b = 0; b < sh.bandwidths; ++b) {
        const auto& e = t.at(l, k, b);
        std::snprintf(buf, sizeof buf, "%d,%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", l, k, b,
                      e.power, e.p_hat, e.snr, t.sigma_x2(l), e.sigma_e2, e.levels.value, e.sigma_q2, e.sigma_et2);
        out << buf;
      }
    }
  }
}

}  // namespace sensornet
