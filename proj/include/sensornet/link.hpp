#pragma once

#include "sensornet/scenario.hpp"
#include "sensornet/selection.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <vector>

namespace sensornet {

enum class Scheme { analog, digital };
enum class SourceModel { static_vector, dynamic_scalar };

const char* to_string(Scheme scheme);

// ---- per-link physics ------------------------------------------------------

// Transmit power per channel when the energy P*T is split over N_b channels of length tau_0.
double per_channel_power(double power_w, double interval_s, double slot_s, int channels);

double receiver_noise(double temperature_k, double channel_hz);

double snr(double power_w, double gain, double temperature_k, double bandwidth_hz);

// Same SNR routed through the resource-grid quantities (P_hat over kappa*Delta*w_0).
double snr_via_grid(double power_w, double gain, double temperature_k, const ResourceGrid& grid, int channels);

// SNR after averaging n identical analog copies, each received with power p_hat.
double snr_with_copies(double p_hat, double gain, double sigma_phi2, int copies);

double measurement_power(const Eigen::VectorXd& h, const Eigen::MatrixXd& prior, double sigma_v2);

// Equivalent analog noise; +inf when g * p_hat == 0 (no sensor).
double analog_noise_var(double sigma_x2, double sigma_v2, double gain, double p_hat, double sigma_phi2);
double analog_noise_var(const Eigen::VectorXd& h, const Eigen::MatrixXd& prior, double sigma_v2, double gain,
                        double p_hat, double sigma_phi2);

struct QuantizerLevels {
  double value = 1.0;      // floor((1+snr)^N_b); exact for value < 2^53
  bool saturated = false;  // too many levels to represent: distortion treated as 0
};

QuantizerLevels quantization_levels(double snr, long long channels);

double quantization_var(double sigma_x2, double snr, long long channels);

struct QuantizationLimit {
  double value = 0.0;
  bool saturated = false;
};

// Distortion floor as w_b -> infinity at fixed total resources.
QuantizationLimit quantization_var_limit(double sigma_x2, double power_w, double gain, int total_channels,
                                         double temperature_k, double bandwidth_hz);

double digital_noise_var(double sigma_v2, double sigma_q2);

// ---- table -----------------------------------------------------------------

struct LinkEntry {
  int channels = 1;           // N_b of the bandwidth column
  double power = 0.0;         // P_{l,k}
  double p_hat = 0.0;         // P_hat_{l,k,b} with the catalog channel count N_b
  double snr = 0.0;           // per-channel SNR at bandwidth w_b
  double analog_snr = 0.0;    // post-averaging analog SNR (independent of N_b)
  double sigma_e2 = 0.0;      // analog equivalent noise, +inf for k = 0
  QuantizerLevels levels;
  double sigma_q2 = 0.0;
  double sigma_et2 = 0.0;     // digital equivalent noise, +inf for k = 0
};

class LinkTable {
 public:
  LinkTable() = default;
  LinkTable(SelectionShape shape, SourceModel model);

  const SelectionShape& shape() const { return shape_; }
  SourceModel model() const { return model_; }

  LinkEntry& at(int l, int k, int b) { return entries_[shape_.index(l, k, b)]; }
  const LinkEntry& at(int l, int k, int b) const { return entries_[shape_.index(l, k, b)]; }

  // sigma_e^2 (analog) or sigma_etilde^2 (digital); +inf marks "no sensor".
  double noise_var(int l, int k, int b, Scheme scheme) const;
  // 1 / noise_var, exactly 0 for the no-sensor sentinel.
  double info_weight(int l, int k, int b, Scheme scheme) const;

  Eigen::MatrixXd prior;          // Sigma_theta, or [sigma_u^2/(1-a^2)] for the dynamic model
  Eigen::MatrixXd regressors;     // L x m
  Eigen::VectorXd channel_gains;  // g_l
  Eigen::VectorXd sigma_x2;       // per location
  double sigma_v2 = 0.0;
  double sigma_phi2 = 0.0;

 private:
  SelectionShape shape_;
  SourceModel model_ = SourceModel::static_vector;
  std::vector<LinkEntry> entries_;
};

LinkTable build_link_table(const Scenario& scenario, SourceModel model = SourceModel::static_vector);

// CSV debug dump: l,k,b,P,P_hat,snr,sigma_x2,sigma_e2,Q,sigma_q2,sigma_etilde2
void write_link_csv(std::ostream& out, const LinkTable& table);

}  // namespace sensornet
