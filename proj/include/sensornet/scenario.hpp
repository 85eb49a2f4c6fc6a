#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <vector>

namespace sensornet {

inline constexpr double kBoltzmann = 1.3807e-23;  // J/K

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(Point a, Point b);

struct SensorType {
  double cost = 0.0;            // currency units (k$ in the reference configs)
  double eh_efficiency = 0.0;   // fraction of harvested power turned into transmit power
  double battery_cap = 0.0;     // watts
};

struct BandwidthOption {
  double hz = 0.0;  // resource block w_b
  int channels = 1; // N_b
};

// Time/frequency split of the transmission interval into N = N_T * N_F channels.
struct ResourceGrid {
  double interval_s = 1.0;
  double bandwidth_hz = 1.0;
  int time_channels = 1;
  int freq_channels = 1;
  double modulation = 1.0;  // kept for documentation; every formula assumes 1

  int channels() const { return time_channels * freq_channels; }
  double slot_s() const { return interval_s / time_channels; }
  double channel_hz() const { return bandwidth_hz / freq_channels; }
};

struct Budgets {
  double cost_cap = 0.0;
  double bandwidth_cap_hz = 0.0;
  int channel_cap = 1;
};

struct BaseStation {
  Point position;
  double power_w = 0.0;
};

struct Diffusion {
  double gain = 1.0;      // beta_1
  double decay_m = 1.0;   // beta_2
  double cutoff_m = 1.0;  // beta_3
};

struct NoiseModel {
  double measurement_var = 1.0;   // sigma_v^2
  double temperature_k = 290.0;   // receiver temperature
};

struct DynamicPrior {
  double a = 0.0;
  double drive_var = 1.0;
  double initial_mean = 0.0;

  double stationary_var() const { return drive_var / (1.0 - a * a); }
};

struct Scenario {
  double field_width = 0.0;
  double field_height = 0.0;
  std::vector<Point> locations;
  std::vector<Point> sources;
  Point fc;
  std::vector<BaseStation> base_stations;
  double solar_floor_w = 0.0;
  double path_loss_exponent = 2.0;
  Diffusion diffusion;
  std::vector<SensorType> sensor_types;  // index 0 is the "no sensor" type
  std::vector<BandwidthOption> bandwidths;
  ResourceGrid grid;
  Budgets budgets;
  NoiseModel noise;
  Eigen::MatrixXd static_prior;
  DynamicPrior dynamic_prior;

  // Geometry-derived quantities, filled by finalize().
  Eigen::VectorXd channel_gains;   // g_l
  Eigen::VectorXd harvested_power; // rho_l
  Eigen::MatrixXd regressors;      // L x m, row l is h_l

  int num_locations() const { return static_cast<int>(locations.size()); }
  int num_sources() const { return static_cast<int>(sources.size()); }
  int num_types() const { return static_cast<int>(sensor_types.size()); }
  int num_bandwidths() const { return static_cast<int>(bandwidths.size()); }
};

// Throws DomainError when p_l == p_fc.
double channel_gain(Point location, Point fc, double path_loss_exponent);

double measurement_gain(Point location, Point source, const Diffusion& diffusion);

double harvested_power(Point location, const std::vector<BaseStation>& base_stations,
                       double solar_floor_w, double path_loss_exponent);

double node_power(double harvested_w, const SensorType& type);

// Checks every invariant and computes the derived geometry. Throws ConfigError.
void finalize(Scenario& scenario);

Scenario load_scenario(std::string_view json_text);
Scenario load_scenario_file(const std::string& path);
std::string serialize_scenario(const Scenario& scenario);

namespace units {
double dbm_to_w(double dbm);
double db_to_w(double dbw);
}  // namespace units

}  // namespace sensornet
