#pragma once

#include "sensornet/scenario.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <string>

namespace testkit {

struct RandomSpec {
  int locations = 6;
  int types = 2;       // K, excluding the empty type
  int bandwidths = 2;  // B
  int sources = 2;
  bool dynamic = false;
};

// Small random deployment on a 100 m square with 1 kHz channels and -60 dBm receiver noise.
inline sensornet::Scenario random_scenario(std::mt19937_64& rng, const RandomSpec& spec) {
  using namespace sensornet;
  std::uniform_real_distribution<double> pos(5.0, 100.0);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  Scenario s;
  s.field_width = 100.0;
  s.field_height = 100.0;
  s.fc = {0.0, 0.0};
  for (int l = 0; l < spec.locations; ++l) s.locations.push_back({pos(rng), pos(rng)});
  const int m = spec.dynamic ? 1 : spec.sources;
  for (int j = 0; j < m; ++j) s.sources.push_back({pos(rng), pos(rng)});
  s.base_stations.push_back({{-20.0, 50.0}, 1.0});
  s.base_stations.push_back({{120.0, 60.0}, 1.0});
  s.solar_floor_w = 1e-4;
  s.path_loss_exponent = 2.0;
  s.diffusion = {10.0, 40.0 + 60.0 * u01(rng), 150.0};

  s.sensor_types.push_back({});
  for (int k = 1; k <= spec.types; ++k) {
    s.sensor_types.push_back({static_cast<double>(k) + std::floor(2.0 * u01(rng)), 0.2 + 0.7 * u01(rng),
                              1e-4 + 9e-4 * u01(rng)});
  }

  s.grid = {1e-3, 1e6, 1, 1000, 1.0};
  std::uniform_int_distribution<int> nb(5, 60);
  for (int b = 0; b < spec.bandwidths; ++b) {
    const int n = nb(rng);
    s.bandwidths.push_back({1e3 * n, n});
  }

  const double total_cost = spec.locations * s.sensor_types.back().cost;
  s.budgets.cost_cap = std::round((0.2 + 0.5 * u01(rng)) * total_cost);
  s.budgets.channel_cap = std::max(1, static_cast<int>(std::round((0.3 + 0.6 * u01(rng)) * spec.locations)));
  s.budgets.bandwidth_cap_hz = (0.3 + 0.6 * u01(rng)) * spec.locations * 40e3;

  s.noise.measurement_var = 0.5 + u01(rng);
  s.noise.temperature_k = 1e-9 / (kBoltzmann * s.grid.channel_hz());

  Eigen::MatrixXd a(m, m);
  for (int i = 0; i < a.size(); ++i) a.data()[i] = 2.0 * u01(rng) - 1.0;
  s.static_prior = a * a.transpose() * 0.2 + Eigen::MatrixXd::Identity(m, m);
  s.dynamic_prior = {0.3 + 0.65 * u01(rng), 0.5 + 5.0 * u01(rng), 0.0};
  finalize(s);
  return s;
}

inline double rel_diff(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

inline std::string data_path(const std::string& name) { return std::string(SENSORNET_DATA_DIR) + "/" + name; }

}  // namespace testkit
