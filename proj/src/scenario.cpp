#include "sensornet/scenario.hpp"

#include "sensornet/error.hpp"

#include <json.hpp>

#include <cmath>
#include <fstream>
#include <sstream>

namespace sensornet {

using Json = nlohmann::json;

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

double channel_gain(Point location, Point fc, double path_loss_exponent) {
  const double d = distance(location, fc);
  if (d == 0.0) {
    throw DomainError("channel_gain: location coincides with the fusion center");
  }
  return std::pow(d, -path_loss_exponent);
}

double measurement_gain(Point location, Point source, const Diffusion& diffusion) {
  const double d = distance(location, source);
  if (d > diffusion.cutoff_m) return 0.0;
  return diffusion.gain * std::exp(-d / diffusion.decay_m);
}

double harvested_power(Point location, const std::vector<BaseStation>& base_stations,
                       double solar_floor_w, double path_loss_exponent) {
  double rho = solar_floor_w;
  for (const auto& bs : base_stations) {
    const double d = distance(location, bs.position);
    if (d == 0.0) {
      throw DomainError("harvested_power: location coincides with a base station");
    }
    rho += bs.power_w * std::pow(d, -path_loss_exponent);
  }
  return rho;
}

double node_power(double harvested_w, const SensorType& type) {
  return std::min(harvested_w * type.eh_efficiency, type.battery_cap);
}

namespace units {
double dbm_to_w(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double db_to_w(double dbw) { return std::pow(10.0, dbw / 10.0); }
}  // namespace units

namespace {

void require(bool ok, const std::string& field, const std::string& message) {
  if (!ok) throw ConfigError(field, message);
}

bool is_spd(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols() || m.rows() == 0) return false;
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) return false;
  Eigen::LLT<Eigen::MatrixXd> llt(m);
  return llt.info() == Eigen::Success;
}

}  // namespace

void finalize(Scenario& s) {
  require(s.field_width > 0 && s.field_height > 0, "field", "width and height must be positive");
  require(!s.locations.empty(), "locations", "at least one candidate location is required");
  require(!s.sources.empty(), "sources", "at least one source is required");
  require(s.path_loss_exponent > 0, "propagation.path_loss_exponent", "must be positive");
  require(s.diffusion.gain > 0, "propagation.diffusion.gain", "must be positive");
  require(s.diffusion.decay_m > 0, "propagation.diffusion.decay_m", "must be positive");
  require(s.diffusion.cutoff_m > 0, "propagation.diffusion.cutoff_m", "must be positive");
  require(s.solar_floor_w >= 0, "propagation.solar_floor", "must be nonnegative");
  for (std::size_t i = 0; i < s.base_stations.size(); ++i) {
    require(s.base_stations[i].power_w >= 0, "base_stations[" + std::to_string(i) + "].power",
            "must be nonnegative");
  }

  require(!s.sensor_types.empty(), "sensor_types", "the auxiliary type t0 must be listed first");
  const auto& aux = s.sensor_types.front();
  require(aux.cost == 0 && aux.eh_efficiency == 0 && aux.battery_cap == 0, "sensor_types[0]",
          "auxiliary type must have zero cost, efficiency and capacity");
  for (std::size_t k = 0; k < s.sensor_types.size(); ++k) {
    const auto& t = s.sensor_types[k];
    const std::string f = "sensor_types[" + std::to_string(k) + "]";
    require(t.cost >= 0, f + ".cost", "must be nonnegative");
    require(t.eh_efficiency >= 0 && t.eh_efficiency <= 1, f + ".efficiency", "must lie in [0,1]");
    require(t.battery_cap >= 0, f + ".capacity", "must be nonnegative");
  }

  const auto& g = s.grid;
  require(g.interval_s > 0, "grid.interval_s", "must be positive");
  require(g.bandwidth_hz > 0, "grid.bandwidth_hz", "must be positive");
  require(g.time_channels >= 1, "grid.time_channels", "must be >= 1");
  require(g.freq_channels >= 1, "grid.freq_channels", "must be >= 1");
  require(g.modulation > 0, "grid.modulation", "must be positive");

  require(!s.bandwidths.empty(), "bandwidths", "at least one bandwidth option is required");
  for (std::size_t b = 0; b < s.bandwidths.size(); ++b) {
    const auto& opt = s.bandwidths[b];
    const std::string f = "bandwidths[" + std::to_string(b) + "]";
    require(opt.hz > 0, f + ".hz", "must be positive");
    require(opt.channels >= 1, f + ".channels", "must be an integer >= 1");
    const double expected = g.bandwidth_hz * opt.channels / g.channels();
    require(std::abs(expected - opt.hz) <= 1e-9 * expected, f,
            "hz must equal W * channels / N for the configured grid");
  }

  require(s.budgets.cost_cap >= 0, "budgets.cost", "must be nonnegative");
  require(s.budgets.bandwidth_cap_hz > 0, "budgets.bandwidth_hz", "must be positive");
  require(s.budgets.channel_cap >= 1, "budgets.channels", "must be >= 1");

  require(s.noise.measurement_var > 0, "noise.measurement_var", "must be positive");
  require(s.noise.temperature_k > 0, "noise.temperature_k", "must be positive");

  const int m = s.num_sources();
  require(s.static_prior.rows() == m && s.static_prior.cols() == m, "static_prior",
          "must be an m x m matrix with m = number of sources");
  require(is_spd(s.static_prior), "static_prior", "must be symmetric positive definite");

  require(std::abs(s.dynamic_prior.a) < 1.0, "dynamic_prior.a", "|a| must be < 1");
  require(s.dynamic_prior.drive_var > 0, "dynamic_prior.drive_var", "must be positive");

  const int L = s.num_locations();
  s.channel_gains.resize(L);
  s.harvested_power.resize(L);
  s.regressors.resize(L, m);
  for (int l = 0; l < L; ++l) {
    const std::string f = "locations[" + std::to_string(l) + "]";
    try {
      s.channel_gains(l) = channel_gain(s.locations[l], s.fc, s.path_loss_exponent);
      s.harvested_power(l) =
          harvested_power(s.locations[l], s.base_stations, s.solar_floor_w, s.path_loss_exponent);
    } catch (const DomainError& e) {
      throw ConfigError(f, e.what());
    }
    for (int j = 0; j < m; ++j) {
      s.regressors(l, j) = measurement_gain(s.locations[l], s.sources[j], s.diffusion);
    }
  }
}

// ---------------------------------------------------------------------------
// JSON reading

namespace {

struct Reader {
  const Json& at(const Json& obj, const std::string& key, const std::string& path) {
    if (!obj.is_object() || !obj.contains(key)) throw ConfigError(path + key, "missing");
    return obj.at(key);
  }

  double number(const Json& j, const std::string& path) {
    if (!j.is_number()) throw ConfigError(path, "expected a number");
    return j.get<double>();
  }

  int integer(const Json& j, const std::string& path) {
    if (!j.is_number_integer() && !(j.is_number() && std::floor(j.get<double>()) == j.get<double>())) {
      throw ConfigError(path, "expected an integer");
    }
    return static_cast<int>(j.get<double>());
  }

  // {"dbm": x} | {"db": x} (dBW) | {"w": x} | bare number (watts)
  double power(const Json& j, const std::string& path) {
    if (j.is_number()) return j.get<double>();
    if (!j.is_object() || j.size() != 1) {
      throw ConfigError(path, "power must be {\"dbm\": x}, {\"db\": x} or {\"w\": x}");
    }
    const auto it = j.begin();
    const std::string unit = it.key();
    const double v = number(it.value(), path + "." + unit);
    if (unit == "w") return v;
    if (unit == "dbm") return units::dbm_to_w(v);
    if (unit == "db") return units::db_to_w(v);
    throw ConfigError(path, "unknown power unit '" + unit + "'");
  }

  Point point(const Json& j, const std::string& path) {
    if (j.is_array() && j.size() == 2) return {number(j[0], path + "[0]"), number(j[1], path + "[1]")};
    if (j.is_object() && j.contains("x") && j.contains("y")) {
      return {number(j["x"], path + ".x"), number(j["y"], path + ".y")};
    }
    throw ConfigError(path, "expected a point [x, y]");
  }

  std::vector<Point> points(const Json& j, const std::string& path) {
    if (!j.is_array()) throw ConfigError(path, "expected a list of points");
    std::vector<Point> out;
    for (std::size_t i = 0; i < j.size(); ++i) out.push_back(point(j[i], path + "[" + std::to_string(i) + "]"));
    return out;
  }

  Eigen::MatrixXd matrix(const Json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw ConfigError(path, "expected a nonempty list of rows");
    const auto n = static_cast<Eigen::Index>(j.size());
    Eigen::MatrixXd out(n, n);
    for (Eigen::Index r = 0; r < n; ++r) {
      const auto& row = j[r];
      if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
        throw ConfigError(path, "matrix must be square");
      }
      for (Eigen::Index c = 0; c < n; ++c) {
        out(r, c) = number(row[c], path + "[" + std::to_string(r) + "][" + std::to_string(c) + "]");
      }
    }
    return out;
  }
};

std::vector<Point> grid_locations(double width, double height, int nx, int ny) {
  std::vector<Point> out;
  for (int iy = 0; iy < ny; ++iy) {
    for (int ix = 0; ix < nx; ++ix) {
      out.push_back({width * (ix + 0.5) / nx, height * (iy + 0.5) / ny});
    }
  }
  return out;
}

std::string line_context(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

Scenario load_scenario(std::string_view json_text) {
  Json doc;
  try {
    doc = Json::parse(json_text.begin(), json_text.end());
  } catch (const Json::parse_error& e) {
    throw ConfigError("", "parse error at " + line_context(json_text, e.byte) + ": " + e.what());
  }
  if (!doc.is_object()) throw ConfigError("", "scenario document must be a JSON object");

  Reader r;
  Scenario s;

  const auto& field = r.at(doc, "field", "");
  s.field_width = r.number(r.at(field, "width", "field."), "field.width");
  s.field_height = r.number(r.at(field, "height", "field."), "field.height");

  const auto& locs = r.at(doc, "locations", "");
  if (locs.is_object() && locs.contains("grid")) {
    const auto& dims = locs["grid"];
    if (!dims.is_array() || dims.size() != 2) throw ConfigError("locations.grid", "expected [nx, ny]");
    const int nx = r.integer(dims[0], "locations.grid[0]");
    const int ny = r.integer(dims[1], "locations.grid[1]");
    if (nx < 1 || ny < 1) throw ConfigError("locations.grid", "grid dimensions must be >= 1");
    s.locations = grid_locations(s.field_width, s.field_height, nx, ny);
  } else {
    s.locations = r.points(locs, "locations");
  }
  s.sources = r.points(r.at(doc, "sources", ""), "sources");
  s.fc = r.point(r.at(doc, "fc", ""), "fc");

  const auto& bss = r.at(doc, "base_stations", "");
  if (!bss.is_array()) throw ConfigError("base_stations", "expected a list");
  for (std::size_t i = 0; i < bss.size(); ++i) {
    const std::string p = "base_stations[" + std::to_string(i) + "].";
    s.base_stations.push_back({r.point(r.at(bss[i], "position", p), p + "position"),
                               r.power(r.at(bss[i], "power", p), p + "power")});
  }

  const auto& prop = r.at(doc, "propagation", "");
  s.path_loss_exponent =
      r.number(r.at(prop, "path_loss_exponent", "propagation."), "propagation.path_loss_exponent");
  s.solar_floor_w = prop.contains("solar_floor") ? r.power(prop["solar_floor"], "propagation.solar_floor") : 0.0;
  const auto& diff = r.at(prop, "diffusion", "propagation.");
  s.diffusion.gain = r.number(r.at(diff, "gain", "propagation.diffusion."), "propagation.diffusion.gain");
  s.diffusion.decay_m = r.number(r.at(diff, "decay_m", "propagation.diffusion."), "propagation.diffusion.decay_m");
  s.diffusion.cutoff_m =
      r.number(r.at(diff, "cutoff_m", "propagation.diffusion."), "propagation.diffusion.cutoff_m");

  const auto& grid = r.at(doc, "grid", "");
  s.grid.interval_s = r.number(r.at(grid, "interval_s", "grid."), "grid.interval_s");
  s.grid.bandwidth_hz = r.number(r.at(grid, "bandwidth_hz", "grid."), "grid.bandwidth_hz");
  s.grid.time_channels = r.integer(r.at(grid, "time_channels", "grid."), "grid.time_channels");
  s.grid.freq_channels = r.integer(r.at(grid, "freq_channels", "grid."), "grid.freq_channels");
  if (grid.contains("modulation")) s.grid.modulation = r.number(grid["modulation"], "grid.modulation");

  const auto& types = r.at(doc, "sensor_types", "");
  if (!types.is_array()) throw ConfigError("sensor_types", "expected a list");
  for (std::size_t k = 0; k < types.size(); ++k) {
    const std::string p = "sensor_types[" + std::to_string(k) + "].";
    s.sensor_types.push_back({r.number(r.at(types[k], "cost", p), p + "cost"),
                              r.number(r.at(types[k], "efficiency", p), p + "efficiency"),
                              r.power(r.at(types[k], "capacity", p), p + "capacity")});
  }

  const auto& bws = r.at(doc, "bandwidths", "");
  if (!bws.is_array()) throw ConfigError("bandwidths", "expected a list");
  for (std::size_t b = 0; b < bws.size(); ++b) {
    const std::string p = "bandwidths[" + std::to_string(b) + "].";
    BandwidthOption opt;
    opt.hz = r.number(r.at(bws[b], "hz", p), p + "hz");
    if (bws[b].contains("channels")) {
      opt.channels = r.integer(bws[b]["channels"], p + "channels");
    } else {
      const double n = opt.hz * s.grid.channels() / s.grid.bandwidth_hz;
      if (std::abs(n - std::round(n)) > 1e-9 * std::max(1.0, n)) {
        throw ConfigError(p + "channels", "hz does not correspond to an integer channel count");
      }
      opt.channels = static_cast<int>(std::round(n));
    }
    s.bandwidths.push_back(opt);
  }

  s.budgets.bandwidth_cap_hz = s.grid.bandwidth_hz;
  s.budgets.channel_cap = s.grid.channels();
  const auto& budgets = r.at(doc, "budgets", "");
  s.budgets.cost_cap = r.number(r.at(budgets, "cost", "budgets."), "budgets.cost");
  if (budgets.contains("bandwidth_hz")) {
    s.budgets.bandwidth_cap_hz = r.number(budgets["bandwidth_hz"], "budgets.bandwidth_hz");
  }
  if (budgets.contains("channels")) s.budgets.channel_cap = r.integer(budgets["channels"], "budgets.channels");

  const auto& noise = r.at(doc, "noise", "");
  s.noise.measurement_var = r.number(r.at(noise, "measurement_var", "noise."), "noise.measurement_var");
  if (noise.contains("temperature_k") && noise.contains("receiver_noise")) {
    throw ConfigError("noise", "give either temperature_k or receiver_noise, not both");
  }
  if (noise.contains("temperature_k")) {
    s.noise.temperature_k = r.number(noise["temperature_k"], "noise.temperature_k");
  } else if (noise.contains("receiver_noise")) {
    // Receiver noise power per channel w_0; fold it into an equivalent temperature.
    const double sigma_phi2 = r.power(noise["receiver_noise"], "noise.receiver_noise");
    s.noise.temperature_k = sigma_phi2 / (kBoltzmann * s.grid.channel_hz());
  }

  const auto& prior = r.at(doc, "static_prior", "");
  const int m = static_cast<int>(s.sources.size());
  if (prior.is_object() && prior.contains("scaled_identity")) {
    s.static_prior = r.number(prior["scaled_identity"], "static_prior.scaled_identity") *
                     Eigen::MatrixXd::Identity(m, m);
  } else if (prior.is_object() && prior.contains("diagonal")) {
    const auto& d = prior["diagonal"];
    if (!d.is_array()) throw ConfigError("static_prior.diagonal", "expected a list");
    s.static_prior = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(d.size()), static_cast<Eigen::Index>(d.size()));
    for (std::size_t i = 0; i < d.size(); ++i) {
      s.static_prior(i, i) = r.number(d[i], "static_prior.diagonal[" + std::to_string(i) + "]");
    }
  } else if (prior.is_object() && prior.contains("matrix")) {
    s.static_prior = r.matrix(prior["matrix"], "static_prior.matrix");
  } else {
    throw ConfigError("static_prior", "expected {\"scaled_identity\"|\"diagonal\"|\"matrix\": ...}");
  }

  const auto& dyn = r.at(doc, "dynamic_prior", "");
  s.dynamic_prior.a = r.number(r.at(dyn, "a", "dynamic_prior."), "dynamic_prior.a");
  s.dynamic_prior.drive_var = r.number(r.at(dyn, "drive_var", "dynamic_prior."), "dynamic_prior.drive_var");
  if (dyn.contains("initial_mean")) {
    s.dynamic_prior.initial_mean = r.number(dyn["initial_mean"], "dynamic_prior.initial_mean");
  }

  finalize(s);
  return s;
}

Scenario load_scenario_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot open scenario file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return load_scenario(buf.str());
}

std::string serialize_scenario(const Scenario& s) {
  auto pt = [](Point p) { return nlohmann::ordered_json::array({p.x, p.y}); };
  nlohmann::ordered_json doc;
  doc["field"] = {{"width", s.field_width}, {"height", s.field_height}};
  doc["locations"] = Json::array();
  for (const auto& p : s.locations) doc["locations"].push_back(pt(p));
  doc["sources"] = Json::array();
  for (const auto& p : s.sources) doc["sources"].push_back(pt(p));
  doc["fc"] = pt(s.fc);
  doc["base_stations"] = Json::array();
  for (const auto& bs : s.base_stations) {
    nlohmann::ordered_json j;
    j["position"] = pt(bs.position);
    j["power"] = {{"w", bs.power_w}};
    doc["base_stations"].push_back(j);
  }
  nlohmann::ordered_json prop;
  prop["path_loss_exponent"] = s.path_loss_exponent;
  prop["solar_floor"] = {{"w", s.solar_floor_w}};
  prop["diffusion"] = {{"gain", s.diffusion.gain}, {"decay_m", s.diffusion.decay_m}, {"cutoff_m", s.diffusion.cutoff_m}};
  doc["propagation"] = prop;
  doc["sensor_types"] = Json::array();
  for (const auto& t : s.sensor_types) {
    nlohmann::ordered_json j;
    j["cost"] = t.cost;
    j["efficiency"] = t.eh_efficiency;
    j["capacity"] = {{"w", t.battery_cap}};
    doc["sensor_types"].push_back(j);
  }
  doc["bandwidths"] = Json::array();
  for (const auto& b : s.bandwidths) {
    nlohmann::ordered_json j;
    j["hz"] = b.hz;
    j["channels"] = b.channels;
    doc["bandwidths"].push_back(j);
  }
  nlohmann::ordered_json grid;
  grid["interval_s"] = s.grid.interval_s;
  grid["bandwidth_hz"] = s.grid.bandwidth_hz;
  grid["time_channels"] = s.grid.time_channels;
  grid["freq_channels"] = s.grid.freq_channels;
  grid["modulation"] = s.grid.modulation;
  doc["grid"] = grid;
  nlohmann::ordered_json budgets;
  budgets["cost"] = s.budgets.cost_cap;
  budgets["bandwidth_hz"] = s.budgets.bandwidth_cap_hz;
  budgets["channels"] = s.budgets.channel_cap;
  doc["budgets"] = budgets;
  nlohmann::ordered_json noise;
  noise["measurement_var"] = s.noise.measurement_var;
  noise["temperature_k"] = s.noise.temperature_k;
  doc["noise"] = noise;
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < s.static_prior.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index j = 0; j < s.static_prior.cols(); ++j) row.push_back(s.static_prior(i, j));
    rows.push_back(row);
  }
  doc["static_prior"] = {{"matrix", rows}};
  nlohmann::ordered_json dyn;
  dyn["a"] = s.dynamic_prior.a;
  dyn["drive_var"] = s.dynamic_prior.drive_var;
  dyn["initial_mean"] = s.dynamic_prior.initial_mean;
  doc["dynamic_prior"] = dyn;
  return doc.dump(2);
}

}  // namespace sensornet
