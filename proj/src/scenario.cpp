#include "irsloc/scenario.hpp"

#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

namespace irsloc {

ScenarioConfig ScenarioConfig::defaults() {
  ScenarioConfig c;
  c.wavelength = kDefaultWavelength;
  c.rcs = db_to_linear(7.0);
  c.tx_power = dbm_to_watts(40.0);
  c.noise_psd = dbm_to_watts(-150.0);
  return c;
}

void ScenarioConfig::validate() const {
  if (!q_bs.finite() || !q_irs.finite() || !q_target.finite()) throw ConfigError("coordinates must be finite");
  if (q_target.z != 0.0) throw ConfigError("target must lie in the z = 0 plane");
  if (n_bs < 1 || n_sensors < 1 || n_reflectors < 1 || n_frames < 1) {
    throw ConfigError("n_bs, n_sensors, n_reflectors and n_frames must all be >= 1");
  }
  if (!(wavelength > 0.0)) throw ConfigError("wavelength must be positive");
  if (!(rcs > 0.0)) throw ConfigError("rcs must be positive");
  if (!(tx_power > 0.0)) throw ConfigError("tx_power must be positive");
  if (!(noise_psd > 0.0)) throw ConfigError("noise_psd must be positive");
  if (!(speed_of_light > 0.0)) throw ConfigError("speed_of_light must be positive");
  waveform.validate();
}

DerivedGeometry derive_geometry(const ScenarioConfig& config) {
  const Vec3 b2i = config.q_irs - config.q_bs;
  const Vec3 i2u = config.q_target - config.q_irs;
  DerivedGeometry g;
  g.d_b2i = b2i.norm();
  g.d_i2u = i2u.norm();
  if (!(g.d_b2i > 0.0)) throw DegenerateGeometryError("IRS and BS coincide");
  if (!(g.d_i2u > 0.0)) throw DegenerateGeometryError("IRS and target coincide");

  // Direction cosines against the y axis (BS array axis and IRS array axis),
  // signed as (array coordinate - remote coordinate) / distance.
  g.mu_i2u = (config.q_irs.y - config.q_target.y) / g.d_i2u;
  g.mu_b2i_aoa = (config.q_irs.y - config.q_bs.y) / g.d_b2i;
  g.mu_b2i_aod = (config.q_bs.y - config.q_irs.y) / g.d_b2i;

  const double c = config.speed_of_light;
  g.tau_b2i = g.d_b2i / c;
  g.tau_i2u = g.d_i2u / c;
  g.tau_tot = g.tau_b2i + 2.0 * g.tau_i2u;

  const double lambda = config.wavelength;
  g.beta_b2i = std::sqrt(lambda * lambda / (16.0 * kPi * kPi * g.d_b2i * g.d_b2i));
  g.beta_i2s = std::sqrt(lambda * lambda * config.rcs / (64.0 * kPi * kPi * kPi * std::pow(g.d_i2u, 4)));
  return g;
}

ChannelJacobian channel_jacobian(const ScenarioConfig& config, const DerivedGeometry& geom) {
  const double d = geom.d_i2u;
  if (!(d > 0.0)) throw DegenerateGeometryError("IRS and target coincide");
  const double dx = config.q_target.x - config.q_irs.x;
  const double dy = config.q_target.y - config.q_irs.y;
  const double c = config.speed_of_light;
  const double d3 = d * d * d;

  ChannelJacobian j;
  j.matrix.setZero();
  j.matrix(0, 0) = 2.0 * dx / (c * d);
  j.matrix(0, 1) = 2.0 * dy / (c * d);
  // mu = -dy / d
  j.matrix(1, 0) = dy * dx / d3;
  j.matrix(1, 1) = -1.0 / d + dy * dy / d3;
  j.matrix(2, 2) = 1.0;
  j.matrix(3, 3) = 1.0;
  return j;
}

void to_json(nlohmann::json& j, const Vec3& v) { j = nlohmann::json::array({v.x, v.y, v.z}); }

void from_json(const nlohmann::json& j, Vec3& v) {
  if (j.is_array()) {
    if (j.size() != 3) throw ConfigError("coordinate arrays need exactly 3 entries");
    v = {j[0].get<double>(), j[1].get<double>(), j[2].get<double>()};
  } else {
    v = {j.at("x").get<double>(), j.at("y").get<double>(), j.value("z", 0.0)};
  }
}

void to_json(nlohmann::json& j, const ChirpSpec& c) {
  j = {{"bandwidth", c.bandwidth},
       {"freq_rate", c.freq_rate},
       {"kind", std::string(to_string(c.kind))},
       {"n_samples", c.n_samples}};
}

void from_json(const nlohmann::json& j, ChirpSpec& c) {
  c = ChirpSpec{};
  if (j.contains("bandwidth")) c.bandwidth = j["bandwidth"].get<double>();
  if (j.contains("freq_rate")) c.freq_rate = j["freq_rate"].get<double>();
  if (j.contains("kind")) c.kind = chirp_kind_from_string(j["kind"].get<std::string>());
  if (j.contains("n_samples")) c.n_samples = j["n_samples"].get<int>();
}

void to_json(nlohmann::json& j, const ScenarioConfig& c) {
  j = {{"q_bs", c.q_bs},
       {"q_irs", c.q_irs},
       {"q_target", c.q_target},
       {"n_bs", c.n_bs},
       {"n_sensors", c.n_sensors},
       {"n_reflectors", c.n_reflectors},
       {"n_frames", c.n_frames},
       {"wavelength", c.wavelength},
       {"rcs", c.rcs},
       {"tx_power", c.tx_power},
       {"noise_psd", c.noise_psd},
       {"speed_of_light", c.speed_of_light},
       {"waveform", c.waveform}};
}

void from_json(const nlohmann::json& j, ScenarioConfig& c) {
  try {
    c = ScenarioConfig::defaults();
    if (j.contains("q_bs")) c.q_bs = j["q_bs"].get<Vec3>();
    if (j.contains("q_irs")) c.q_irs = j["q_irs"].get<Vec3>();
    if (j.contains("q_target")) c.q_target = j["q_target"].get<Vec3>();
    if (j.contains("n_bs")) c.n_bs = j["n_bs"].get<int>();
    if (j.contains("n_sensors")) c.n_sensors = j["n_sensors"].get<int>();
    if (j.contains("n_reflectors")) c.n_reflectors = j["n_reflectors"].get<int>();
    if (j.contains("n_frames")) c.n_frames = j["n_frames"].get<int>();
    if (j.contains("wavelength")) c.wavelength = j["wavelength"].get<double>();
    if (j.contains("rcs")) c.rcs = j["rcs"].get<double>();
    if (j.contains("rcs_dbsm")) c.rcs = db_to_linear(j["rcs_dbsm"].get<double>());
    if (j.contains("tx_power")) c.tx_power = j["tx_power"].get<double>();
    if (j.contains("tx_power_dbm")) c.tx_power = dbm_to_watts(j["tx_power_dbm"].get<double>());
    if (j.contains("noise_psd")) c.noise_psd = j["noise_psd"].get<double>();
    if (j.contains("noise_psd_dbm_hz")) c.noise_psd = dbm_to_watts(j["noise_psd_dbm_hz"].get<double>());
    if (j.contains("speed_of_light")) c.speed_of_light = j["speed_of_light"].get<double>();
    if (j.contains("waveform")) c.waveform = j["waveform"].get<ChirpSpec>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed scenario: ") + e.what());
  }
  c.validate();
}

void to_json(nlohmann::json& j, const DerivedGeometry& g) {
  j = {{"d_b2i", g.d_b2i},           {"d_i2u", g.d_i2u},     {"mu_b2i_aoa", g.mu_b2i_aoa},
       {"mu_b2i_aod", g.mu_b2i_aod}, {"mu_i2u", g.mu_i2u},   {"tau_b2i", g.tau_b2i},
       {"tau_i2u", g.tau_i2u},       {"tau_tot", g.tau_tot}, {"beta_b2i", g.beta_b2i},
       {"beta_i2s", g.beta_i2s}};
}

ScenarioConfig load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  // The config may be the scenario itself or wrap it under "scenario".
  if (j.contains("scenario")) return j["scenario"].get<ScenarioConfig>();
  return j.get<ScenarioConfig>();
}

}  // namespace irsloc
