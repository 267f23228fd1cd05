#pragma once

#include <cmath>
#include <filesystem>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "irsloc/common.hpp"
#include "irsloc/waveform.hpp"

namespace irsloc {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend Vec3 operator-(const Vec3& a, const Vec3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
  friend Vec3 operator+(const Vec3& a, const Vec3& b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
  friend bool operator==(const Vec3&, const Vec3&) = default;
  double norm() const { return std::sqrt(x * x + y * y + z * z); }
  bool finite() const { return std::isfinite(x) && std::isfinite(y) && std::isfinite(z); }
};

/// Carrier wavelength used when a config does not specify one.
inline constexpr double kDefaultWavelength = 3.0;

/// Everything needed to define one experiment. All quantities in SI units.
struct ScenarioConfig {
  Vec3 q_bs{0.0, 0.0, 0.0};
  Vec3 q_irs{-10.0, 50.0, 2.0};
  Vec3 q_target{5.0, 60.0, 0.0};
  int n_bs = 6;
  int n_sensors = 6;
  int n_reflectors = 50;
  int n_frames = 6;
  double wavelength = 0.0;       // m
  double rcs = 0.0;              // m^2
  double tx_power = 0.0;         // W
  double noise_psd = 0.0;        // W/Hz
  double speed_of_light = kSpeedOfLight;
  ChirpSpec waveform{};

  /// Parameter set of the reference numerical study (geometry, element
  /// counts, 7 dBsm RCS, 40 dBm, -150 dBm/Hz, 1.5 MHz chirp, 64 samples).
  static ScenarioConfig defaults();

  /// Throws ConfigError on any violated invariant.
  void validate() const;
};

struct DerivedGeometry {
  double d_b2i = 0.0;
  double d_i2u = 0.0;
  double mu_b2i_aoa = 0.0;  // at the IRS, from the BS
  double mu_b2i_aod = 0.0;  // at the BS, towards the IRS
  double mu_i2u = 0.0;      // at the IRS, towards the target
  double tau_b2i = 0.0;
  double tau_i2u = 0.0;
  double tau_tot = 0.0;
  double beta_b2i = 0.0;
  double beta_i2s = 0.0;
};

/// Throws DegenerateGeometryError when the IRS coincides with the BS or the target.
DerivedGeometry derive_geometry(const ScenarioConfig& config);

/// d u_channel / d u_position. Rows: (tau_tot, mu_i2u, beta_re, beta_im);
/// columns: (x_u, y_u, beta_re, beta_im).
struct ChannelJacobian {
  Eigen::Matrix4d matrix = Eigen::Matrix4d::Identity();
};

ChannelJacobian channel_jacobian(const ScenarioConfig& config, const DerivedGeometry& geom);

void to_json(nlohmann::json& j, const Vec3& v);
void from_json(const nlohmann::json& j, Vec3& v);
void to_json(nlohmann::json& j, const ChirpSpec& c);
void from_json(const nlohmann::json& j, ChirpSpec& c);
void to_json(nlohmann::json& j, const ScenarioConfig& c);
/// Missing keys fall back to ScenarioConfig::defaults(). Besides the SI
/// fields, the convenience keys tx_power_dbm, noise_psd_dbm_hz and rcs_dbsm
/// are accepted. Validates the result.
void from_json(const nlohmann::json& j, ScenarioConfig& c);
void to_json(nlohmann::json& j, const DerivedGeometry& g);

ScenarioConfig load_scenario(const std::filesystem::path& path);

}  // namespace irsloc
