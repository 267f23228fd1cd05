#include <gtest/gtest.h>

#include <random>

#include <nlohmann/json.hpp>

#include "irsloc/scenario.hpp"
#include "test_support.hpp"

namespace irsloc {
namespace {

TEST(Scenario, DefaultGeometry) {
  const auto c = ScenarioConfig::defaults();
  const auto g = derive_geometry(c);
  // IRS (-10,50,2) to target (5,60,0): offsets 15, 10, -2.
  EXPECT_NEAR(g.d_i2u, std::sqrt(329.0), 1e-12);
  EXPECT_NEAR(g.d_i2u, 18.1384, 1e-4);
  EXPECT_NEAR(g.mu_i2u, -10.0 / std::sqrt(329.0), 1e-15);
  EXPECT_NEAR(g.mu_i2u, -0.55132, 1e-5);
  EXPECT_NEAR(g.tau_i2u, std::sqrt(329.0) / 299792458.0, 1e-20);
  EXPECT_NEAR(g.tau_i2u * 1e9, 60.503, 1e-3);
  EXPECT_EQ(g.tau_tot - (g.tau_b2i + 2.0 * g.tau_i2u), 0.0);
  EXPECT_NEAR(g.d_b2i, std::sqrt(100.0 + 2500.0 + 4.0), 1e-12);
}

TEST(Scenario, PathLossFormulas) {
  const auto c = ScenarioConfig::defaults();
  const auto g = derive_geometry(c);
  const double lam = c.wavelength;
  EXPECT_NEAR(g.beta_b2i, std::sqrt(lam * lam / (16.0 * kPi * kPi * g.d_b2i * g.d_b2i)), 1e-18);
  EXPECT_NEAR(g.beta_i2s, std::sqrt(lam * lam * c.rcs / (64.0 * std::pow(kPi, 3) * std::pow(g.d_i2u, 4))), 1e-18);
}

TEST(Scenario, BroadsideTarget) {
  auto c = ScenarioConfig::defaults();
  c.q_irs.z = 0.0;
  c.q_target = {c.q_irs.x + 12.0, c.q_irs.y, 0.0};
  const auto g = derive_geometry(c);
  EXPECT_EQ(g.mu_i2u, 0.0);
  const auto j = channel_jacobian(c, g);
  EXPECT_EQ(j.matrix(1, 0), 0.0);
}

TEST(Scenario, BetaI2sInverseSquareInDistance) {
  auto c = ScenarioConfig::defaults();
  c.q_irs.z = 0.0;
  c.q_target = {c.q_irs.x + 10.0, c.q_irs.y + 5.0, 0.0};
  const double b1 = derive_geometry(c).beta_i2s;
  c.q_target = {c.q_irs.x + 20.0, c.q_irs.y + 10.0, 0.0};
  const double b2 = derive_geometry(c).beta_i2s;
  EXPECT_NEAR(b1 / b2, 4.0, 1e-12);
}

TEST(Scenario, TauIdentityOverRandomConfigs) {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 100; ++i) {
    const auto g = derive_geometry(test::random_config(rng));
    EXPECT_EQ(g.tau_tot - (g.tau_b2i + 2.0 * g.tau_i2u), 0.0);
    EXPECT_LE(std::abs(g.mu_i2u), 1.0);
  }
}

TEST(Scenario, JacobianStructure) {
  const auto c = ScenarioConfig::defaults();
  const auto j = channel_jacobian(c, derive_geometry(c)).matrix;
  EXPECT_TRUE((j.block<2, 2>(2, 2) == Eigen::Matrix2d::Identity()));
  EXPECT_TRUE((j.block<2, 2>(0, 2) == Eigen::Matrix2d::Zero()));
  EXPECT_TRUE((j.block<2, 2>(2, 0) == Eigen::Matrix2d::Zero()));
}

// Central differences of (tau_tot, mu_i2u) with respect to (x_u, y_u).
Eigen::Matrix2d finite_difference_jacobian(ScenarioConfig c, double h) {
  Eigen::Matrix2d fd;
  const Vec3 q = c.q_target;
  for (int k = 0; k < 2; ++k) {
    Vec3 plus = q;
    Vec3 minus = q;
    (k == 0 ? plus.x : plus.y) += h;
    (k == 0 ? minus.x : minus.y) -= h;
    c.q_target = plus;
    const auto gp = derive_geometry(c);
    c.q_target = minus;
    const auto gm = derive_geometry(c);
    fd(0, k) = (gp.tau_tot - gm.tau_tot) / (2 * h);
    fd(1, k) = (gp.mu_i2u - gm.mu_i2u) / (2 * h);
  }
  return fd;
}

TEST(Scenario, JacobianMatchesFiniteDifferenceAtDefaults) {
  const auto c = ScenarioConfig::defaults();
  const auto j = channel_jacobian(c, derive_geometry(c)).matrix;
  const auto fd = finite_difference_jacobian(c, 1e-4);
  for (int r = 0; r < 2; ++r) {
    for (int k = 0; k < 2; ++k) EXPECT_LT(test::rel_err(j(r, k), fd(r, k)), 1e-6) << r << "," << k;
  }
}

TEST(Scenario, JacobianMatchesFiniteDifferenceRandomTargets) {
  std::mt19937_64 rng(11);
  const auto base = ScenarioConfig::defaults();
  std::uniform_real_distribution<double> dx(1.0, 60.0);
  std::uniform_real_distribution<double> dy(-40.0, 40.0);
  for (int i = 0; i < 100; ++i) {
    auto c = base;
    c.q_target = {base.q_irs.x + dx(rng), base.q_irs.y + dy(rng), 0.0};
    const auto j = channel_jacobian(c, derive_geometry(c)).matrix;
    const auto fd = finite_difference_jacobian(c, 1e-4);
    const double scale_tau = fd.row(0).norm();
    const double scale_mu = fd.row(1).norm();
    for (int k = 0; k < 2; ++k) {
      EXPECT_LT(std::abs(j(0, k) - fd(0, k)) / scale_tau, 1e-5);
      EXPECT_LT(std::abs(j(1, k) - fd(1, k)) / scale_mu, 1e-5);
    }
  }
}

TEST(Scenario, ValidationRejectsBadConfigs) {
  auto c = ScenarioConfig::defaults();
  c.q_target.z = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = ScenarioConfig::defaults();
  c.n_sensors = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = ScenarioConfig::defaults();
  c.noise_psd = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = ScenarioConfig::defaults();
  c.q_target = {c.q_irs.x, c.q_irs.y, 0.0};
  c.q_irs.z = 0.0;
  EXPECT_THROW(derive_geometry(c), DegenerateGeometryError);
}

TEST(Scenario, JsonRoundTripAndConvenienceKeys) {
  const auto c = ScenarioConfig::defaults();
  const nlohmann::json j = c;
  const auto back = j.get<ScenarioConfig>();
  EXPECT_EQ(nlohmann::json(back), j);

  const auto parsed = nlohmann::json::parse(R"({"tx_power_dbm": 30, "noise_psd_dbm_hz": -150, "rcs_dbsm": 7,
                                                 "q_target": {"x": 1, "y": 70}})")
                          .get<ScenarioConfig>();
  EXPECT_NEAR(parsed.tx_power, 1.0, 1e-15);
  EXPECT_NEAR(parsed.noise_psd, 1e-18, 1e-30);
  EXPECT_NEAR(parsed.rcs, std::pow(10.0, 0.7), 1e-12);
  EXPECT_EQ(parsed.q_target, (Vec3{1.0, 70.0, 0.0}));
  EXPECT_THROW(nlohmann::json::parse(R"({"q_target": [1, 2, 3]})").get<ScenarioConfig>(), ConfigError);
  EXPECT_THROW(nlohmann::json::parse(R"({"n_frames": "six"})").get<ScenarioConfig>(), ConfigError);
}

}  // namespace
}  // namespace irsloc
