#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>

#include "irsloc/arrays.hpp"
#include "irsloc/irs_schedule.hpp"
#include "irsloc/scenario.hpp"

namespace irsloc {
namespace {

DerivedGeometry default_geometry() { return derive_geometry(ScenarioConfig::defaults()); }

// Independent evaluation of b_r^T(mu_out) diag(theta) b_r(mu_in).
Complex cascade(const Eigen::VectorXcd& theta, double mu_out, double mu_in) {
  const int n = static_cast<int>(theta.size());
  Complex acc{};
  for (int i = 0; i < n; ++i) {
    const double k = i - (n - 1) / 2.0;
    acc += std::exp(Complex(0.0, kPi * k * mu_out)) * theta[i] * std::exp(Complex(0.0, kPi * k * mu_in));
  }
  return acc;
}

TEST(IrsSchedule, UnitModulusEverywhere) {
  const auto geom = default_geometry();
  for (auto kind : {ScheduleKind::kDftScan, ScheduleKind::kRandom, ScheduleKind::kOracleOptimal}) {
    const auto s = make_schedule(kind, 37, 9, geom, 12);
    EXPECT_EQ(s.n_reflectors(), 37);
    EXPECT_EQ(s.n_frames(), 9);
    EXPECT_LT((s.phases.cwiseAbs().array() - 1.0).abs().maxCoeff(), 1e-14);
  }
}

TEST(IrsSchedule, OracleGainIsNr) {
  const auto geom = default_geometry();
  const auto s = make_schedule(ScheduleKind::kOracleOptimal, 50, 6, geom);
  const auto g = effective_gain(s, geom.mu_i2u, geom.mu_b2i_aoa);
  for (int n = 0; n < 6; ++n) {
    EXPECT_NEAR(g[n].real(), 50.0, 1e-11);
    EXPECT_NEAR(g[n].imag(), 0.0, 1e-11);
  }
}

TEST(IrsSchedule, GainMatchesDirectSum) {
  const auto geom = default_geometry();
  const auto s = make_schedule(ScheduleKind::kRandom, 23, 5, geom, 99);
  const auto g = effective_gain(s, -0.2, 0.4);
  for (int n = 0; n < 5; ++n) EXPECT_NEAR(std::abs(g[n] - cascade(s.phases.col(n), -0.2, 0.4)), 0.0, 1e-12);
}

TEST(IrsSchedule, GainDerivativeMatchesFiniteDifference) {
  const auto geom = default_geometry();
  const auto s = make_schedule(ScheduleKind::kDftScan, 40, 6, geom);
  const double h = 1e-7;
  const auto d = effective_gain(s, geom.mu_i2u, geom.mu_b2i_aoa, 1);
  const Eigen::VectorXcd fd =
      (effective_gain(s, geom.mu_i2u + h, geom.mu_b2i_aoa) - effective_gain(s, geom.mu_i2u - h, geom.mu_b2i_aoa)) /
      (2 * h);
  EXPECT_LT((d - fd).norm() / d.norm(), 1e-7);
}

TEST(IrsSchedule, SingleElementHasUnitGain) {
  const auto geom = default_geometry();
  for (auto kind : {ScheduleKind::kDftScan, ScheduleKind::kRandom}) {
    const auto s = make_schedule(kind, 1, 4, geom, 3);
    const auto g = effective_gain(s, 0.31, geom.mu_b2i_aoa);
    for (int n = 0; n < 4; ++n) EXPECT_NEAR(std::abs(g[n]), 1.0, 1e-14);
  }
}

TEST(IrsSchedule, RandomIsDeterministicPerSeed) {
  const auto a = make_schedule(ScheduleKind::kRandom, 50, 6, std::nullopt, 42);
  const auto b = make_schedule(ScheduleKind::kRandom, 50, 6, std::nullopt, 42);
  const auto c = make_schedule(ScheduleKind::kRandom, 50, 6, std::nullopt, 43);
  EXPECT_TRUE(a.phases == b.phases);
  EXPECT_FALSE(a.phases == c.phases);
}

TEST(IrsSchedule, RandomPhasorPowerIsNr) {
  // |sum of N_r unit phasors with iid uniform phases|^2 has mean N_r and
  // variance N_r^2 - N_r; 1e4 frames give a standard error of
  // sqrt((N_r^2 - N_r) / 1e4).
  const int nr = 50;
  const int frames = 10000;
  const auto geom = default_geometry();
  const auto s = make_schedule(ScheduleKind::kRandom, nr, frames, geom, 7);
  const auto g = effective_gain(s, geom.mu_i2u, geom.mu_b2i_aoa);
  const double mean = g.cwiseAbs2().mean();
  const double sigma = std::sqrt((nr * nr - nr) / static_cast<double>(frames));
  EXPECT_LT(std::abs(mean - nr), 3.0 * sigma);
}

TEST(IrsSchedule, DftScanPeaksAtOwnDirection) {
  const int n = 16;
  DerivedGeometry geom;
  geom.mu_b2i_aoa = 0.0;
  const auto s = make_schedule(ScheduleKind::kDftScan, n, n, geom);
  ASSERT_EQ(s.scan_grid.size(), static_cast<size_t>(n));
  for (int f = 0; f < n; ++f) {
    int best = -1;
    double best_gain = -1.0;
    for (int m = 0; m < n; ++m) {
      const double gain = std::abs(cascade(s.phases.col(f), s.scan_grid[m], 0.0));
      if (gain > best_gain) {
        best_gain = gain;
        best = m;
      }
    }
    EXPECT_EQ(best, f);
    EXPECT_NEAR(best_gain, n, 1e-10);
  }
}

TEST(IrsSchedule, ScanGridUniformAndDistinct) {
  for (int nf : {1, 2, 6, 13}) {
    const auto grid = scan_grid(nf);
    ASSERT_EQ(grid.size(), static_cast<size_t>(nf));
    EXPECT_EQ(grid[0], -1.0);
    for (int i = 1; i < nf; ++i) EXPECT_NEAR(grid[i] - grid[i - 1], 2.0 / nf, 1e-15);
    EXPECT_LT(grid.back(), 1.0);
  }
}

TEST(IrsSchedule, GainBoundedByNr) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> mu(-1.0, 1.0);
  const auto s = make_schedule(ScheduleKind::kRandom, 30, 200, std::nullopt, 5);
  for (int t = 0; t < 20; ++t) {
    EXPECT_LE(effective_gain(s, mu(rng), mu(rng)).cwiseAbs().maxCoeff(), 30.0 + 1e-12);
  }
}

TEST(IrsSchedule, ErrorsAndCsv) {
  EXPECT_THROW(make_schedule(ScheduleKind::kDftScan, 10, 2, std::nullopt), ConfigError);
  EXPECT_THROW(make_schedule(ScheduleKind::kRandom, 0, 2, std::nullopt), ConfigError);
  EXPECT_THROW(schedule_kind_from_string("zigzag"), ConfigError);

  const auto s = make_schedule(ScheduleKind::kRandom, 3, 2, std::nullopt, 1);
  const auto path = std::filesystem::temp_directory_path() / "irsloc_schedule_test.csv";
  write_schedule_csv(s, path);
  std::ifstream in(path);
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 1 + 3);
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace irsloc
