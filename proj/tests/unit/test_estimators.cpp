#include <gtest/gtest.h>

#include "irsloc/arrays.hpp"
#include "irsloc/estimators.hpp"
#include "test_support.hpp"

namespace irsloc {
namespace {

struct Clean {
  ScenarioConfig config;
  DerivedGeometry geom;
  SampledWaveform waveform;
  PhaseSchedule schedule;
  ChannelRealization realization;
  SnapshotSet snapshots;
};

Clean clean_scenario(ScenarioConfig c = ScenarioConfig::defaults(), ScheduleKind kind = ScheduleKind::kDftScan) {
  Clean s;
  s.config = c;
  s.geom = derive_geometry(c);
  s.waveform = build_waveform(c.waveform);
  s.schedule = make_schedule(kind, c.n_reflectors, c.n_frames, s.geom, 4);
  s.realization = draw_realization(c, s.geom, 0, Complex{0.8, 0.6});
  s.snapshots = synthesize_snapshots(s.realization, s.schedule, s.waveform, c);
  return s;
}

TEST(Estimators, MusicNoiselessWithinGridStep) {
  const auto s = clean_scenario();
  const auto est = estimate_doa(s.snapshots, 4096);
  EXPECT_LE(std::abs(est.mu_hat - s.geom.mu_i2u), 2.0 / 4095);
  EXPECT_NEAR(s.geom.mu_i2u, -0.55132, 1e-5);
  EXPECT_EQ(est.spectrum.size(), 4096u);
}

TEST(Estimators, MusicBroadside) {
  auto c = ScenarioConfig::defaults();
  c.q_irs.z = 0.0;
  c.q_target = {c.q_irs.x + 15.0, c.q_irs.y, 0.0};
  const auto s = clean_scenario(c);
  ASSERT_EQ(s.geom.mu_i2u, 0.0);
  const int grid = 4097;
  EXPECT_LE(std::abs(estimate_doa(s.snapshots, grid).mu_hat), 2.0 / (grid - 1));
}

TEST(Estimators, MusicDeterministicAndScaleInvariant) {
  auto c = ScenarioConfig::defaults();
  const auto s = clean_scenario(c);
  const auto noisy = add_noise(s.snapshots, c, 3);
  const double a = estimate_doa(noisy, 2048).mu_hat;
  EXPECT_EQ(a, estimate_doa(noisy, 2048).mu_hat);
  auto scaled = noisy;
  for (Complex& v : scaled.data()) v *= Complex(-3.5, 1e3);
  EXPECT_EQ(a, estimate_doa(scaled, 2048).mu_hat);
}

TEST(Estimators, MusicNeedsTwoSensors) {
  auto c = ScenarioConfig::defaults();
  c.n_sensors = 1;
  const auto s = clean_scenario(c);
  EXPECT_THROW(estimate_doa(s.snapshots), InsufficientApertureError);
  EXPECT_THROW(estimate_pipeline(s.snapshots, s.schedule, s.waveform, c, s.geom), InsufficientApertureError);
}

TEST(Estimators, CollapseIdentities) {
  auto c = ScenarioConfig::defaults();
  c.n_sensors = 1;
  c.n_frames = 1;
  const auto one = clean_scenario(c);
  const Complex g1[] = {Complex(1.0, 0.0)};
  const auto y1 = collapse_snapshots(one.snapshots, g1, 0.0);
  for (int l = 0; l < one.waveform.size(); ++l) EXPECT_EQ(y1.y_bar[l], one.snapshots.at(0, 0, l));

  const auto s = clean_scenario();
  const auto gains = effective_gain(s.schedule, s.geom.mu_i2u, s.geom.mu_b2i_aoa);
  const auto collapsed =
      collapse_snapshots(s.snapshots, std::span<const Complex>(gains.data(), gains.size()), s.geom.mu_i2u);
  const Complex beta_bar = s.realization.beta_target * ula_steering(6, s.geom.mu_i2u).sum() * gains.sum();
  EXPECT_NEAR(std::abs(collapsed.scale * s.realization.beta_target - beta_bar), 0.0, 1e-12 * std::abs(beta_bar));
  const auto delayed = apply_fractional_delay(s.waveform, s.geom.tau_tot);
  EXPECT_LT((collapsed.y_bar - beta_bar * delayed).norm(), 1e-10 * std::abs(beta_bar) * delayed.norm());
  EXPECT_DOUBLE_EQ(collapsed.noise_variance, s.snapshots.noise_variance * 36);

  SnapshotSet zero(3, 2, 64);
  const Complex g2[] = {Complex(1.0, 0.0), Complex(2.0, 0.0)};
  EXPECT_TRUE(collapse_snapshots(zero, g2, 0.1).y_bar.isZero(0.0));
  EXPECT_THROW(collapse_snapshots(zero, g1, 0.1), DimensionError);
}

TEST(Estimators, ToaNoiselessRoundTrip) {
  const auto s = clean_scenario();
  const auto gains = effective_gain(s.schedule, s.geom.mu_i2u, s.geom.mu_b2i_aoa);
  const auto collapsed =
      collapse_snapshots(s.snapshots, std::span<const Complex>(gains.data(), gains.size()), s.geom.mu_i2u);
  const int grid = 8192;
  const auto est = estimate_toa_beta(collapsed.y_bar, s.waveform, grid);
  const double step = s.waveform.window() / grid;
  EXPECT_NEAR(s.geom.tau_tot * 1e9, 291.2, 0.05);
  EXPECT_LE(std::abs(est.tau_hat - s.geom.tau_tot), step);

  // At the true delay the amplitude estimate is exact.
  const double w_true = -2.0 * kPi * s.geom.tau_tot / s.waveform.window();
  const Complex beta_bar = s.realization.beta_target * collapsed.scale;
  const Complex exact = ml_amplitude(dft(collapsed.y_bar), dft(s.waveform.samples), w_true);
  EXPECT_LT(std::abs(exact - beta_bar) / std::abs(beta_bar), 1e-12);
}

TEST(Estimators, ToaBetaAccurateOnGridDelay) {
  // A delay that falls exactly on the search grid gives the amplitude to
  // rounding.
  const auto w = build_waveform(ChirpSpec{});
  const int grid = 8192;
  const double tau = 2385.0 * w.window() / grid;
  const Complex beta(0.3, -1.7);
  const Eigen::VectorXcd y = beta * apply_fractional_delay(w, tau);
  const auto est = estimate_toa_beta(y, w, grid);
  EXPECT_NEAR(est.tau_hat, tau, 1e-6 * w.window() / grid);
  EXPECT_LT(std::abs(est.beta_bar_hat - beta) / std::abs(beta), 1e-6);
}

TEST(Estimators, ToaZeroDelayAndMatchedIdentity) {
  const auto w = build_waveform(ChirpSpec{});
  const auto id = estimate_toa_beta(w.samples, w, 1024);
  EXPECT_EQ(id.w_hat, -0.0);
  EXPECT_NEAR(std::abs(id.beta_bar_hat - Complex(1.0, 0.0)), 0.0, 1e-13);

  const Complex scale(-2.0, 0.5);
  const auto scaled = estimate_toa_beta((scale * w.samples).eval(), w, 1024);
  EXPECT_EQ(scaled.tau_hat, 0.0);
  EXPECT_NEAR(std::abs(scaled.beta_bar_hat - scale), 0.0, 1e-12);
}

TEST(Estimators, ToaObjectivePeriodic) {
  // The objective at w and w - 2 pi agree, so one period of grid points
  // covers every distinct value.
  const auto w = build_waveform(ChirpSpec{});
  const Eigen::VectorXcd y = apply_fractional_delay(w, 1.3e-7);
  const auto sy = dft(y);
  const auto ss = dft(w.samples);
  for (double wv : {-0.3, -2.0, -5.9}) {
    EXPECT_NEAR(std::abs(ml_amplitude(sy, ss, wv) - ml_amplitude(sy, ss, wv - 2 * kPi)), 0.0, 1e-10);
  }
  EXPECT_THROW(estimate_toa_beta(Eigen::VectorXcd::Zero(32).eval(), w, 16), DimensionError);
}

TEST(Estimators, LocationRoundTrip) {
  const auto c = ScenarioConfig::defaults();
  const auto g = derive_geometry(c);
  const auto loc = solve_location(g.mu_i2u, g.tau_tot, g, c);
  EXPECT_TRUE(loc.feasible);
  EXPECT_NEAR(loc.x_hat, 5.0, 1e-9);
  EXPECT_NEAR(loc.y_hat, 60.0, 1e-9);
}

TEST(Estimators, LocationDegenerateCases) {
  const auto c = ScenarioConfig::defaults();
  const double z = c.q_irs.z;
  const auto at_irs = solve_location_from_range(0.0, z / c.speed_of_light, c);
  EXPECT_TRUE(at_irs.feasible);
  EXPECT_NEAR(at_irs.x_hat, c.q_irs.x, 1e-12);
  EXPECT_NEAR(at_irs.y_hat, c.q_irs.y, 1e-12);
  EXPECT_FALSE(solve_location_from_range(0.0, 0.5 * z / c.speed_of_light, c).feasible);
  EXPECT_THROW(solve_location_from_range(0.0, -1e-9, c), CausalityError);
}

TEST(Estimators, PipelineNoiseless) {
  const auto s = clean_scenario();
  PipelineOptions opt;
  opt.doa_grid = 8192;
  opt.toa_grid = 8192;
  const auto r = estimate_pipeline(s.snapshots, s.schedule, s.waveform, s.config, s.geom, opt);
  EXPECT_TRUE(r.feasible);
  EXPECT_LT(std::hypot(r.x_hat - 5.0, r.y_hat - 60.0), 0.01);
}

TEST(Estimators, PipelineErrorShrinksWithGrid) {
  std::mt19937_64 rng(17);
  for (int t = 0; t < 8; ++t) {
    auto c = test::random_config(rng);
    const auto s = clean_scenario(c, t % 2 ? ScheduleKind::kRandom : ScheduleKind::kDftScan);
    const auto error_at = [&](int grid) {
      PipelineOptions opt;
      opt.doa_grid = grid;
      opt.toa_grid = grid;
      const auto r = estimate_pipeline(s.snapshots, s.schedule, s.waveform, c, s.geom, opt);
      return std::hypot(r.x_hat - c.q_target.x, r.y_hat - c.q_target.y);
    };
    EXPECT_LE(error_at(8192), error_at(1024)) << "config " << t;
  }
}

TEST(Estimators, RefinementIsOptIn) {
  const auto s = clean_scenario();
  PipelineOptions plain;
  plain.doa_grid = 512;
  plain.toa_grid = 512;
  PipelineOptions refined = plain;
  refined.refine = true;
  const auto a = estimate_pipeline(s.snapshots, s.schedule, s.waveform, s.config, s.geom, plain);
  const auto b = estimate_pipeline(s.snapshots, s.schedule, s.waveform, s.config, s.geom, refined);
  EXPECT_NEAR(a.mu_hat, doa_grid_point(static_cast<int>(std::lround((a.mu_hat + 1.0) * 511 / 2.0)), 512), 1e-15);
  EXPECT_LE(std::abs(b.mu_hat - s.geom.mu_i2u), std::abs(a.mu_hat - s.geom.mu_i2u));
}

}  // namespace
}  // namespace irsloc
