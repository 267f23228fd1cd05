#pragma once

#include <span>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "irsloc/common.hpp"
#include "irsloc/irs_schedule.hpp"
#include "irsloc/scenario.hpp"
#include "irsloc/signal_sim.hpp"
#include "irsloc/waveform.hpp"

namespace irsloc {

struct DoaEstimate {
  double mu_hat = 0.0;
  /// MUSIC pseudo-spectrum on the grid mu_i = -1 + 2i/(T_1 - 1).
  std::vector<double> spectrum;
  int grid_size = 0;
};

/// Point i of the inclusive DoA search grid.
inline double doa_grid_point(int i, int grid_size) { return -1.0 + 2.0 * i / (grid_size - 1); }

/// MUSIC over all frames and time samples. Needs N_s >= 2 and T_1 >= 2.
/// With `refine`, a parabola through the log-spectrum around the peak
/// moves the estimate off the grid.
DoaEstimate estimate_doa(const SnapshotSet& snapshots, int grid_size = 4096, bool refine = false);

struct CollapsedSignal {
  Eigen::VectorXcd y_bar;
  /// f(mu_hat) * sum_n g_n(mu_hat), so that beta_target = beta_bar / scale.
  Complex scale{};
  /// N_f N_s sigma^2
  double noise_variance = 0.0;
};

/// Sums the snapshots over frames and sensors. `gains` are the cascade
/// gains g_n evaluated at the DoA estimate, one per frame.
CollapsedSignal collapse_snapshots(const SnapshotSet& snapshots, std::span<const Complex> gains, double mu_hat);

struct ToaEstimate {
  double w_hat = 0.0;  // rad/bin, in (-2 pi, 0]
  double tau_hat = 0.0;
  Complex beta_bar_hat{};
  /// |sum_k S^*(k) Y(k) exp(-j w_i k)|^2 on w_i = -2 pi i / T_2.
  std::vector<double> objective;
  int grid_size = 0;
};

/// Joint ML delay / amplitude estimate in the DFT domain, summing over all
/// N bins. `y_bar` must have the waveform's length.
ToaEstimate estimate_toa_beta(const Eigen::VectorXcd& y_bar, const SampledWaveform& waveform, int grid_size = 8192,
                              bool refine = false);

/// Closed-form amplitude for a given delay phase w.
Complex ml_amplitude(const Eigen::VectorXcd& y_spectrum, const Eigen::VectorXcd& s_spectrum, double w);

struct LocationEstimate {
  double x_hat = 0.0;
  double y_hat = 0.0;
  bool feasible = true;
  /// c^2 tau_i2u^2 - (y_I - y_hat)^2 - z_I^2 before clamping at zero.
  double radicand = 0.0;
};

/// Position from the IRS-target direction cosine and range delay; the
/// positive root (front half-space of the IRS) is taken. Throws
/// CausalityError for a negative delay.
LocationEstimate solve_location_from_range(double mu_hat, double tau_i2u_hat, const ScenarioConfig& config);

/// Same, starting from the total delay: tau_i2u = (tau_tot - tau_b2i) / 2.
LocationEstimate solve_location(double mu_hat, double tau_tot_hat, const DerivedGeometry& geom,
                                const ScenarioConfig& config);

struct PipelineOptions {
  int doa_grid = 4096;
  int toa_grid = 8192;
  bool refine = false;
  /// Keep the MUSIC spectrum and ML objective in the result.
  bool keep_curves = false;
};

struct EstimationResult {
  double mu_hat = 0.0;
  double tau_tot_hat = 0.0;
  Complex beta_bar_hat{};
  Complex beta_target_hat{};
  double x_hat = 0.0;
  double y_hat = 0.0;
  bool feasible = true;
  /// Set for estimates with no spatial resolution (single-beam sweeps).
  bool low_confidence = false;
  std::vector<double> doa_spectrum;
  std::vector<double> toa_objective;
};

/// MUSIC, collapse, ML delay/amplitude and location solve, in that order.
/// Only the infrastructure part of `geom` (mu_b2i_aoa, tau_b2i) is read.
EstimationResult estimate_pipeline(const SnapshotSet& snapshots, const PhaseSchedule& schedule,
                                   const SampledWaveform& waveform, const ScenarioConfig& config,
                                   const DerivedGeometry& geom, const PipelineOptions& options = {});

void to_json(nlohmann::json& j, const EstimationResult& r);

}  // namespace irsloc
