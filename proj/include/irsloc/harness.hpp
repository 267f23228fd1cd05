#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "irsloc/estimators.hpp"
#include "irsloc/irs_schedule.hpp"
#include "irsloc/scenario.hpp"
#include "irsloc/signal_sim.hpp"
#include "irsloc/waveform.hpp"

namespace irsloc {

enum class Scheme { kSemiPassiveDft, kSemiPassiveRandom, kFullyPassive, kCrbCurve };
enum class SweepVariable { kTxPowerDbm, kNReflectors, kNSensors, kNFrames };

std::string_view to_string(Scheme s);
Scheme scheme_from_string(std::string_view name);
std::string_view to_string(SweepVariable v);
SweepVariable sweep_variable_from_string(std::string_view name);

struct ExperimentSpec {
  ScenarioConfig base = ScenarioConfig::defaults();
  SweepVariable variable = SweepVariable::kTxPowerDbm;
  std::vector<double> values;
  int trials = 100;
  std::vector<Scheme> schemes;
  std::uint64_t master_seed = 1;
  int doa_grid = 4096;
  int toa_grid = 8192;
  /// Schedule behind the CRB reference values.
  ScheduleKind crb_schedule = ScheduleKind::kDftScan;
  /// Worker threads; 0 picks the hardware concurrency. Never affects results.
  unsigned threads = 0;

  void validate() const;
};

/// Base config with the sweep variable set to `value` (dBm for tx power).
ScenarioConfig apply_sweep_value(const ScenarioConfig& base, SweepVariable variable, double value);

struct TrialOutcome {
  bool ok = false;
  double mu_error = 0.0;        // mu_hat - mu
  double position_error = 0.0;  // Euclidean, x-y plane
  bool low_confidence = false;
  std::string failure;
};

struct PointStats {
  Scheme scheme = Scheme::kSemiPassiveDft;
  double sweep_value = 0.0;
  int trials_ok = 0;
  int trials_failed = 0;
  double rmse_mu = 0.0;
  double rmse_position = 0.0;
  /// Root CRBs of mu and of the x-y position for the nominal amplitude.
  double crb_mu = 0.0;
  double crb_position = 0.0;
  /// More than half of the trials failed.
  bool invalid = false;
  double wall_seconds = 0.0;
};

/// Root CRBs (sqrt of CRB(mu), sqrt of CRB(x) + CRB(y)) with |alpha| = 1.
/// NaN when the FIM is singular.
std::pair<double, double> reference_root_crb(const ScenarioConfig& config, ScheduleKind kind);

/// One semi-passive trial. Seeds derive from (master_seed, trial).
TrialOutcome semi_passive_trial(const ScenarioConfig& config, ScheduleKind kind, std::uint64_t master_seed,
                                std::uint64_t trial, const PipelineOptions& options);

/// Clean BS receive tensor of the fully-passive baseline: the BS's N_s
/// receive antennas see alpha sqrt(P_BS N_BS) beta_b2i^2 beta_i2s
/// a(mu_b2i_aod) g(n)^2 s(t - 2 tau_b2i - 2 tau_i2u).
SnapshotSet synthesize_fully_passive(const ChannelRealization& realization, const PhaseSchedule& schedule,
                                     const SampledWaveform& waveform, const ScenarioConfig& config);

/// Fully-passive estimate: beam-sweep energy peak for the direction, DFT
/// ML delay after receive beamforming towards the IRS. `schedule` must be
/// a dft_scan schedule.
EstimationResult fully_passive_estimate(const SnapshotSet& received, const PhaseSchedule& schedule,
                                        const SampledWaveform& waveform, const ScenarioConfig& config,
                                        const DerivedGeometry& geom, const PipelineOptions& options);

TrialOutcome fully_passive_trial(const ScenarioConfig& config, std::uint64_t master_seed, std::uint64_t trial,
                                 const PipelineOptions& options);

/// RMSE statistics of one (scheme, config) point. Trials run in parallel
/// and are reduced in trial order.
PointStats run_monte_carlo(const ScenarioConfig& config, Scheme scheme, int trials, std::uint64_t master_seed,
                           const PipelineOptions& options, ScheduleKind crb_schedule = ScheduleKind::kDftScan,
                           unsigned threads = 0);

struct SweepResult {
  ExperimentSpec spec;
  std::vector<PointStats> rows;  // point-major, schemes in experiment order
  double wall_seconds = 0.0;
};

SweepResult run_sweep(const ExperimentSpec& spec);

/// Columns: scheme, sweep_var, sweep_value, trials_ok, trials_failed,
/// rmse_mu, rmse_pos_m, crb_mu, crb_pos_m.
std::string sweep_csv(const SweepResult& result);
nlohmann::json sweep_manifest(const SweepResult& result);
/// Writes sweep.csv and manifest.json into `dir` (created if needed).
void emit_sweep(const SweepResult& result, const std::filesystem::path& dir);

void to_json(nlohmann::json& j, const ExperimentSpec& s);
void from_json(const nlohmann::json& j, ExperimentSpec& s);
ExperimentSpec load_experiment(const std::filesystem::path& path);

inline constexpr std::string_view kVersion = "0.1.0";

}  // namespace irsloc
