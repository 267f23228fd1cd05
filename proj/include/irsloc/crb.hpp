#pragma once

#include <vector>

#include <Eigen/Core>
#include <nlohmann/json_fwd.hpp>

#include "irsloc/common.hpp"
#include "irsloc/irs_schedule.hpp"
#include "irsloc/scenario.hpp"
#include "irsloc/signal_sim.hpp"
#include "irsloc/waveform.hpp"

namespace irsloc {

/// Fisher information over (tau_tot, mu_i2u, beta_re, beta_im).
struct FimChannel {
  Eigen::Matrix4d matrix = Eigen::Matrix4d::Zero();
};

/// Fisher information of one frame, from the analytic entry formulas.
FimChannel fim_channel_frame(const ChannelRealization& realization, const Complex& gain, const Complex& gain_derivative,
                             const SampledWaveform& waveform, const ScenarioConfig& config);

/// Sum over frames of the per-frame analytic FIM.
FimChannel fim_channel(const ChannelRealization& realization, const PhaseSchedule& schedule,
                       const SampledWaveform& waveform, const ScenarioConfig& config);

struct NumericFim {
  FimChannel fim;  // symmetrized
  /// max |F - F^T| / max |F| before symmetrization.
  double asymmetry = 0.0;
};

/// Independent check of fim_channel: differentiates the noiseless mean
/// signal by central differences (1e-12 s for tau, 1e-7 for mu,
/// 1e-3 |beta| for the beta parts) and forms
/// F_ij = (2/n_0) T_s sum Re{ d_i ybar^* d_j ybar }.
NumericFim numeric_fim_oracle(const ChannelRealization& realization, const PhaseSchedule& schedule,
                              const SampledWaveform& waveform, const ScenarioConfig& config);

/// J^T F J with J = d u_channel / d u_position.
Eigen::Matrix4d fim_position(const FimChannel& fim, const ChannelJacobian& jacobian);

/// Inverse of a symmetric positive-definite FIM. Works on the
/// diagonally-normalized matrix so that parameters with very different
/// units do not spoil the rank test; throws SingularFimError otherwise.
Eigen::Matrix4d invert_fim(const Eigen::Matrix4d& fim);

struct CrbReport {
  double crb_tau = 0.0;       // s^2
  double crb_mu = 0.0;        // dimensionless^2
  double crb_position = 0.0;  // m^2, x and y summed
  Eigen::Matrix4d fim_channel = Eigen::Matrix4d::Zero();
  Eigen::Matrix4d fim_position = Eigen::Matrix4d::Zero();
  bool closed_form_used = false;
};

CrbReport crb_position(const FimChannel& fim, const ChannelJacobian& jacobian);

/// Analytic FIM, chain rule and inversion in one call.
CrbReport compute_crb(const ChannelRealization& realization, const PhaseSchedule& schedule,
                      const SampledWaveform& waveform, const ScenarioConfig& config);

struct ClosedFormCrb {
  double crb_tau = 0.0;
  /// +infinity when N_s = 1 (no sensor aperture).
  double crb_mu = 0.0;
};

/// Closed forms valid for the phase-aligned schedule and a waveform with
/// zero s_dot s^* cross term.
ClosedFormCrb closed_form_crb(const ScenarioConfig& config, const ChannelRealization& realization,
                              const SampledWaveform& waveform);
/// Same with the nominal amplitude (|alpha| = 1).
ClosedFormCrb closed_form_crb(const ScenarioConfig& config, const DerivedGeometry& geom,
                              const SampledWaveform& waveform);

enum class SplitObjective { kToa, kDoa };
enum class SplitMode { kClosedForm, kBruteForce };

struct ElementSplit {
  int n_reflectors = 0;
  int n_sensors = 0;
  /// Real-valued optimum before integer rounding (closed form only).
  double continuous_n_reflectors = 0.0;
};

/// Split of a fixed element budget N = N_r + N_s minimizing the
/// closed-form CRB of the chosen parameter. Requires N >= 3.
ElementSplit optimal_split(int total_n, SplitObjective objective, SplitMode mode);

/// CRB up to constant factors: 1/(N_s N_r^2) for ToA,
/// 1/(N_s (N_s^2-1) N_r^2) for DoA (infinite when N_s < 2).
double split_objective_value(int n_reflectors, int n_sensors, SplitObjective objective);

void to_json(nlohmann::json& j, const CrbReport& r);

}  // namespace irsloc
