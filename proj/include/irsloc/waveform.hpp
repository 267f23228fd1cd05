#pragma once

#include <span>
#include <string_view>

#include <Eigen/Core>

#include "irsloc/common.hpp"

namespace irsloc {

enum class ChirpKind {
  /// s(t) = exp(j 2 pi B (t + nu t^2)), 0 <= t < 1/B.
  kReferenceChirp,
  /// s(t) = exp(j pi kappa t^2), -1/(2B) <= t < 1/(2B), kappa = 2 B nu.
  /// Odd-symmetric instantaneous frequency, so the integral of s_dot s^* vanishes.
  kCenteredChirp,
};

std::string_view to_string(ChirpKind kind);
ChirpKind chirp_kind_from_string(std::string_view name);

struct ChirpSpec {
  double bandwidth = 1.5e6;  // Hz
  double freq_rate = 1e6;    // 1/s
  ChirpKind kind = ChirpKind::kReferenceChirp;
  int n_samples = 64;

  double sample_period() const { return 1.0 / (bandwidth * n_samples); }
  double duration() const { return 1.0 / bandwidth; }
  void validate() const;
};

bool is_power_of_two(long n);

/// Sampling instant of sample l. The reference chirp is sampled at l*T_s; the
/// centered chirp at the midpoints of [-1/(2B), 1/(2B)) so that the sample
/// grid is symmetric about t = 0.
double sample_time(const ChirpSpec& spec, int l);

/// Analytic waveform value; defined for every real t (the chirp formula is
/// evaluated outside its nominal support too).
Complex chirp_value(const ChirpSpec& spec, double t);

/// Analytic time derivative s'(t).
Complex chirp_time_derivative(const ChirpSpec& spec, double t);

struct SampledWaveform {
  ChirpSpec spec;
  double sample_period = 0.0;
  Eigen::VectorXcd samples;
  /// d s(t - tau) / d tau at tau = 0, i.e. -s'(t_l).
  Eigen::VectorXcd derivative_samples;
  /// sum |s_l|^2 T_s
  double energy = 0.0;
  /// sum |s_dot_l|^2 T_s / energy, rad^2/s^2
  double msq_bandwidth = 0.0;
  /// sum s_dot_l s_l^* T_s
  Complex cross_term{};

  int size() const { return static_cast<int>(samples.size()); }
  double window() const { return sample_period * static_cast<double>(samples.size()); }
};

SampledWaveform build_waveform(const ChirpSpec& spec);

/// Forward DFT, unnormalized: X(k) = sum_l x_l exp(-j 2 pi k l / N).
/// Output is in centered order: element i holds bin k = i - N/2, so bins run
/// -N/2 ... N/2-1. Length must be a power of two.
Eigen::VectorXcd dft(std::span<const Complex> x);
Eigen::VectorXcd dft(const Eigen::VectorXcd& x);

/// Inverse of dft(): takes a centered spectrum, returns samples (1/N scaling).
Eigen::VectorXcd inverse_dft(std::span<const Complex> spectrum);
Eigen::VectorXcd inverse_dft(const Eigen::VectorXcd& spectrum);

/// Signed bin index of centered position i in a length-n spectrum.
inline int centered_bin(int i, int n) { return i - n / 2; }

/// Circular sub-sample delay in the frequency domain:
/// Y(k) = X(k) exp(j w k), w = -2 pi tau / (T_s N).
/// tau must lie in [0, N T_s).
Eigen::VectorXcd apply_fractional_delay(const Eigen::VectorXcd& x, double tau, double sample_period);
Eigen::VectorXcd apply_fractional_delay(const SampledWaveform& w, double tau);

}  // namespace irsloc
