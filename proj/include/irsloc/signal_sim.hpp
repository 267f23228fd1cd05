#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "irsloc/common.hpp"
#include "irsloc/irs_schedule.hpp"
#include "irsloc/rng.hpp"
#include "irsloc/scenario.hpp"
#include "irsloc/waveform.hpp"

namespace irsloc {

struct ChannelRealization {
  Complex alpha{1.0, 0.0};
  /// alpha * sqrt(P_BS N_BS) * beta_b2i * beta_i2s. The BS beamformer
  /// sqrt(P_BS/N_BS) a(mu_b2i_aod) contributes a^H w = sqrt(P_BS N_BS).
  Complex beta_target{};
  DerivedGeometry geom;
};

/// Draws alpha ~ CN(0, 1) from `seed` unless `forced_alpha` is given.
ChannelRealization draw_realization(const ScenarioConfig& config, const DerivedGeometry& geom, std::uint64_t seed,
                                    std::optional<Complex> forced_alpha = std::nullopt);

/// Complex samples indexed (sensor, frame, time sample), stored sensor-major.
class SnapshotSet {
 public:
  using RowMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

  SnapshotSet() = default;
  SnapshotSet(int n_sensors, int n_frames, int n_samples);

  int n_sensors() const { return n_sensors_; }
  int n_frames() const { return n_frames_; }
  int n_samples() const { return n_samples_; }

  Complex& at(int s, int n, int l) { return data_[index(s, n, l)]; }
  const Complex& at(int s, int n, int l) const { return data_[index(s, n, l)]; }

  /// N_s x (N_f * N_samples) unfolding; column n * N_samples + l.
  Eigen::Map<const RowMatrix> unfolded() const {
    return {data_.data(), n_sensors_, static_cast<Eigen::Index>(n_frames_) * n_samples_};
  }
  Eigen::Map<RowMatrix> unfolded() { return {data_.data(), n_sensors_, static_cast<Eigen::Index>(n_frames_) * n_samples_}; }

  const std::vector<Complex>& data() const { return data_; }
  std::vector<Complex>& data() { return data_; }

  double noise_variance = 0.0;
  bool clean = true;

 private:
  size_t index(int s, int n, int l) const {
    return (static_cast<size_t>(s) * n_frames_ + static_cast<size_t>(n)) * n_samples_ + static_cast<size_t>(l);
  }

  int n_sensors_ = 0;
  int n_frames_ = 0;
  int n_samples_ = 0;
  std::vector<Complex> data_;
};

struct SimOptions {
  /// Residual BS-sensor leakage after cancellation, as a complex fraction of
  /// the uncancelled direct term. Zero means perfect cancellation.
  Complex leakage{0.0, 0.0};
};

/// Noise-free sensor snapshots:
/// data[s][n][l] = beta_target b_s(mu_i2u)[s] g(n) s(t_l - tau_tot).
SnapshotSet synthesize_snapshots(const ChannelRealization& realization, const PhaseSchedule& schedule,
                                 const SampledWaveform& waveform, const ScenarioConfig& config,
                                 const SimOptions& options = {});

/// Per-sample noise variance n_0 / T_s.
double sample_noise_variance(const ScenarioConfig& config);

/// Adds i.i.d. CN(0, n_0/T_s) noise. Throws StateError on an already noisy set.
SnapshotSet add_noise(SnapshotSet snapshots, const ScenarioConfig& config, std::uint64_t seed);

/// Adds i.i.d. CN(0, variance) noise to a vector in place.
void add_complex_noise(std::span<Complex> x, double variance, Rng& rng);

/// Binary layout, all little-endian:
///   char[8] "IRSSNAP1", u32 version (1), u32 flags (bit 0: clean),
///   u64 n_sensors, u64 n_frames, u64 n_samples, f64 noise_variance,
///   then n_sensors*n_frames*n_samples pairs of f64 (re, im) in
///   (sensor, frame, sample) order.
void write_snapshots(const SnapshotSet& snapshots, const std::filesystem::path& path);
SnapshotSet read_snapshots(const std::filesystem::path& path);

}  // namespace irsloc
