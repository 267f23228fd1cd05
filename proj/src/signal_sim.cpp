#include "irsloc/signal_sim.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <random>
#include <string>

#include "irsloc/arrays.hpp"

namespace irsloc {

ChannelRealization draw_realization(const ScenarioConfig& config, const DerivedGeometry& geom, std::uint64_t seed,
                                    std::optional<Complex> forced_alpha) {
  ChannelRealization r;
  r.geom = geom;
  if (forced_alpha) {
    r.alpha = *forced_alpha;
  } else {
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    const double re = normal(rng);
    const double im = normal(rng);
    r.alpha = {re, im};
  }
  r.beta_target = r.alpha * std::sqrt(config.tx_power * config.n_bs) * geom.beta_b2i * geom.beta_i2s;
  return r;
}

SnapshotSet::SnapshotSet(int n_sensors, int n_frames, int n_samples)
    : n_sensors_(n_sensors),
      n_frames_(n_frames),
      n_samples_(n_samples),
      data_(static_cast<size_t>(n_sensors) * n_frames * n_samples) {
  if (n_sensors < 1 || n_frames < 1 || n_samples < 1) throw DimensionError("snapshot dimensions must be >= 1");
}

SnapshotSet synthesize_snapshots(const ChannelRealization& realization, const PhaseSchedule& schedule,
                                 const SampledWaveform& waveform, const ScenarioConfig& config,
                                 const SimOptions& options) {
  if (schedule.n_reflectors() != config.n_reflectors || schedule.n_frames() != config.n_frames) {
    throw DimensionError("schedule is " + std::to_string(schedule.n_reflectors()) + "x" +
                         std::to_string(schedule.n_frames()) + ", config expects " +
                         std::to_string(config.n_reflectors) + "x" + std::to_string(config.n_frames));
  }
  if (waveform.size() != config.waveform.n_samples) {
    throw DimensionError("waveform has " + std::to_string(waveform.size()) + " samples, config expects " +
                         std::to_string(config.waveform.n_samples));
  }
  const auto& geom = realization.geom;
  const Eigen::VectorXcd delayed = apply_fractional_delay(waveform, geom.tau_tot);
  const Eigen::VectorXcd bs = ula_steering(config.n_sensors, geom.mu_i2u);
  const Eigen::VectorXcd g = effective_gain(schedule, geom.mu_i2u, geom.mu_b2i_aoa);

  SnapshotSet out(config.n_sensors, config.n_frames, waveform.size());
  for (int s = 0; s < config.n_sensors; ++s) {
    for (int n = 0; n < config.n_frames; ++n) {
      const Complex scale = realization.beta_target * bs[s] * g[n];
      for (int l = 0; l < waveform.size(); ++l) out.at(s, n, l) = scale * delayed[l];
    }
  }

  if (options.leakage != Complex{}) {
    // Sensors share the IRS phase center, so the BS-sensor link has the
    // BS-IRS distance, direction and delay.
    const Eigen::VectorXcd direct = apply_fractional_delay(waveform, geom.tau_b2i);
    const Eigen::VectorXcd b_direct = ula_steering(config.n_sensors, geom.mu_b2i_aoa);
    const Complex amp = options.leakage * std::sqrt(config.tx_power * config.n_bs) * geom.beta_b2i;
    for (int s = 0; s < config.n_sensors; ++s) {
      for (int n = 0; n < config.n_frames; ++n) {
        for (int l = 0; l < waveform.size(); ++l) out.at(s, n, l) += amp * b_direct[s] * direct[l];
      }
    }
  }
  out.noise_variance = sample_noise_variance(config);
  out.clean = true;
  return out;
}

double sample_noise_variance(const ScenarioConfig& config) {
  return config.noise_psd / config.waveform.sample_period();
}

void add_complex_noise(std::span<Complex> x, double variance, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(0.5 * variance));
  for (auto& v : x) {
    const double re = normal(rng);
    const double im = normal(rng);
    v += Complex(re, im);
  }
}

SnapshotSet add_noise(SnapshotSet snapshots, const ScenarioConfig& config, std::uint64_t seed) {
  if (!snapshots.clean) throw StateError("snapshots already contain noise");
  snapshots.noise_variance = sample_noise_variance(config);
  Rng rng(seed);
  add_complex_noise(snapshots.data(), snapshots.noise_variance, rng);
  snapshots.clean = false;
  return snapshots;
}

namespace {

constexpr std::array<char, 8> kMagic{'I', 'R', 'S', 'S', 'N', 'A', 'P', '1'};

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(sizeof(T) == 4 || sizeof(T) == 8);
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits;
  std::memcpy(&bits, &value, sizeof bits);
  for (size_t i = 0; i < sizeof bits; ++i) out.put(static_cast<char>((bits >> (8 * i)) & 0xffu));
}

template <typename T>
T get_le(std::istream& in) {
  using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
  U bits = 0;
  for (size_t i = 0; i < sizeof bits; ++i) {
    const int c = in.get();
    if (c == std::char_traits<char>::eof()) throw IoError("truncated snapshot file");
    bits |= static_cast<U>(static_cast<unsigned char>(c)) << (8 * i);
  }
  T value;
  std::memcpy(&value, &bits, sizeof value);
  return value;
}

}  // namespace

void write_snapshots(const SnapshotSet& snapshots, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write snapshot file " + path.string());
  out.write(kMagic.data(), kMagic.size());
  put_le<std::uint32_t>(out, 1);
  put_le<std::uint32_t>(out, snapshots.clean ? 1u : 0u);
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(snapshots.n_sensors()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(snapshots.n_frames()));
  put_le<std::uint64_t>(out, static_cast<std::uint64_t>(snapshots.n_samples()));
  put_le<double>(out, snapshots.noise_variance);
  for (const Complex& v : snapshots.data()) {
    put_le<double>(out, v.real());
    put_le<double>(out, v.imag());
  }
  if (!out) throw IoError("write failed for " + path.string());
}

SnapshotSet read_snapshots(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open snapshot file " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw IoError(path.string() + " is not a snapshot file");
  const auto version = get_le<std::uint32_t>(in);
  if (version != 1) throw IoError("unsupported snapshot file version " + std::to_string(version));
  const auto flags = get_le<std::uint32_t>(in);
  const auto ns = get_le<std::uint64_t>(in);
  const auto nf = get_le<std::uint64_t>(in);
  const auto nl = get_le<std::uint64_t>(in);
  SnapshotSet s(static_cast<int>(ns), static_cast<int>(nf), static_cast<int>(nl));
  s.noise_variance = get_le<double>(in);
  s.clean = (flags & 1u) != 0;
  for (Complex& v : s.data()) {
    const double re = get_le<double>(in);
    const double im = get_le<double>(in);
    v = {re, im};
  }
  return s;
}

}  // namespace irsloc
