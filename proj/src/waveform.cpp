#include "irsloc/waveform.hpp"

#include <cmath>
#include <string>
#include <vector>

#include <unsupported/Eigen/FFT>

namespace irsloc {

std::string_view to_string(ChirpKind kind) {
  switch (kind) {
    case ChirpKind::kReferenceChirp:
      return "reference_chirp";
    case ChirpKind::kCenteredChirp:
      return "centered_chirp";
  }
  return "unknown";
}

ChirpKind chirp_kind_from_string(std::string_view name) {
  if (name == "reference_chirp") return ChirpKind::kReferenceChirp;
  if (name == "centered_chirp") return ChirpKind::kCenteredChirp;
  throw ConfigError("unknown chirp kind '" + std::string(name) + "'");
}

bool is_power_of_two(long n) { return n > 0 && (n & (n - 1)) == 0; }

void ChirpSpec::validate() const {
  if (!(bandwidth > 0.0) || !std::isfinite(bandwidth)) throw ConfigError("chirp bandwidth must be positive");
  if (!std::isfinite(freq_rate)) throw ConfigError("chirp freq_rate must be finite");
  if (!is_power_of_two(n_samples)) throw ConfigError("chirp n_samples must be a positive power of two");
}

double sample_time(const ChirpSpec& spec, int l) {
  const double ts = spec.sample_period();
  switch (spec.kind) {
    case ChirpKind::kReferenceChirp:
      return l * ts;
    case ChirpKind::kCenteredChirp:
      return -0.5 * spec.duration() + (l + 0.5) * ts;
  }
  return 0.0;
}

namespace {

double centered_rate(const ChirpSpec& spec) { return 2.0 * spec.bandwidth * spec.freq_rate; }

}  // namespace

Complex chirp_value(const ChirpSpec& spec, double t) {
  double phase = 0.0;
  switch (spec.kind) {
    case ChirpKind::kReferenceChirp:
      phase = 2.0 * kPi * spec.bandwidth * (t + spec.freq_rate * t * t);
      break;
    case ChirpKind::kCenteredChirp:
      phase = kPi * centered_rate(spec) * t * t;
      break;
  }
  return std::polar(1.0, phase);
}

Complex chirp_time_derivative(const ChirpSpec& spec, double t) {
  double inst_freq = 0.0;  // rad/s
  switch (spec.kind) {
    case ChirpKind::kReferenceChirp:
      inst_freq = 2.0 * kPi * spec.bandwidth * (1.0 + 2.0 * spec.freq_rate * t);
      break;
    case ChirpKind::kCenteredChirp:
      inst_freq = 2.0 * kPi * centered_rate(spec) * t;
      break;
  }
  return kJ * inst_freq * chirp_value(spec, t);
}

SampledWaveform build_waveform(const ChirpSpec& spec) {
  spec.validate();
  SampledWaveform w;
  w.spec = spec;
  w.sample_period = spec.sample_period();
  const int n = spec.n_samples;
  w.samples.resize(n);
  w.derivative_samples.resize(n);
  for (int l = 0; l < n; ++l) {
    const double t = sample_time(spec, l);
    w.samples[l] = chirp_value(spec, t);
    w.derivative_samples[l] = -chirp_time_derivative(spec, t);
  }
  const double ts = w.sample_period;
  w.energy = w.samples.squaredNorm() * ts;
  w.msq_bandwidth = w.derivative_samples.squaredNorm() * ts / w.energy;
  w.cross_term = w.derivative_samples.cwiseProduct(w.samples.conjugate()).sum() * ts;
  return w;
}

namespace {

void require_pow2(long n) {
  if (!is_power_of_two(n)) throw DimensionError("DFT length " + std::to_string(n) + " is not a power of two");
}

}  // namespace

Eigen::VectorXcd dft(std::span<const Complex> x) {
  const long n = static_cast<long>(x.size());
  require_pow2(n);
  std::vector<Complex> in(x.begin(), x.end());
  std::vector<Complex> out;
  Eigen::FFT<double> fft;
  fft.fwd(out, in);
  Eigen::VectorXcd centered(n);
  for (long i = 0; i < n; ++i) centered[i] = out[static_cast<size_t>((i - n / 2 + n) % n)];
  return centered;
}

Eigen::VectorXcd dft(const Eigen::VectorXcd& x) { return dft(std::span<const Complex>(x.data(), x.size())); }

Eigen::VectorXcd inverse_dft(std::span<const Complex> spectrum) {
  const long n = static_cast<long>(spectrum.size());
  require_pow2(n);
  std::vector<Complex> natural(static_cast<size_t>(n));
  for (long i = 0; i < n; ++i) natural[static_cast<size_t>((i - n / 2 + n) % n)] = spectrum[static_cast<size_t>(i)];
  std::vector<Complex> out;
  Eigen::FFT<double> fft;
  fft.inv(out, natural);
  return Eigen::Map<Eigen::VectorXcd>(out.data(), n);
}

Eigen::VectorXcd inverse_dft(const Eigen::VectorXcd& spectrum) {
  return inverse_dft(std::span<const Complex>(spectrum.data(), spectrum.size()));
}

Eigen::VectorXcd apply_fractional_delay(const Eigen::VectorXcd& x, double tau, double sample_period) {
  const long n = x.size();
  const double window = sample_period * static_cast<double>(n);
  if (!(tau >= 0.0) || !(tau < window)) {
    throw RangeError("delay " + std::to_string(tau) + " s outside unambiguous window [0, " +
                     std::to_string(window) + ")");
  }
  if (tau == 0.0) return x;
  Eigen::VectorXcd spec = dft(x);
  const double w = -2.0 * kPi * tau / window;
  for (long i = 0; i < n; ++i) spec[i] *= std::polar(1.0, w * centered_bin(static_cast<int>(i), static_cast<int>(n)));
  return inverse_dft(spec);
}

Eigen::VectorXcd apply_fractional_delay(const SampledWaveform& w, double tau) {
  return apply_fractional_delay(w.samples, tau, w.sample_period);
}

}  // namespace irsloc
