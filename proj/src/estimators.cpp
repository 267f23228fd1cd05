#include "irsloc/estimators.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "irsloc/arrays.hpp"

namespace irsloc {

namespace {

size_t argmax_first(const std::vector<double>& v) {
  size_t best = 0;
  for (size_t i = 1; i < v.size(); ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

// Vertex offset in (-0.5, 0.5) of the parabola through three samples.
double parabolic_offset(double left, double center, double right) {
  const double denom = left - 2.0 * center + right;
  if (!(denom < 0.0)) return 0.0;
  return std::clamp(0.5 * (left - right) / denom, -0.5, 0.5);
}

}  // namespace

DoaEstimate estimate_doa(const SnapshotSet& snapshots, int grid_size, bool refine) {
  const int ns = snapshots.n_sensors();
  if (ns < 2) throw InsufficientApertureError("MUSIC needs at least 2 sensors, got " + std::to_string(ns));
  if (grid_size < 2) throw ConfigError("DoA grid needs at least 2 points");

  const auto y = snapshots.unfolded();
  const Eigen::MatrixXcd r = (y * y.adjoint()) / static_cast<double>(y.cols());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(r);
  // Eigenvalues ascend: the first N_s - 1 vectors span the noise subspace.
  const Eigen::MatrixXcd un = eig.eigenvectors().leftCols(ns - 1);

  DoaEstimate est;
  est.grid_size = grid_size;
  est.spectrum.resize(static_cast<size_t>(grid_size));
  for (int i = 0; i < grid_size; ++i) {
    const Eigen::VectorXcd b = ula_steering(ns, doa_grid_point(i, grid_size));
    const double denom = (un.adjoint() * b).squaredNorm();
    est.spectrum[static_cast<size_t>(i)] = denom > 0.0 ? 1.0 / denom : std::numeric_limits<double>::infinity();
  }
  const size_t best = argmax_first(est.spectrum);
  est.mu_hat = doa_grid_point(static_cast<int>(best), grid_size);
  if (refine && best > 0 && best + 1 < est.spectrum.size() && std::isfinite(est.spectrum[best])) {
    const double delta = parabolic_offset(std::log(est.spectrum[best - 1]), std::log(est.spectrum[best]),
                                          std::log(est.spectrum[best + 1]));
    est.mu_hat = std::clamp(est.mu_hat + delta * 2.0 / (grid_size - 1), -1.0, 1.0);
  }
  return est;
}

CollapsedSignal collapse_snapshots(const SnapshotSet& snapshots, std::span<const Complex> gains, double mu_hat) {
  if (static_cast<int>(gains.size()) != snapshots.n_frames()) {
    throw DimensionError("expected one gain per frame (" + std::to_string(snapshots.n_frames()) + "), got " +
                         std::to_string(gains.size()));
  }
  CollapsedSignal out;
  out.y_bar = Eigen::VectorXcd::Zero(snapshots.n_samples());
  for (int n = 0; n < snapshots.n_frames(); ++n) {
    for (int s = 0; s < snapshots.n_sensors(); ++s) {
      for (int l = 0; l < snapshots.n_samples(); ++l) out.y_bar[l] += snapshots.at(s, n, l);
    }
  }
  Complex gain_sum{};
  for (const Complex& g : gains) gain_sum += g;
  out.scale = ula_steering(snapshots.n_sensors(), mu_hat).sum() * gain_sum;
  out.noise_variance = snapshots.noise_variance * snapshots.n_frames() * snapshots.n_sensors();
  return out;
}

Complex ml_amplitude(const Eigen::VectorXcd& y_spectrum, const Eigen::VectorXcd& s_spectrum, double w) {
  const int n = static_cast<int>(s_spectrum.size());
  Complex num{};
  for (int i = 0; i < n; ++i) {
    num += std::conj(s_spectrum[i]) * y_spectrum[i] * std::polar(1.0, -w * centered_bin(i, n));
  }
  return num / s_spectrum.squaredNorm();
}

ToaEstimate estimate_toa_beta(const Eigen::VectorXcd& y_bar, const SampledWaveform& waveform, int grid_size,
                              bool refine) {
  const int n = waveform.size();
  if (y_bar.size() != n) throw DimensionError("collapsed signal length does not match the waveform");
  if (grid_size < 1) throw ConfigError("ToA grid needs at least 1 point");
  const Eigen::VectorXcd s_spec = dft(waveform.samples);
  if (!(s_spec.squaredNorm() > 0.0)) throw DegenerateWaveformError("waveform spectrum is identically zero");
  const Eigen::VectorXcd y_spec = dft(y_bar);
  const Eigen::VectorXcd z = s_spec.conjugate().cwiseProduct(y_spec);

  // exp(-j w_i k) = exp(j 2 pi i k / T_2): look the phasor up by (i k mod T_2).
  std::vector<Complex> roots(static_cast<size_t>(grid_size));
  for (int m = 0; m < grid_size; ++m) roots[static_cast<size_t>(m)] = std::polar(1.0, 2.0 * kPi * m / grid_size);

  ToaEstimate est;
  est.grid_size = grid_size;
  est.objective.resize(static_cast<size_t>(grid_size));
  for (int i = 0; i < grid_size; ++i) {
    Complex acc{};
    for (int b = 0; b < n; ++b) {
      const long long k = centered_bin(b, n);
      long long idx = (static_cast<long long>(i) * k) % grid_size;
      if (idx < 0) idx += grid_size;
      acc += z[b] * roots[static_cast<size_t>(idx)];
    }
    est.objective[static_cast<size_t>(i)] = std::norm(acc);
  }
  const size_t best = argmax_first(est.objective);
  double index = static_cast<double>(best);
  if (refine && grid_size >= 3) {
    const size_t prev = (best + grid_size - 1) % grid_size;
    const size_t next = (best + 1) % grid_size;
    index += parabolic_offset(est.objective[prev], est.objective[best], est.objective[next]);
    if (index < 0.0) index += grid_size;
  }
  est.w_hat = -2.0 * kPi * index / grid_size;
  est.tau_hat = -est.w_hat * waveform.window() / (2.0 * kPi);
  est.beta_bar_hat = ml_amplitude(y_spec, s_spec, est.w_hat);
  return est;
}

LocationEstimate solve_location_from_range(double mu_hat, double tau_i2u_hat, const ScenarioConfig& config) {
  if (tau_i2u_hat < 0.0) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6g", tau_i2u_hat);
    throw CausalityError(std::string("IRS-target delay estimate is negative (") + buf + " s)");
  }
  const double c = config.speed_of_light;
  const Vec3& irs = config.q_irs;
  const double range = c * tau_i2u_hat;
  LocationEstimate loc;
  loc.y_hat = irs.y - range * mu_hat;
  const double dy = irs.y - loc.y_hat;
  loc.radicand = range * range - dy * dy - irs.z * irs.z;
  loc.feasible = loc.radicand >= 0.0;
  loc.x_hat = std::sqrt(std::max(loc.radicand, 0.0)) + irs.x;
  return loc;
}

LocationEstimate solve_location(double mu_hat, double tau_tot_hat, const DerivedGeometry& geom,
                                const ScenarioConfig& config) {
  return solve_location_from_range(mu_hat, 0.5 * (tau_tot_hat - geom.tau_b2i), config);
}

EstimationResult estimate_pipeline(const SnapshotSet& snapshots, const PhaseSchedule& schedule,
                                   const SampledWaveform& waveform, const ScenarioConfig& config,
                                   const DerivedGeometry& geom, const PipelineOptions& options) {
  DoaEstimate doa = estimate_doa(snapshots, options.doa_grid, options.refine);
  const Eigen::VectorXcd gains = effective_gain(schedule, doa.mu_hat, geom.mu_b2i_aoa);
  const CollapsedSignal collapsed =
      collapse_snapshots(snapshots, std::span<const Complex>(gains.data(), gains.size()), doa.mu_hat);
  ToaEstimate toa = estimate_toa_beta(collapsed.y_bar, waveform, options.toa_grid, options.refine);
  const LocationEstimate loc = solve_location(doa.mu_hat, toa.tau_hat, geom, config);

  EstimationResult r;
  r.mu_hat = doa.mu_hat;
  r.tau_tot_hat = toa.tau_hat;
  r.beta_bar_hat = toa.beta_bar_hat;
  r.beta_target_hat = collapsed.scale != Complex{} ? toa.beta_bar_hat / collapsed.scale
                                                   : Complex{std::numeric_limits<double>::quiet_NaN(), 0.0};
  r.x_hat = loc.x_hat;
  r.y_hat = loc.y_hat;
  r.feasible = loc.feasible;
  if (options.keep_curves) {
    r.doa_spectrum = std::move(doa.spectrum);
    r.toa_objective = std::move(toa.objective);
  }
  return r;
}

void to_json(nlohmann::json& j, const EstimationResult& r) {
  j = {{"mu_hat", r.mu_hat},
       {"tau_tot_hat", r.tau_tot_hat},
       {"beta_bar_hat", {r.beta_bar_hat.real(), r.beta_bar_hat.imag()}},
       {"beta_target_hat", {r.beta_target_hat.real(), r.beta_target_hat.imag()}},
       {"x_hat", r.x_hat},
       {"y_hat", r.y_hat},
       {"feasible", r.feasible},
       {"low_confidence", r.low_confidence}};
}

}  // namespace irsloc
