#include "irsloc/crb.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Eigenvalues>
#include <nlohmann/json.hpp>

#include "irsloc/arrays.hpp"

namespace irsloc {

FimChannel fim_channel_frame(const ChannelRealization& realization, const Complex& gain, const Complex& gain_derivative,
                             const SampledWaveform& waveform, const ScenarioConfig& config) {
  if (!(waveform.energy > 0.0)) throw DegenerateWaveformError("waveform has zero energy");
  const double a = 2.0 / config.noise_psd;
  const double ns = config.n_sensors;
  const double es = waveform.energy;
  const double w2 = waveform.msq_bandwidth;
  const Complex x = waveform.cross_term;
  const Complex beta = realization.beta_target;
  const double beta2 = std::norm(beta);
  const double g2 = std::norm(gain);
  const double gd2 = std::norm(gain_derivative);
  const Complex g_conj_gd = std::conj(gain) * gain_derivative;
  const double aperture = kPi * kPi * ns * (ns * ns - 1.0) / 12.0;  // -b_s^H b_s_ddot

  const double f_tt = a * beta2 * ns * g2 * w2 * es;
  const double f_tm = a * beta2 * ns * (g_conj_gd * std::conj(x)).real();
  const double f_tr = a * ns * g2 * (beta * x).real();
  const double f_ti = -a * ns * g2 * (kJ * beta * x).real();
  const double f_mm = a * beta2 * es * (ns * gd2 + aperture * g2);
  const double f_mr = a * es * ns * (beta * g_conj_gd).real();
  const double f_mi = a * es * ns * (beta * g_conj_gd).imag();
  const double f_bb = a * ns * g2 * es;

  FimChannel f;
  f.matrix << f_tt, f_tm, f_tr, f_ti,  //
      f_tm, f_mm, f_mr, f_mi,          //
      f_tr, f_mr, f_bb, 0.0,           //
      f_ti, f_mi, 0.0, f_bb;
  return f;
}

FimChannel fim_channel(const ChannelRealization& realization, const PhaseSchedule& schedule,
                       const SampledWaveform& waveform, const ScenarioConfig& config) {
  if (schedule.n_reflectors() != config.n_reflectors) throw DimensionError("schedule/config reflector count mismatch");
  const auto& geom = realization.geom;
  const Eigen::VectorXcd g = effective_gain(schedule, geom.mu_i2u, geom.mu_b2i_aoa, 0);
  const Eigen::VectorXcd gd = effective_gain(schedule, geom.mu_i2u, geom.mu_b2i_aoa, 1);
  FimChannel total;
  for (int n = 0; n < schedule.n_frames(); ++n) {
    total.matrix += fim_channel_frame(realization, g[n], gd[n], waveform, config).matrix;
  }
  return total;
}

namespace {

// Noiseless mean signal for perturbed channel parameters, flattened over
// (sensor, frame, sample). The time grid is anchored at the true delay, so
// a delay offset dtau shows up as s(t_l - dtau).
Eigen::VectorXcd mean_signal(double dtau, double mu, Complex beta, const PhaseSchedule& schedule, double mu_b2i,
                             const SampledWaveform& waveform, int n_sensors) {
  const Eigen::VectorXcd bs = ula_steering(n_sensors, mu);
  const Eigen::VectorXcd g = effective_gain(schedule, mu, mu_b2i);
  const int nf = schedule.n_frames();
  const int nl = waveform.size();
  Eigen::VectorXcd s(nl);
  for (int l = 0; l < nl; ++l) s[l] = chirp_value(waveform.spec, sample_time(waveform.spec, l) - dtau);
  Eigen::VectorXcd out(static_cast<Eigen::Index>(n_sensors) * nf * nl);
  Eigen::Index idx = 0;
  for (int i = 0; i < n_sensors; ++i) {
    for (int n = 0; n < nf; ++n) {
      const Complex scale = beta * bs[i] * g[n];
      for (int l = 0; l < nl; ++l) out[idx++] = scale * s[l];
    }
  }
  return out;
}

}  // namespace

NumericFim numeric_fim_oracle(const ChannelRealization& realization, const PhaseSchedule& schedule,
                              const SampledWaveform& waveform, const ScenarioConfig& config) {
  const double mu = realization.geom.mu_i2u;
  const double mu_b2i = realization.geom.mu_b2i_aoa;
  const Complex beta = realization.beta_target;
  const int ns = config.n_sensors;

  const double h_tau = 1e-12;
  const double h_mu = 1e-7;
  const double h_beta = std::abs(beta) > 0.0 ? 1e-3 * std::abs(beta) : 1.0;

  auto signal = [&](double dtau, double m, Complex b) {
    return mean_signal(dtau, m, b, schedule, mu_b2i, waveform, ns);
  };

  const Eigen::Index len = static_cast<Eigen::Index>(ns) * schedule.n_frames() * waveform.size();
  Eigen::MatrixXcd d(len, 4);
  d.col(0) = (signal(h_tau, mu, beta) - signal(-h_tau, mu, beta)) / (2.0 * h_tau);
  d.col(1) = (signal(0.0, mu + h_mu, beta) - signal(0.0, mu - h_mu, beta)) / (2.0 * h_mu);
  d.col(2) = (signal(0.0, mu, beta + h_beta) - signal(0.0, mu, beta - h_beta)) / (2.0 * h_beta);
  d.col(3) = (signal(0.0, mu, beta + kJ * h_beta) - signal(0.0, mu, beta - kJ * h_beta)) / (2.0 * h_beta);

  const double scale = 2.0 / config.noise_psd * waveform.sample_period;
  Eigen::Matrix4d raw;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) raw(i, j) = scale * d.col(i).dot(d.col(j)).real();
  }
  NumericFim out;
  const double peak = raw.cwiseAbs().maxCoeff();
  out.asymmetry = peak > 0.0 ? (raw - raw.transpose()).cwiseAbs().maxCoeff() / peak : 0.0;
  out.fim.matrix = 0.5 * (raw + raw.transpose());
  return out;
}

Eigen::Matrix4d fim_position(const FimChannel& fim, const ChannelJacobian& jacobian) {
  return jacobian.matrix.transpose() * fim.matrix * jacobian.matrix;
}

Eigen::Matrix4d invert_fim(const Eigen::Matrix4d& fim) {
  const Eigen::Vector4d diag = fim.diagonal();
  Eigen::Vector4d inv_sqrt;
  for (int i = 0; i < 4; ++i) {
    if (!(diag[i] > 0.0) || !std::isfinite(diag[i])) {
      Eigen::Vector4d e = Eigen::Vector4d::Zero();
      e[i] = 1.0;
      throw SingularFimError("FIM has no information on parameter " + std::to_string(i), e);
    }
    inv_sqrt[i] = 1.0 / std::sqrt(diag[i]);
  }
  const Eigen::Matrix4d normalized = inv_sqrt.asDiagonal() * fim * inv_sqrt.asDiagonal();
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d> eig(normalized);
  const Eigen::Vector4d values = eig.eigenvalues();
  if (!(values[0] > 1e-12 * values[3])) {
    const Eigen::Vector4d null_dir = (inv_sqrt.asDiagonal() * eig.eigenvectors().col(0)).normalized();
    throw SingularFimError("FIM is singular (normalized eigenvalue " + std::to_string(values[0]) + ")", null_dir);
  }
  const Eigen::Matrix4d inv_normalized =
      eig.eigenvectors() * values.cwiseInverse().asDiagonal() * eig.eigenvectors().transpose();
  return inv_sqrt.asDiagonal() * inv_normalized * inv_sqrt.asDiagonal();
}

CrbReport crb_position(const FimChannel& fim, const ChannelJacobian& jacobian) {
  CrbReport r;
  r.fim_channel = fim.matrix;
  r.fim_position = fim_position(fim, jacobian);
  const Eigen::Matrix4d channel_inv = invert_fim(fim.matrix);
  const Eigen::Matrix4d position_inv = invert_fim(r.fim_position);
  r.crb_tau = channel_inv(0, 0);
  r.crb_mu = channel_inv(1, 1);
  r.crb_position = position_inv(0, 0) + position_inv(1, 1);
  return r;
}

CrbReport compute_crb(const ChannelRealization& realization, const PhaseSchedule& schedule,
                      const SampledWaveform& waveform, const ScenarioConfig& config) {
  const FimChannel f = fim_channel(realization, schedule, waveform, config);
  return crb_position(f, channel_jacobian(config, realization.geom));
}

ClosedFormCrb closed_form_crb(const ScenarioConfig& config, const ChannelRealization& realization,
                              const SampledWaveform& waveform) {
  if (!(waveform.energy > 0.0)) throw DegenerateWaveformError("waveform has zero energy");
  const double n0 = config.noise_psd;
  const double beta2 = std::norm(realization.beta_target);
  const double ns = config.n_sensors;
  const double nr2 = static_cast<double>(config.n_reflectors) * config.n_reflectors;
  const double nf = config.n_frames;
  const double es = waveform.energy;
  ClosedFormCrb c;
  c.crb_tau = n0 / (2.0 * beta2 * ns * nr2 * nf * waveform.msq_bandwidth * es);
  const double aperture = ns * (ns - 1.0) * (ns + 1.0);
  c.crb_mu = aperture > 0.0 ? 6.0 * n0 / (kPi * kPi * aperture * nr2 * nf * beta2 * es)
                            : std::numeric_limits<double>::infinity();
  return c;
}

ClosedFormCrb closed_form_crb(const ScenarioConfig& config, const DerivedGeometry& geom,
                              const SampledWaveform& waveform) {
  return closed_form_crb(config, draw_realization(config, geom, 0, Complex{1.0, 0.0}), waveform);
}

double split_objective_value(int n_reflectors, int n_sensors, SplitObjective objective) {
  const double nr = n_reflectors;
  const double ns = n_sensors;
  if (objective == SplitObjective::kToa) {
    if (n_sensors < 1 || n_reflectors < 1) return std::numeric_limits<double>::infinity();
    return 1.0 / (ns * nr * nr);
  }
  if (n_sensors < 2 || n_reflectors < 1) return std::numeric_limits<double>::infinity();
  return 1.0 / (ns * (ns * ns - 1.0) * nr * nr);
}

namespace {

// Exact integer form of the reciprocal objective (larger is better).
unsigned __int128 split_gain(int nr, int ns, SplitObjective objective) {
  const auto r = static_cast<unsigned __int128>(nr);
  const auto s = static_cast<unsigned __int128>(ns);
  if (objective == SplitObjective::kToa) return ns >= 1 ? r * r * s : 0;
  return ns >= 2 ? r * r * s * (s * s - 1) : 0;
}

int min_sensors(SplitObjective objective) { return objective == SplitObjective::kToa ? 1 : 2; }

}  // namespace

ElementSplit optimal_split(int total_n, SplitObjective objective, SplitMode mode) {
  if (total_n < 3) throw ConfigError("element budget must be >= 3, got " + std::to_string(total_n));
  if (total_n > 1'000'000) throw ConfigError("element budget too large");
  const int nr_max = total_n - min_sensors(objective);

  ElementSplit best;
  if (mode == SplitMode::kBruteForce) {
    unsigned __int128 best_gain = 0;
    for (int nr = 1; nr <= nr_max; ++nr) {
      const auto gain = split_gain(nr, total_n - nr, objective);
      if (gain > best_gain) {
        best_gain = gain;
        best.n_reflectors = nr;
      }
    }
    best.continuous_n_reflectors = best.n_reflectors;
  } else {
    const double n = total_n;
    double nr_star = 0.0;
    if (objective == SplitObjective::kToa) {
      nr_star = 2.0 * n / 3.0;
    } else {
      const double p = (n * n * n - 5.0 * n) / 125.0;
      const double q = std::sqrt(n * n * n * n - 2.0 * n * n - 5.0) / 25.0;
      nr_star = std::cbrt(p + q) + std::cbrt(p - q);
    }
    best.continuous_n_reflectors = nr_star;
    const int lo = std::clamp(static_cast<int>(std::floor(nr_star)), 1, nr_max);
    const int hi = std::clamp(static_cast<int>(std::ceil(nr_star)), 1, nr_max);
    best.n_reflectors =
        split_gain(hi, total_n - hi, objective) > split_gain(lo, total_n - lo, objective) ? hi : lo;
  }
  best.n_sensors = total_n - best.n_reflectors;
  return best;
}

void to_json(nlohmann::json& j, const CrbReport& r) {
  auto matrix = [](const Eigen::Matrix4d& m) {
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < 4; ++i) rows.push_back({m(i, 0), m(i, 1), m(i, 2), m(i, 3)});
    return rows;
  };
  j = {{"crb_tau", r.crb_tau},
       {"crb_mu", r.crb_mu},
       {"crb_position", r.crb_position},
       {"fim_channel", matrix(r.fim_channel)},
       {"fim_position", matrix(r.fim_position)},
       {"closed_form_used", r.closed_form_used}};
}

}  // namespace irsloc
