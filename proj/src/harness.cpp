#include "irsloc/harness.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>

#include <nlohmann/json.hpp>

#include "irsloc/arrays.hpp"
#include "irsloc/crb.hpp"
#include "irsloc/parallel.hpp"
#include "irsloc/rng.hpp"

namespace irsloc {

std::string_view to_string(Scheme s) {
  switch (s) {
    case Scheme::kSemiPassiveDft:
      return "semi_passive_dft";
    case Scheme::kSemiPassiveRandom:
      return "semi_passive_random";
    case Scheme::kFullyPassive:
      return "fully_passive";
    case Scheme::kCrbCurve:
      return "crb_curve";
  }
  return "unknown";
}

Scheme scheme_from_string(std::string_view name) {
  if (name == "semi_passive_dft") return Scheme::kSemiPassiveDft;
  if (name == "semi_passive_random") return Scheme::kSemiPassiveRandom;
  if (name == "fully_passive") return Scheme::kFullyPassive;
  if (name == "crb_curve") return Scheme::kCrbCurve;
  throw ConfigError("unknown scheme '" + std::string(name) + "'");
}

std::string_view to_string(SweepVariable v) {
  switch (v) {
    case SweepVariable::kTxPowerDbm:
      return "tx_power_dbm";
    case SweepVariable::kNReflectors:
      return "n_reflectors";
    case SweepVariable::kNSensors:
      return "n_sensors";
    case SweepVariable::kNFrames:
      return "n_frames";
  }
  return "unknown";
}

SweepVariable sweep_variable_from_string(std::string_view name) {
  if (name == "tx_power_dbm") return SweepVariable::kTxPowerDbm;
  if (name == "n_reflectors") return SweepVariable::kNReflectors;
  if (name == "n_sensors") return SweepVariable::kNSensors;
  if (name == "n_frames") return SweepVariable::kNFrames;
  throw ConfigError("unknown sweep variable '" + std::string(name) + "'");
}

void ExperimentSpec::validate() const {
  base.validate();
  if (schemes.empty()) throw ConfigError("experiment needs at least one scheme");
  if (values.empty()) throw ConfigError("experiment needs at least one sweep value");
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (doa_grid < 2 || toa_grid < 1) throw ConfigError("search grids are too small");
  for (size_t i = 1; i < values.size(); ++i) {
    if (!(values[i] > values[i - 1])) throw ConfigError("sweep values must be strictly increasing");
  }
  for (double v : values) apply_sweep_value(base, variable, v);
}

ScenarioConfig apply_sweep_value(const ScenarioConfig& base, SweepVariable variable, double value) {
  ScenarioConfig c = base;
  auto as_count = [&](double v) {
    if (v != std::round(v) || v < 1.0) {
      throw ConfigError(std::string(to_string(variable)) + " value " + std::to_string(v) + " is not a count");
    }
    return static_cast<int>(v);
  };
  switch (variable) {
    case SweepVariable::kTxPowerDbm:
      c.tx_power = dbm_to_watts(value);
      break;
    case SweepVariable::kNReflectors:
      c.n_reflectors = as_count(value);
      break;
    case SweepVariable::kNSensors:
      c.n_sensors = as_count(value);
      break;
    case SweepVariable::kNFrames:
      c.n_frames = as_count(value);
      break;
  }
  c.validate();
  return c;
}

std::pair<double, double> reference_root_crb(const ScenarioConfig& config, ScheduleKind kind) {
  const DerivedGeometry geom = derive_geometry(config);
  const SampledWaveform waveform = build_waveform(config.waveform);
  const ChannelRealization nominal = draw_realization(config, geom, 0, Complex{1.0, 0.0});
  const PhaseSchedule schedule = make_schedule(kind, config.n_reflectors, config.n_frames, geom, 0);
  try {
    const CrbReport r = compute_crb(nominal, schedule, waveform, config);
    return {std::sqrt(r.crb_mu), std::sqrt(r.crb_position)};
  } catch (const SingularFimError&) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan};
  }
}

namespace {

TrialOutcome score(const EstimationResult& r, const ScenarioConfig& config, const DerivedGeometry& geom) {
  TrialOutcome o;
  o.low_confidence = r.low_confidence;
  if (!r.feasible) {
    o.failure = "infeasible location";
    return o;
  }
  o.ok = true;
  o.mu_error = r.mu_hat - geom.mu_i2u;
  o.position_error = std::hypot(r.x_hat - config.q_target.x, r.y_hat - config.q_target.y);
  return o;
}

}  // namespace

TrialOutcome semi_passive_trial(const ScenarioConfig& config, ScheduleKind kind, std::uint64_t master_seed,
                                std::uint64_t trial, const PipelineOptions& options) {
  try {
    const DerivedGeometry geom = derive_geometry(config);
    const SampledWaveform waveform = build_waveform(config.waveform);
    const PhaseSchedule schedule = make_schedule(kind, config.n_reflectors, config.n_frames, geom,
                                                 derive_seed(master_seed, trial, Stream::kSchedule));
    const ChannelRealization real = draw_realization(config, geom, derive_seed(master_seed, trial, Stream::kFading));
    const SnapshotSet snaps = add_noise(synthesize_snapshots(real, schedule, waveform, config), config,
                                        derive_seed(master_seed, trial, Stream::kNoise));
    return score(estimate_pipeline(snaps, schedule, waveform, config, geom, options), config, geom);
  } catch (const Error& e) {
    TrialOutcome o;
    o.failure = e.what();
    return o;
  }
}

SnapshotSet synthesize_fully_passive(const ChannelRealization& realization, const PhaseSchedule& schedule,
                                     const SampledWaveform& waveform, const ScenarioConfig& config) {
  if (schedule.n_reflectors() != config.n_reflectors || schedule.n_frames() != config.n_frames) {
    throw DimensionError("schedule dimensions do not match the config");
  }
  const auto& geom = realization.geom;
  const Complex beta_fp = realization.beta_target * geom.beta_b2i;
  const Eigen::VectorXcd delayed = apply_fractional_delay(waveform, 2.0 * geom.tau_b2i + 2.0 * geom.tau_i2u);
  const Eigen::VectorXcd a_rx = ula_steering(config.n_sensors, geom.mu_b2i_aod);
  // IRS reflection on the way out and on the way back: Theta is diagonal,
  // so both passes give the same cascade gain.
  const Eigen::VectorXcd g = effective_gain(schedule, geom.mu_i2u, geom.mu_b2i_aoa);

  SnapshotSet out(config.n_sensors, config.n_frames, waveform.size());
  for (int a = 0; a < config.n_sensors; ++a) {
    for (int n = 0; n < config.n_frames; ++n) {
      const Complex scale = beta_fp * a_rx[a] * g[n] * g[n];
      for (int l = 0; l < waveform.size(); ++l) out.at(a, n, l) = scale * delayed[l];
    }
  }
  out.noise_variance = sample_noise_variance(config);
  return out;
}

EstimationResult fully_passive_estimate(const SnapshotSet& received, const PhaseSchedule& schedule,
                                        const SampledWaveform& waveform, const ScenarioConfig& config,
                                        const DerivedGeometry& geom, const PipelineOptions& options) {
  if (schedule.kind != ScheduleKind::kDftScan || schedule.scan_grid.size() != static_cast<size_t>(received.n_frames())) {
    throw ConfigError("fully-passive beam sweep needs a dft_scan schedule");
  }
  const int na = received.n_sensors();
  const int nf = received.n_frames();
  const int nl = received.n_samples();
  const Eigen::VectorXcd a_rx = ula_steering(na, geom.mu_b2i_aod);

  // Receive beamforming towards the IRS, frame by frame.
  Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(nf, nl);
  for (int n = 0; n < nf; ++n) {
    for (int l = 0; l < nl; ++l) {
      Complex acc{};
      for (int a = 0; a < na; ++a) acc += std::conj(a_rx[a]) * received.at(a, n, l);
      z(n, l) = acc;
    }
  }
  int best = 0;
  double best_energy = -1.0;
  for (int n = 0; n < nf; ++n) {
    const double e = z.row(n).squaredNorm();
    if (e > best_energy) {
      best_energy = e;
      best = n;
    }
  }
  EstimationResult r;
  r.mu_hat = schedule.scan_grid[static_cast<size_t>(best)];
  r.low_confidence = nf == 1;

  const Eigen::VectorXcd z_sum = z.colwise().sum().transpose();
  const ToaEstimate toa = estimate_toa_beta(z_sum, waveform, options.toa_grid, options.refine);
  r.tau_tot_hat = toa.tau_hat;
  r.beta_bar_hat = toa.beta_bar_hat;
  const Eigen::VectorXcd g = effective_gain(schedule, r.mu_hat, geom.mu_b2i_aoa);
  const Complex scale = static_cast<double>(na) * g.cwiseProduct(g).sum() * geom.beta_b2i;
  r.beta_target_hat = scale != Complex{} ? toa.beta_bar_hat / scale
                                         : Complex{std::numeric_limits<double>::quiet_NaN(), 0.0};
  const LocationEstimate loc =
      solve_location_from_range(r.mu_hat, 0.5 * (toa.tau_hat - 2.0 * geom.tau_b2i), config);
  r.x_hat = loc.x_hat;
  r.y_hat = loc.y_hat;
  r.feasible = loc.feasible;
  if (options.keep_curves) r.toa_objective = toa.objective;
  return r;
}

TrialOutcome fully_passive_trial(const ScenarioConfig& config, std::uint64_t master_seed, std::uint64_t trial,
                                 const PipelineOptions& options) {
  try {
    const DerivedGeometry geom = derive_geometry(config);
    const SampledWaveform waveform = build_waveform(config.waveform);
    const PhaseSchedule schedule = make_schedule(ScheduleKind::kDftScan, config.n_reflectors, config.n_frames, geom);
    const ChannelRealization real = draw_realization(config, geom, derive_seed(master_seed, trial, Stream::kFading));
    const SnapshotSet received = add_noise(synthesize_fully_passive(real, schedule, waveform, config), config,
                                           derive_seed(master_seed, trial, Stream::kNoise));
    return score(fully_passive_estimate(received, schedule, waveform, config, geom, options), config, geom);
  } catch (const Error& e) {
    TrialOutcome o;
    o.failure = e.what();
    return o;
  }
}

PointStats run_monte_carlo(const ScenarioConfig& config, Scheme scheme, int trials, std::uint64_t master_seed,
                           const PipelineOptions& options, ScheduleKind crb_schedule, unsigned threads) {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  const auto start = std::chrono::steady_clock::now();
  PointStats p;
  p.scheme = scheme;
  std::tie(p.crb_mu, p.crb_position) = reference_root_crb(config, crb_schedule);

  if (scheme == Scheme::kCrbCurve) {
    p.rmse_mu = p.crb_mu;
    p.rmse_position = p.crb_position;
  } else {
    std::vector<TrialOutcome> outcomes(static_cast<size_t>(trials));
    parallel_for(outcomes.size(), threads, [&](size_t t) {
      switch (scheme) {
        case Scheme::kSemiPassiveDft:
          outcomes[t] = semi_passive_trial(config, ScheduleKind::kDftScan, master_seed, t, options);
          break;
        case Scheme::kSemiPassiveRandom:
          outcomes[t] = semi_passive_trial(config, ScheduleKind::kRandom, master_seed, t, options);
          break;
        case Scheme::kFullyPassive:
          outcomes[t] = fully_passive_trial(config, master_seed, t, options);
          break;
        case Scheme::kCrbCurve:
          break;
      }
    });
    double sum_mu = 0.0;
    double sum_pos = 0.0;
    for (const TrialOutcome& o : outcomes) {
      if (!o.ok) {
        ++p.trials_failed;
        continue;
      }
      ++p.trials_ok;
      sum_mu += o.mu_error * o.mu_error;
      sum_pos += o.position_error * o.position_error;
    }
    if (p.trials_ok > 0) {
      p.rmse_mu = std::sqrt(sum_mu / p.trials_ok);
      p.rmse_position = std::sqrt(sum_pos / p.trials_ok);
    } else {
      p.rmse_mu = p.rmse_position = std::numeric_limits<double>::quiet_NaN();
    }
    p.invalid = 2 * p.trials_failed > trials;
  }
  p.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return p;
}

SweepResult run_sweep(const ExperimentSpec& spec) {
  spec.validate();
  const auto start = std::chrono::steady_clock::now();
  SweepResult result;
  result.spec = spec;
  PipelineOptions options;
  options.doa_grid = spec.doa_grid;
  options.toa_grid = spec.toa_grid;
  for (double value : spec.values) {
    const ScenarioConfig config = apply_sweep_value(spec.base, spec.variable, value);
    for (Scheme scheme : spec.schemes) {
      PointStats p = run_monte_carlo(config, scheme, spec.trials, spec.master_seed, options, spec.crb_schedule,
                                     spec.threads);
      p.sweep_value = value;
      result.rows.push_back(p);
    }
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

namespace {

std::string fmt_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

std::string sweep_csv(const SweepResult& result) {
  std::string out = "scheme,sweep_var,sweep_value,trials_ok,trials_failed,rmse_mu,rmse_pos_m,crb_mu,crb_pos_m\n";
  const std::string var(to_string(result.spec.variable));
  for (const PointStats& p : result.rows) {
    out += std::string(to_string(p.scheme)) + "," + var + "," + fmt_double(p.sweep_value) + "," +
           std::to_string(p.trials_ok) + "," + std::to_string(p.trials_failed) + "," + fmt_double(p.rmse_mu) + "," +
           fmt_double(p.rmse_position) + "," + fmt_double(p.crb_mu) + "," + fmt_double(p.crb_position) + "\n";
  }
  return out;
}

nlohmann::json sweep_manifest(const SweepResult& result) {
  nlohmann::json rows = nlohmann::json::array();
  for (const PointStats& p : result.rows) {
    rows.push_back({{"scheme", to_string(p.scheme)},
                    {"sweep_value", p.sweep_value},
                    {"invalid", p.invalid},
                    {"wall_seconds", p.wall_seconds}});
  }
  return {{"version", kVersion},
          {"spec", result.spec},
          {"seed_derivation", "splitmix64(splitmix64(splitmix64(master_seed) ^ trial) ^ stream); "
                              "streams: fading=1, noise=2, schedule=3"},
          {"crb_reference", "sqrt of CRB(mu) and of CRB(x)+CRB(y), general FIM, |alpha| = 1"},
          {"rows", rows},
          {"wall_seconds", result.wall_seconds}};
}

void emit_sweep(const SweepResult& result, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  {
    const auto path = dir / "sweep.csv";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    out << sweep_csv(result);
    if (!out) throw IoError("write failed for " + path.string());
  }
  {
    const auto path = dir / "manifest.json";
    std::ofstream out(path);
    if (!out) throw IoError("cannot write " + path.string());
    out << sweep_manifest(result).dump(2) << '\n';
    if (!out) throw IoError("write failed for " + path.string());
  }
}

void to_json(nlohmann::json& j, const ExperimentSpec& s) {
  nlohmann::json schemes = nlohmann::json::array();
  for (Scheme sc : s.schemes) schemes.push_back(to_string(sc));
  j = {{"scenario", s.base},
       {"sweep", {{"variable", to_string(s.variable)}, {"values", s.values}}},
       {"trials", s.trials},
       {"schemes", schemes},
       {"master_seed", s.master_seed},
       {"grid_doa", s.doa_grid},
       {"grid_toa", s.toa_grid},
       {"crb_schedule", to_string(s.crb_schedule)}};
}

void from_json(const nlohmann::json& j, ExperimentSpec& s) {
  try {
    s = ExperimentSpec{};
    if (j.contains("scenario")) s.base = j["scenario"].get<ScenarioConfig>();
    const auto& sweep = j.at("sweep");
    s.variable = sweep_variable_from_string(sweep.at("variable").get<std::string>());
    s.values = sweep.at("values").get<std::vector<double>>();
    if (j.contains("trials")) s.trials = j["trials"].get<int>();
    if (j.contains("schemes")) {
      for (const auto& name : j["schemes"]) s.schemes.push_back(scheme_from_string(name.get<std::string>()));
    }
    if (j.contains("master_seed")) s.master_seed = j["master_seed"].get<std::uint64_t>();
    if (j.contains("grid_doa")) s.doa_grid = j["grid_doa"].get<int>();
    if (j.contains("grid_toa")) s.toa_grid = j["grid_toa"].get<int>();
    if (j.contains("crb_schedule")) s.crb_schedule = schedule_kind_from_string(j["crb_schedule"].get<std::string>());
    if (j.contains("threads")) s.threads = j["threads"].get<unsigned>();
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed experiment spec: ") + e.what());
  }
}

ExperimentSpec load_experiment(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open experiment file " + path.string());
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return j.get<ExperimentSpec>();
}

}  // namespace irsloc
