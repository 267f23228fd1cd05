#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "irsloc/crb.hpp"
#include "irsloc/estimators.hpp"
#include "irsloc/harness.hpp"
#include "irsloc/irs_schedule.hpp"
#include "irsloc/rng.hpp"
#include "irsloc/scenario.hpp"
#include "irsloc/signal_sim.hpp"
#include "irsloc/waveform.hpp"

namespace {

using irsloc::Complex;
using nlohmann::json;

irsloc::ScenarioConfig scenario_from(const std::string& path) {
  return path.empty() ? irsloc::ScenarioConfig::defaults() : irsloc::load_scenario(path);
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw irsloc::IoError("cannot write " + path.string());
  out << text;
  if (!out) throw irsloc::IoError("write failed for " + path.string());
}

void emit_json(const json& j, const std::string& out_dir, const std::string& name) {
  if (out_dir.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    write_text(std::filesystem::path(out_dir) / name, j.dump(2) + "\n");
  }
}

std::string curve_csv(const std::string& header, const std::vector<double>& values, double (*axis)(int, int)) {
  std::string s = header + "\n";
  char buf[96];
  const int n = static_cast<int>(values.size());
  for (int i = 0; i < n; ++i) {
    std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g\n", i, axis(i, n), values[static_cast<size_t>(i)]);
    s += buf;
  }
  return s;
}

double toa_axis(int i, int n) { return -2.0 * irsloc::kPi * i / n; }

struct CommonOptions {
  std::string config;
  std::uint64_t seed = 1;
  std::string out;
  int grid_doa = 4096;
  int grid_toa = 8192;
};

int run_crb(const CommonOptions& o, const std::string& schedule_name) {
  const auto config = scenario_from(o.config);
  const auto geom = irsloc::derive_geometry(config);
  const auto waveform = irsloc::build_waveform(config.waveform);
  const auto kind = irsloc::schedule_kind_from_string(schedule_name);
  const auto schedule = irsloc::make_schedule(kind, config.n_reflectors, config.n_frames, geom,
                                              irsloc::derive_seed(o.seed, 0, irsloc::Stream::kSchedule));
  const auto nominal = irsloc::draw_realization(config, geom, 0, Complex{1.0, 0.0});
  json j;
  j["scenario"] = config;
  j["geometry"] = geom;
  j["schedule"] = irsloc::to_string(kind);
  j["alpha"] = {1.0, 0.0};
  try {
    j["crb"] = irsloc::compute_crb(nominal, schedule, waveform, config);
  } catch (const irsloc::SingularFimError& e) {
    std::vector<double> null_dir(e.null_direction().data(), e.null_direction().data() + e.null_direction().size());
    j["crb"] = {{"error", e.what()}, {"null_direction", null_dir}};
  }
  const auto cf = irsloc::closed_form_crb(config, nominal, waveform);
  j["closed_form_oracle"] = {{"crb_tau", cf.crb_tau}, {"crb_mu", cf.crb_mu}};
  emit_json(j, o.out, "crb.json");
  return 0;
}

int run_estimate(const CommonOptions& o, const std::string& scheme_name, bool curves, bool dump_snapshots) {
  const auto config = scenario_from(o.config);
  const auto geom = irsloc::derive_geometry(config);
  const auto waveform = irsloc::build_waveform(config.waveform);
  const auto scheme = irsloc::scheme_from_string(scheme_name);
  if (scheme == irsloc::Scheme::kCrbCurve) throw irsloc::ConfigError("estimate needs an estimator scheme");

  irsloc::PipelineOptions options;
  options.doa_grid = o.grid_doa;
  options.toa_grid = o.grid_toa;
  options.keep_curves = curves;

  const auto kind = scheme == irsloc::Scheme::kSemiPassiveRandom ? irsloc::ScheduleKind::kRandom
                                                                 : irsloc::ScheduleKind::kDftScan;
  const auto schedule = irsloc::make_schedule(kind, config.n_reflectors, config.n_frames, geom,
                                              irsloc::derive_seed(o.seed, 0, irsloc::Stream::kSchedule));
  const auto real = irsloc::draw_realization(config, geom, irsloc::derive_seed(o.seed, 0, irsloc::Stream::kFading));
  const auto noise_seed = irsloc::derive_seed(o.seed, 0, irsloc::Stream::kNoise);
  irsloc::SnapshotSet snaps;
  irsloc::EstimationResult r;
  if (scheme == irsloc::Scheme::kFullyPassive) {
    snaps = irsloc::add_noise(irsloc::synthesize_fully_passive(real, schedule, waveform, config), config, noise_seed);
    r = irsloc::fully_passive_estimate(snaps, schedule, waveform, config, geom, options);
  } else {
    snaps = irsloc::add_noise(irsloc::synthesize_snapshots(real, schedule, waveform, config), config, noise_seed);
    r = irsloc::estimate_pipeline(snaps, schedule, waveform, config, geom, options);
  }

  json j;
  j["scheme"] = scheme_name;
  j["seed"] = o.seed;
  j["truth"] = {{"mu_i2u", geom.mu_i2u},
                {"tau_tot", geom.tau_tot},
                {"x", config.q_target.x},
                {"y", config.q_target.y},
                {"alpha", {real.alpha.real(), real.alpha.imag()}}};
  j["estimate"] = r;
  j["position_error_m"] = r.feasible ? std::hypot(r.x_hat - config.q_target.x, r.y_hat - config.q_target.y)
                                     : std::numeric_limits<double>::quiet_NaN();
  emit_json(j, o.out, "estimate.json");

  if (!o.out.empty()) {
    const std::filesystem::path dir(o.out);
    if (curves) {
      if (!r.doa_spectrum.empty()) {
        write_text(dir / "doa_spectrum.csv", curve_csv("index,mu,pseudo_spectrum", r.doa_spectrum, irsloc::doa_grid_point));
      }
      write_text(dir / "toa_objective.csv", curve_csv("index,w,objective", r.toa_objective, toa_axis));
    }
    if (dump_snapshots) {
      irsloc::write_snapshots(snaps, dir / "snapshots.bin");
      irsloc::write_schedule_csv(schedule, dir / "schedule.csv");
    }
  } else if (curves || dump_snapshots) {
    std::cerr << "note: --curves and --dump-snapshots need --out\n";
  }
  return 0;
}

int run_sweep(const CommonOptions& o, const std::optional<int>& trials, const std::vector<std::string>& schemes,
              bool seed_set, bool grid_doa_set, bool grid_toa_set, const std::optional<unsigned>& threads) {
  if (o.config.empty()) throw irsloc::ConfigError("sweep needs --config <experiment.json>");
  auto spec = irsloc::load_experiment(o.config);
  if (trials) spec.trials = *trials;
  if (!schemes.empty()) {
    spec.schemes.clear();
    for (const auto& s : schemes) spec.schemes.push_back(irsloc::scheme_from_string(s));
  }
  if (seed_set) spec.master_seed = o.seed;
  if (grid_doa_set) spec.doa_grid = o.grid_doa;
  if (grid_toa_set) spec.toa_grid = o.grid_toa;
  if (threads) spec.threads = *threads;
  const auto result = irsloc::run_sweep(spec);
  if (o.out.empty()) {
    std::cout << irsloc::sweep_csv(result);
  } else {
    irsloc::emit_sweep(result, o.out);
    std::cerr << "wrote " << (std::filesystem::path(o.out) / "sweep.csv").string() << " ("
              << result.rows.size() << " rows, " << result.wall_seconds << " s)\n";
  }
  return 0;
}

int run_split(int n_min, int n_max, const std::string& out) {
  if (n_min > n_max) throw irsloc::ConfigError("--n-min exceeds --n-max");
  std::ostringstream s;
  s << "n_total,objective,nr_closed_form,ns_closed_form,nr_continuous,nr_brute_force,ns_brute_force\n";
  for (int n = n_min; n <= n_max; ++n) {
    for (auto obj : {irsloc::SplitObjective::kToa, irsloc::SplitObjective::kDoa}) {
      const auto cf = irsloc::optimal_split(n, obj, irsloc::SplitMode::kClosedForm);
      const auto bf = irsloc::optimal_split(n, obj, irsloc::SplitMode::kBruteForce);
      char buf[160];
      std::snprintf(buf, sizeof buf, "%d,%s,%d,%d,%.17g,%d,%d\n", n, obj == irsloc::SplitObjective::kToa ? "toa" : "doa",
                    cf.n_reflectors, cf.n_sensors, cf.continuous_n_reflectors, bf.n_reflectors, bf.n_sensors);
      s << buf;
    }
  }
  if (out.empty()) {
    std::cout << s.str();
  } else {
    write_text(std::filesystem::path(out) / "split.csv", s.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"IRS-assisted target localization: CRBs, estimators and Monte-Carlo sweeps"};
  app.set_version_flag("--version", std::string(irsloc::kVersion));
  app.require_subcommand(1);

  CommonOptions o;
  auto add_common = [&](CLI::App* sub, bool grids) {
    sub->add_option("--config", o.config, "Scenario (or experiment) JSON file");
    sub->add_option("--seed", o.seed, "Master seed");
    sub->add_option("--out", o.out, "Output directory (stdout when omitted)");
    if (grids) {
      sub->add_option("--grid-doa", o.grid_doa, "MUSIC grid size T1")->check(CLI::Range(2, 1 << 24));
      sub->add_option("--grid-toa", o.grid_toa, "ToA search grid size T2")->check(CLI::Range(1, 1 << 24));
    }
  };

  auto* crb = app.add_subcommand("crb", "CRB report for a scenario");
  add_common(crb, false);
  std::string crb_schedule = "dft_scan";
  crb->add_option("--schedule", crb_schedule, "dft_scan, random or oracle_optimal");

  auto* est = app.add_subcommand("estimate", "Single trial: simulate and estimate");
  add_common(est, true);
  std::string est_scheme = "semi_passive_dft";
  bool curves = false;
  bool dump = false;
  est->add_option("--scheme", est_scheme, "semi_passive_dft, semi_passive_random or fully_passive");
  est->add_flag("--curves", curves, "Write MUSIC spectrum and ToA objective CSVs");
  est->add_flag("--dump-snapshots", dump, "Write snapshots.bin and schedule.csv");

  auto* sweep = app.add_subcommand("sweep", "Monte-Carlo sweep from an experiment file");
  add_common(sweep, true);
  std::optional<int> trials;
  std::vector<std::string> schemes;
  std::optional<unsigned> threads;
  sweep->add_option("--trials", trials, "Trials per point")->check(CLI::PositiveNumber);
  sweep->add_option("--scheme", schemes, "Schemes (comma separated)")->delimiter(',');
  sweep->add_option("--threads", threads, "Worker threads (0 = all cores)");

  auto* split = app.add_subcommand("split", "Optimal reflector/sensor split table");
  int n_min = 6;
  int n_max = 200;
  split->add_option("--n-min", n_min, "Smallest total element count")->check(CLI::Range(3, 1000000));
  split->add_option("--n-max", n_max, "Largest total element count")->check(CLI::Range(3, 1000000));
  split->add_option("--out", o.out, "Output directory (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*crb) return run_crb(o, crb_schedule);
    if (*est) return run_estimate(o, est_scheme, curves, dump);
    if (*sweep) {
      return run_sweep(o, trials, schemes, sweep->count("--seed") > 0, sweep->count("--grid-doa") > 0,
                       sweep->count("--grid-toa") > 0, threads);
    }
    if (*split) return run_split(n_min, n_max, o.out);
  } catch (const irsloc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
