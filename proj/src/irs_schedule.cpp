#include "irsloc/irs_schedule.hpp"

#include <cstdio>
#include <fstream>
#include <random>
#include <string>

#include "irsloc/arrays.hpp"
#include "irsloc/rng.hpp"

namespace irsloc {

std::string_view to_string(ScheduleKind kind) {
  switch (kind) {
    case ScheduleKind::kDftScan:
      return "dft_scan";
    case ScheduleKind::kRandom:
      return "random";
    case ScheduleKind::kOracleOptimal:
      return "oracle_optimal";
  }
  return "unknown";
}

ScheduleKind schedule_kind_from_string(std::string_view name) {
  if (name == "dft_scan" || name == "dft") return ScheduleKind::kDftScan;
  if (name == "random") return ScheduleKind::kRandom;
  if (name == "oracle_optimal" || name == "oracle") return ScheduleKind::kOracleOptimal;
  throw ConfigError("unknown schedule kind '" + std::string(name) + "'");
}

PhaseSchedule PhaseSchedule::frame(int n) const {
  PhaseSchedule f;
  f.kind = kind;
  f.phases = phases.col(n);
  if (!scan_grid.empty()) f.scan_grid = {scan_grid.at(static_cast<size_t>(n))};
  return f;
}

std::vector<double> scan_grid(int n_frames) {
  std::vector<double> grid(static_cast<size_t>(n_frames));
  for (int n = 0; n < n_frames; ++n) grid[static_cast<size_t>(n)] = -1.0 + 2.0 * n / n_frames;
  return grid;
}

namespace {

Eigen::VectorXcd unit_modulus(const Eigen::VectorXcd& v) {
  Eigen::VectorXcd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) out[i] = std::polar(1.0, std::arg(v[i]));
  return out;
}

Eigen::VectorXcd aligning_phases(int n_reflectors, double mu_out, double mu_in) {
  const Eigen::VectorXcd cascade = ula_steering(n_reflectors, mu_out).cwiseProduct(ula_steering(n_reflectors, mu_in));
  return unit_modulus(cascade.conjugate());
}

}  // namespace

PhaseSchedule make_schedule(ScheduleKind kind, int n_reflectors, int n_frames,
                            const std::optional<DerivedGeometry>& geom, std::uint64_t seed) {
  if (n_reflectors < 1 || n_frames < 1) throw ConfigError("schedule needs n_reflectors >= 1 and n_frames >= 1");
  PhaseSchedule s;
  s.kind = kind;
  s.phases.resize(n_reflectors, n_frames);
  switch (kind) {
    case ScheduleKind::kDftScan: {
      if (!geom) throw ConfigError("dft_scan schedule needs the BS-IRS geometry");
      s.scan_grid = scan_grid(n_frames);
      for (int n = 0; n < n_frames; ++n) {
        s.phases.col(n) = aligning_phases(n_reflectors, s.scan_grid[static_cast<size_t>(n)], geom->mu_b2i_aoa);
      }
      break;
    }
    case ScheduleKind::kRandom: {
      Rng rng(seed);
      std::uniform_real_distribution<double> phase(0.0, 2.0 * kPi);
      for (int n = 0; n < n_frames; ++n) {
        for (int i = 0; i < n_reflectors; ++i) s.phases(i, n) = std::polar(1.0, phase(rng));
      }
      break;
    }
    case ScheduleKind::kOracleOptimal: {
      if (!geom) throw ConfigError("oracle_optimal schedule needs the true geometry");
      const Eigen::VectorXcd theta = aligning_phases(n_reflectors, geom->mu_i2u, geom->mu_b2i_aoa);
      for (int n = 0; n < n_frames; ++n) s.phases.col(n) = theta;
      break;
    }
  }
  return s;
}

Eigen::VectorXcd effective_gain(const PhaseSchedule& schedule, double mu_i2u, double mu_b2i_aoa, int order) {
  const int nr = schedule.n_reflectors();
  const Eigen::VectorXcd out = ula_steering(nr, mu_i2u, order);
  const Eigen::VectorXcd in = ula_steering(nr, mu_b2i_aoa, 0);
  // b_out^T diag(theta) b_in per column, accumulated in a fixed order so a
  // frame's gain does not depend on how many frames share the schedule.
  const Eigen::VectorXcd w = out.cwiseProduct(in);
  Eigen::VectorXcd g(schedule.n_frames());
  for (int n = 0; n < schedule.n_frames(); ++n) {
    Complex acc{};
    for (int i = 0; i < nr; ++i) acc += schedule.phases(i, n) * w[i];
    g[n] = acc;
  }
  return g;
}

void write_schedule_csv(const PhaseSchedule& schedule, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write schedule CSV " + path.string());
  // One row per reflecting element, phases in radians per frame.
  out << "element";
  for (int n = 0; n < schedule.n_frames(); ++n) out << ",frame_" << n;
  out << '\n';
  char buf[32];
  for (int i = 0; i < schedule.n_reflectors(); ++i) {
    out << i;
    for (int n = 0; n < schedule.n_frames(); ++n) {
      std::snprintf(buf, sizeof buf, "%.17g", std::arg(schedule.phases(i, n)));
      out << ',' << buf;
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace irsloc
