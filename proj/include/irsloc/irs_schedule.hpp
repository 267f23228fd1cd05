#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "irsloc/common.hpp"
#include "irsloc/scenario.hpp"

namespace irsloc {

enum class ScheduleKind { kDftScan, kRandom, kOracleOptimal };

std::string_view to_string(ScheduleKind kind);
ScheduleKind schedule_kind_from_string(std::string_view name);

/// Per-frame IRS reflection coefficients, N_r x N_f, all of unit modulus.
struct PhaseSchedule {
  Eigen::MatrixXcd phases;
  ScheduleKind kind = ScheduleKind::kRandom;
  /// Steering direction of each frame (dft_scan only).
  std::vector<double> scan_grid;

  int n_reflectors() const { return static_cast<int>(phases.rows()); }
  int n_frames() const { return static_cast<int>(phases.cols()); }
  /// Restriction to a single frame.
  PhaseSchedule frame(int n) const;
};

/// dft_scan: frame n steers towards mu_n = -1 + 2n/N_f, compensating the
///   incident direction, theta(n) = conj(b_r(mu_n) .* b_r(mu_b2i_aoa)).
/// random: i.i.d. uniform phases on [0, 2 pi) drawn from `seed`.
/// oracle_optimal: every frame phase-aligns the cascade towards the true mu_i2u.
/// dft_scan and oracle_optimal need `geom`; a missing one is a ConfigError.
PhaseSchedule make_schedule(ScheduleKind kind, int n_reflectors, int n_frames,
                            const std::optional<DerivedGeometry>& geom, std::uint64_t seed = 0);

/// Uniform direction-cosine scan grid of n points covering [-1, 1).
std::vector<double> scan_grid(int n_frames);

/// g(n) = b_r^T(mu_i2u) Theta(n) b_r(mu_b2i_aoa), one entry per frame.
/// `order` differentiates b_r(mu_i2u) (order 1 gives g_dot).
Eigen::VectorXcd effective_gain(const PhaseSchedule& schedule, double mu_i2u, double mu_b2i_aoa, int order = 0);

/// Rows are elements, columns are frames, values are phases in radians.
void write_schedule_csv(const PhaseSchedule& schedule, const std::filesystem::path& path);

}  // namespace irsloc
