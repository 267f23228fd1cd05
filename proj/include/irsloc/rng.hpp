#pragma once

#include <cstdint>
#include <random>

namespace irsloc {

/// Independent random streams used inside one Monte-Carlo trial.
enum class Stream : std::uint64_t {
  kFading = 1,
  kNoise = 2,
  kSchedule = 3,
};

/// splitmix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Seed for (master, trial, stream); depends only on its arguments, so a
/// trial's draws are the same whichever thread runs it.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial, Stream stream) {
  return mix64(mix64(mix64(master) ^ trial) ^ static_cast<std::uint64_t>(stream));
}

using Rng = std::mt19937_64;

}  // namespace irsloc
