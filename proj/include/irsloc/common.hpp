#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

#include <Eigen/Core>

namespace irsloc {

using Complex = std::complex<double>;

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kSpeedOfLight = 299792458.0;
inline constexpr Complex kJ{0.0, 1.0};

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

class DegenerateGeometryError : public Error {
 public:
  using Error::Error;
};

/// Argument outside the mathematical domain (e.g. |mu| > 1).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Delay outside the unambiguous window.
class RangeError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class DegenerateWaveformError : public Error {
 public:
  using Error::Error;
};

class InsufficientApertureError : public Error {
 public:
  using Error::Error;
};

class CausalityError : public Error {
 public:
  using Error::Error;
};

/// Operation not allowed in the object's current state (e.g. adding noise twice).
class StateError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Fisher information not invertible; carries the eigenvector of the
/// smallest eigenvalue so callers can tell which parameter combination
/// is unobservable.
class SingularFimError : public Error {
 public:
  SingularFimError(const std::string& what, Eigen::VectorXd null_direction)
      : Error(what), null_direction_(std::move(null_direction)) {}
  const Eigen::VectorXd& null_direction() const { return null_direction_; }

 private:
  Eigen::VectorXd null_direction_;
};

inline double dbm_to_watts(double dbm) { return std::pow(10.0, dbm / 10.0) * 1e-3; }
inline double watts_to_dbm(double w) { return 10.0 * std::log10(w) + 30.0; }
inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

}  // namespace irsloc
