#pragma once

#include <stdexcept>
#include <string>

namespace semiclassical {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// sin(omega t) = 0 for the harmonic propagator: characteristics focus.
class CausticError : public Error {
 public:
  using Error::Error;
};

/// The potential has no closed-form classical action.
class UnsupportedPotential : public Error {
 public:
  using Error::Error;
};

/// Kinetic phase per step reaches pi on the grid's highest wavenumber.
class AliasingError : public Error {
 public:
  using Error::Error;
};

/// Grid too coarse for the local de Broglie wavelength.
class ResolutionError : public Error {
 public:
  using Error::Error;
};

/// The above-floor region is made of several components whose phases
/// cannot be compared.
class DisconnectedSupport : public Error {
 public:
  using Error::Error;
};

class SpinAxisUnsupported : public Error {
 public:
  using Error::Error;
};

class SamplingError : public Error {
 public:
  using Error::Error;
};

/// Scenario/configuration problem. Carries the offending field and, when
/// known, the 1-based line in the scenario file.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& message, int line = 0)
      : Error(format(field, message, line)), field_(std::move(field)), line_(line) {}

  const std::string& field() const noexcept { return field_; }
  int line() const noexcept { return line_; }

 private:
  static std::string format(const std::string& field, const std::string& message, int line) {
    std::string out;
    if (line > 0) out += "line " + std::to_string(line) + ": ";
    if (!field.empty()) out += "'" + field + "': ";
    return out + message;
  }

  std::string field_;
  int line_ = 0;
};

}  // namespace semiclassical
