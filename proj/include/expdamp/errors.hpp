#pragma once

#include <stdexcept>
#include <string>

namespace expdamp {

/// A numerical failure during time integration or nonlinear evaluation.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// e^{beta |u|^2} would overflow double precision.
class DampingOverflow : public NumericalError {
 public:
  DampingOverflow(double max_speed, double beta);
  double max_speed() const noexcept { return max_speed_; }

 private:
  double max_speed_;
};

/// Invalid configuration value; `field` is a dotted path like "damping.beta".
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::string field, const std::string& message);
  const std::string& field() const noexcept { return field_; }

 private:
  std::string field_;
};

}  // namespace expdamp
