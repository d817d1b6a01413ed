#include "expdamp/errors.hpp"

#include <cstdio>
#include <string>
#include <utility>

namespace expdamp {

namespace {
std::string overflow_message(double max_speed, double beta) {
  char buf[200];
  std::snprintf(buf, sizeof buf,
                "damping overflow: beta*max|u|^2 = %.6g exceeds the exponent limit "
                "(max|u| = %.17g, beta = %.17g)",
                beta * max_speed * max_speed, max_speed, beta);
  return buf;
}
}  // namespace

DampingOverflow::DampingOverflow(double max_speed, double beta)
    : NumericalError(overflow_message(max_speed, beta)), max_speed_(max_speed) {}

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::invalid_argument(field + ": " + message), field_(std::move(field)) {}

}  // namespace expdamp
