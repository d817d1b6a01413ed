#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <optional>

#include "expdamp/fields.hpp"

namespace expdamp {

/// beta * |u|^2 above this is refused: e^{700} is within a factor 1e4 of DBL_MAX.
inline constexpr double kMaxDampingExponent = 700.0;

/// Damping strength alpha, exponent rate beta, and optional truncation order m
/// (the nonlinearity uses P_m(beta |u|^2) instead of e^{beta |u|^2} - 1).
struct DampingParams {
  double alpha = 1.0;
  double beta = 1.0;
  std::optional<int> poly_order;

  void validate() const;
};

/// P_m(x) = sum_{k=1}^m x^k / k!, summed in increasing k so that
/// truncated_expm1(x, m) <= truncated_expm1(x, m + 1) holds in floating point.
inline double truncated_expm1(double x, int m) noexcept {
  double term = 1.0;
  double sum = 0.0;
  for (int k = 1; k <= m; ++k) {
    term *= x / k;
    sum += term;
  }
  return sum;
}

/// e^x - 1, or P_m(x) when the params carry a truncation order.
inline double damping_factor(double x, const std::optional<int>& poly_order) noexcept {
  return poly_order ? truncated_expm1(x, *poly_order) : std::expm1(x);
}

/// P_m(x) for x >= 0, m >= 1.
double p_m_eval(double x, int m);

/// g(u)(x) = alpha (e^{beta |u(x)|^2} - 1) u(x) at every collocation point.
/// Throws DampingOverflow when beta * max|u|^2 exceeds kMaxDampingExponent.
RealVectorField damping_pointwise(const RealVectorField& u, const DampingParams& params);

/// Collocation quadrature of (e^{beta |u|^2} - 1) |u|^2 over the box.
double damping_dissipation(const RealVectorField& u, double beta,
                           std::optional<int> poly_order = std::nullopt);

/// sup_{0 < r <= R} (e^{beta r^2} - 1) / r. The ratio is increasing in r, so
/// this is its value at R.
double m_beta_r(double beta, double radius);

struct SupRatioEstimate {
  double value = 0.0;      ///< estimated supremum
  double argmax_z = 0.0;   ///< location (0 when the sup is the z -> 0 limit)
  double z_min = 0.0;
  double z_max = 0.0;
  double ratio_at_z_min = 0.0;
  double ratio_at_z_max = 0.0;
};

/// Empirical sup over z > 0 of P_m(beta z^2)^2 / ((e^{beta z^2} - 1) z^2),
/// from a log-spaced scan refined by golden-section search. Not a certified bound.
SupRatioEstimate poly_square_ratio_sup(int m, double beta);

/// Ratio |P_m(b|x|^2)x - P_m(b|y|^2)y| / ((P_m(b|x|^2) + P_m(b|y|^2)) |x - y|).
/// Returns nullopt for the degenerate pairs x == y and x == y == 0.
std::optional<double> poly_lipschitz_ratio(const std::array<double, 3>& x,
                                           const std::array<double, 3>& y, int m, double beta);

struct LipschitzReport {
  int m = 0;
  double beta = 0.0;
  double worst_ratio = 0.0;
  std::array<double, 3> witness_x{};
  std::array<double, 3> witness_y{};
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
  double bound = 0.0;  ///< 1 + 2m
  bool pass = false;
};

/// Monte-Carlo worst case of poly_lipschitz_ratio over `samples` pairs drawn in
/// the ball of radius `radius` (half uniform pairs, half near-diagonal pairs).
LipschitzReport poly_lipschitz_check(int m, double beta, std::size_t samples,
                                     std::uint64_t seed, double radius = 1.0);

/// (e^{beta R0^2} - 1 - P_{m0}(beta R0^2)) * R0, summed directly from the tail.
double tail_gap(double r0, int m0, double beta);

}  // namespace expdamp
