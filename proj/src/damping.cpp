#include "expdamp/damping.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "expdamp/errors.hpp"
#include "expdamp/kernels.hpp"

namespace expdamp {

void DampingParams::validate() const {
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) {
    throw ConfigError("damping.alpha", "must be finite and >= 0");
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw ConfigError("damping.beta", "must be finite and > 0");
  }
  if (poly_order && *poly_order < 1) {
    throw ConfigError("damping.poly_order", "must be >= 1 when present");
  }
}

double p_m_eval(double x, int m) {
  if (!(x >= 0.0)) throw std::domain_error("p_m_eval: x must be >= 0");
  if (m < 1) throw std::domain_error("p_m_eval: m must be >= 1");
  return truncated_expm1(x, m);
}

RealVectorField damping_pointwise(const RealVectorField& u, const DampingParams& params) {
  params.validate();
  RealVectorField out(u.grid());
  kernels::damping(kernels::components(u), kernels::components(out), params.alpha, params.beta,
                   params.poly_order);
  return out;
}

double damping_dissipation(const RealVectorField& u, double beta, std::optional<int> poly_order) {
  RealVectorField scratch(u.grid());
  const auto sums = kernels::damping(kernels::components(u), kernels::components(scratch), 1.0,
                                     beta, poly_order);
  return sums.dissipation_sum * u.grid().cell_volume();
}

double m_beta_r(double beta, double radius) {
  if (!(radius > 0.0)) throw std::domain_error("m_beta_r: R must be > 0");
  if (!(beta > 0.0)) throw std::domain_error("m_beta_r: beta must be > 0");
  if (beta * radius * radius > kMaxDampingExponent) throw DampingOverflow(radius, beta);
  return std::expm1(beta * radius * radius) / radius;
}

namespace {

// P_m(x)^2 / (x (e^x - 1)); the ratio of interest is beta times this.
double reduced_ratio(double x, int m) {
  const double p = truncated_expm1(x, m);
  return (p / x) * (p / std::expm1(x));
}

double ratio_at(double z, int m, double beta) { return beta * reduced_ratio(beta * z * z, m); }

}  // namespace

SupRatioEstimate poly_square_ratio_sup(int m, double beta) {
  if (m < 1) throw std::domain_error("poly_square_ratio_sup: m must be >= 1");
  if (!(beta > 0.0)) throw std::domain_error("poly_square_ratio_sup: beta must be > 0");

  SupRatioEstimate est;
  est.z_min = 1e-6;
  // The ratio decays like x^{2m-1} e^{-x} for large x = beta z^2.
  double x_max = 4.0 * m + 40.0;
  constexpr int kScan = 20000;

  for (int attempt = 0; attempt < 8; ++attempt) {
    x_max = std::min(x_max, kMaxDampingExponent);
    est.z_max = std::sqrt(x_max / beta);
    const double log_lo = std::log(est.z_min);
    const double log_hi = std::log(est.z_max);
    int best_index = 0;
    double best = -1.0;
    std::vector<double> zs(kScan);
    for (int i = 0; i < kScan; ++i) {
      zs[i] = std::exp(log_lo + (log_hi - log_lo) * i / (kScan - 1));
      const double r = ratio_at(zs[i], m, beta);
      if (r > best) {
        best = r;
        best_index = i;
      }
    }
    est.ratio_at_z_min = ratio_at(est.z_min, m, beta);
    est.ratio_at_z_max = ratio_at(est.z_max, m, beta);
    const bool growing_at_end = best_index >= kScan - 2;
    if (growing_at_end && x_max < kMaxDampingExponent) {
      x_max *= 2.0;
      continue;
    }

    // golden-section refinement on the bracketing cell
    double a = zs[std::max(best_index - 1, 0)];
    double b = zs[std::min(best_index + 1, kScan - 1)];
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double c = b - phi * (b - a);
    double d = a + phi * (b - a);
    double fc = ratio_at(c, m, beta);
    double fd = ratio_at(d, m, beta);
    for (int it = 0; it < 200 && (b - a) > 1e-15 * b; ++it) {
      if (fc > fd) {
        b = d;
        d = c;
        fd = fc;
        c = b - phi * (b - a);
        fc = ratio_at(c, m, beta);
      } else {
        a = c;
        c = d;
        fc = fd;
        d = a + phi * (b - a);
        fd = ratio_at(d, m, beta);
      }
    }
    double z_best = zs[best_index];
    double value = best;
    for (double z : {c, d}) {
      const double r = ratio_at(z, m, beta);
      if (r > value) {
        value = r;
        z_best = z;
      }
    }
    // z -> 0+ limit of the ratio is beta
    if (beta >= value) {
      est.value = beta;
      est.argmax_z = 0.0;
    } else {
      est.value = value;
      est.argmax_z = z_best;
    }
    return est;
  }
  throw std::runtime_error("poly_square_ratio_sup: maximum not bracketed");
}

std::optional<double> poly_lipschitz_ratio(const std::array<double, 3>& x,
                                           const std::array<double, 3>& y, int m, double beta) {
  double x2 = 0.0, y2 = 0.0, d2 = 0.0;
  for (int c = 0; c < 3; ++c) {
    x2 += x[c] * x[c];
    y2 += y[c] * y[c];
    d2 += (x[c] - y[c]) * (x[c] - y[c]);
  }
  if (d2 == 0.0) return std::nullopt;
  const double px = truncated_expm1(beta * x2, m);
  const double py = truncated_expm1(beta * y2, m);
  const double den = (px + py) * std::sqrt(d2);
  if (den == 0.0) return std::nullopt;
  double lhs2 = 0.0;
  for (int c = 0; c < 3; ++c) {
    const double diff = px * x[c] - py * y[c];
    lhs2 += diff * diff;
  }
  return std::sqrt(lhs2) / den;
}

LipschitzReport poly_lipschitz_check(int m, double beta, std::size_t samples, std::uint64_t seed,
                                     double radius) {
  if (samples < 1) throw std::domain_error("poly_lipschitz_check: samples must be >= 1");
  if (m < 1) throw std::domain_error("poly_lipschitz_check: m must be >= 1");
  LipschitzReport report;
  report.m = m;
  report.beta = beta;
  report.bound = 1.0 + 2.0 * m;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> decades(-6.0, 0.0);
  auto in_ball = [&] {
    std::array<double, 3> v;
    double r2;
    do {
      for (auto& c : v) c = unit(rng);
      r2 = v[0] * v[0] + v[1] * v[1] + v[2] * v[2];
    } while (r2 > 1.0);
    for (auto& c : v) c *= radius;
    return v;
  };

  for (std::size_t s = 0; s < samples; ++s) {
    const auto x = in_ball();
    std::array<double, 3> y;
    if (s % 2 == 0) {
      y = in_ball();
    } else {
      const auto dir = in_ball();
      const double eps = std::pow(10.0, decades(rng)) / std::max(radius, 1e-300);
      for (int c = 0; c < 3; ++c) y[c] = x[c] + eps * dir[c];
    }
    const auto r = poly_lipschitz_ratio(x, y, m, beta);
    if (!r) {
      ++report.skipped;
      continue;
    }
    ++report.evaluated;
    if (*r > report.worst_ratio) {
      report.worst_ratio = *r;
      report.witness_x = x;
      report.witness_y = y;
    }
  }
  report.pass = std::isfinite(report.worst_ratio) && report.worst_ratio <= report.bound;
  return report;
}

double tail_gap(double r0, int m0, double beta) {
  if (!(r0 >= 0.0)) throw std::domain_error("tail_gap: R0 must be >= 0");
  if (m0 < 0) throw std::domain_error("tail_gap: m0 must be >= 0");
  const double x = beta * r0 * r0;
  if (x > kMaxDampingExponent) throw DampingOverflow(r0, beta);
  if (x == 0.0) return 0.0;
  // first dropped term x^{m0+1} / (m0+1)!
  const int k0 = m0 + 1;
  double term = std::exp(k0 * std::log(x) - std::lgamma(k0 + 1.0));
  double sum = 0.0;
  for (int k = k0;; ++k) {
    sum += term;
    if (k > x && term <= std::numeric_limits<double>::epsilon() * 1e-2 * sum) break;
    term *= x / (k + 1);
    if (term == 0.0) break;
  }
  return sum * r0;
}

}  // namespace expdamp
