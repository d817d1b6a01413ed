#include "expdamp/diagnostics.hpp"

#include <algorithm>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "expdamp/errors.hpp"
#include "expdamp/fft.hpp"
#include "expdamp/spectral_ops.hpp"

namespace expdamp {

namespace {

template <class Fn>
void for_each_mode(const Grid& g, Fn&& fn) {
  const int n = g.n();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) fn(i, j, l, g.flat(i, j, l));
}

template <class Fn>
double half_line_integral(Fn&& fn) {
  boost::math::quadrature::exp_sinh<double> integrator;
  double error = 0.0;
  const double value =
      integrator.integrate(fn, 0.0, std::numeric_limits<double>::infinity(), 1e-13, &error);
  if (!std::isfinite(value) || error > 1e-9 * std::abs(value)) {
    throw NumericalError("quadrature did not converge");
  }
  return value;
}

double relative_excess(double lhs, double reference) {
  if (reference == 0.0) return lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return (lhs - reference) / reference;
}

}  // namespace

double h_neg_s_norm(const SpectralVectorField& f, double s) {
  if (!(s > 0.0)) throw std::domain_error("h_neg_s_norm: s must be > 0");
  const Grid& g = f.grid();
  double acc = 0.0;
  for_each_mode(g, [&](int i, int j, int l, std::size_t p) {
    const double w = std::pow(1.0 + g.wavevector_sq(i, j, l), -s);
    acc += w * (std::norm(f.at(0, p)) + std::norm(f.at(1, p)) + std::norm(f.at(2, p)));
  });
  return std::sqrt(g.volume() * acc);
}

double h_neg_s_norm(const SpectralScalarField& f, double s) {
  if (!(s > 0.0)) throw std::domain_error("h_neg_s_norm: s must be > 0");
  const Grid& g = f.grid();
  double acc = 0.0;
  for_each_mode(g, [&](int i, int j, int l, std::size_t p) {
    acc += std::pow(1.0 + g.wavevector_sq(i, j, l), -s) * std::norm(f.at(p));
  });
  return std::sqrt(g.volume() * acc);
}

double sigma_constant(double s, int d) {
  if (d < 1) throw std::domain_error("sigma_constant: d must be >= 1");
  if (!(s > 0.5 * d)) throw std::domain_error("sigma_constant: requires s > d/2");
  const double sphere = 2.0 * std::pow(std::numbers::pi, 0.5 * d) / std::tgamma(0.5 * d);
  const double radial = half_line_integral(
      [s, d](double r) { return std::pow(r, d - 1) * std::pow(1.0 + r * r, -s); });
  return std::sqrt(sphere * radial);
}

double weighted_sigma_constant(double s) {
  if (!(s > 0.5)) throw std::domain_error("weighted_sigma_constant: requires s > 1/2");
  const double radial = half_line_integral([s](double r) { return std::pow(1.0 + r * r, -s); });
  return std::sqrt(4.0 * std::numbers::pi * radial);
}

double trapezoid(const std::vector<double>& t, const std::vector<double>& v) {
  if (t.size() != v.size()) throw std::invalid_argument("trapezoid: size mismatch");
  double acc = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i) acc += 0.5 * (t[i] - t[i - 1]) * (v[i] + v[i - 1]);
  return acc;
}

EmbeddingReport l1_embedding_check(const RealScalarField& f, double s) {
  EmbeddingReport r;
  const double sigma = sigma_constant(s, 3);
  double l1 = 0.0;
  for (double v : f.values()) l1 += std::abs(v);
  l1 *= f.grid().cell_volume();
  r.lhs = h_neg_s_norm(forward_transform(f), s);
  r.rhs = sigma * l1;
  r.pass = r.lhs <= r.rhs * (1.0 + 1e-9);
  return r;
}

LedgerReport ledger_inequality_check(const Trajectory& traj, double tolerance) {
  if (traj.rows.size() < 2) throw std::invalid_argument("ledger_inequality_check: need >= 2 rows");
  LedgerReport r;
  const double e0 = traj.rows.front().l2_sq;
  r.initial_energy = e0;
  r.worst_slack = -std::numeric_limits<double>::infinity();
  r.min_slack = std::numeric_limits<double>::infinity();
  r.worst_increment = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < traj.rows.size(); ++i) {
    const double slack = relative_excess(traj.rows[i].ledger_lhs, e0);
    r.worst_slack = std::max(r.worst_slack, slack);
    r.min_slack = std::min(r.min_slack, slack);
    if (i > 0) {
      const double inc = traj.rows[i].ledger_lhs - traj.rows[i - 1].ledger_lhs;
      r.worst_increment = std::max(r.worst_increment, e0 > 0.0 ? inc / e0 : inc);
    }
  }
  r.pass = r.worst_slack <= tolerance;
  return r;
}

SeriesReport series_identity_check(const RealVectorField& u, double beta, int k_max) {
  if (k_max < 1) throw std::domain_error("series_identity_check: k_max must be >= 1");
  if (!(beta > 0.0)) throw std::domain_error("series_identity_check: beta must be > 0");
  const double umax = u.max_magnitude();
  const double x_max = beta * umax * umax;
  if (x_max > 50.0) {
    throw std::domain_error("series_identity_check: beta * max|u|^2 = " + std::to_string(x_max) +
                            " exceeds the series budget 50");
  }
  const Grid& g = u.grid();
  const std::size_t np = g.points();
  std::vector<double> power_sums(k_max + 1, 0.0);  // sum |u|^{2k+2}
  double l2 = 0.0;
  double lhs = 0.0;
  for (std::size_t p = 0; p < np; ++p) {
    double z2 = 0.0;
    for (int c = 0; c < 3; ++c) z2 += u.component(c)[p] * u.component(c)[p];
    l2 += z2;
    lhs += std::expm1(beta * z2) * z2;
    double pw = z2;
    for (int k = 1; k <= k_max; ++k) {
      pw *= z2;
      power_sums[k] += pw;
    }
  }
  SeriesReport r;
  const double cell = g.cell_volume();
  r.lhs = lhs * cell;
  double coeff = 1.0;
  double rhs = 0.0;
  for (int k = 1; k <= k_max; ++k) {
    coeff *= beta / k;
    rhs += coeff * power_sums[k];
  }
  r.rhs = rhs * cell;
  // sum_{k > k_max} beta^k/k! |u|^{2k+2} <= |u|^2 (e^x - P_{k_max}(x)) with x = beta max|u|^2
  const double tail = std::max(0.0, std::expm1(x_max) - truncated_expm1(x_max, k_max));
  if (r.lhs > 0.0) {
    r.relative_gap = std::abs(r.lhs - r.rhs) / r.lhs;
    r.remainder_bound = l2 * cell * tail / r.lhs;
  }
  constexpr double kSummationFloor = 1e-10;
  r.pass = r.relative_gap <= r.remainder_bound + kSummationFloor;
  return r;
}

RowQuantities row_quantities(const Trajectory& traj, const std::vector<int>& moment_orders,
                             const std::vector<int>& poly_orders, double hneg_s) {
  RowQuantities q;
  const Grid fine = traj.config.damping_grid();
  const double beta = traj.config.damping.beta;
  const double cell = fine.cell_volume();
  const std::size_t np = fine.points();
  for (int k : moment_orders) q.lp_moments[k];
  for (int m : poly_orders) q.poly_square[m];

  for (std::size_t r = 0; r < traj.rows.size(); ++r) {
    const State s = traj.state(r);
    const RealVectorField ur = to_physical(s.u_hat, fine);
    RealScalarField magnitude(fine);
    double l2 = 0.0, diss = 0.0, l1 = 0.0;
    std::map<int, double> lp, ps;
    double max_x = 0.0;
    for (std::size_t p = 0; p < np; ++p) {
      double z2 = 0.0;
      for (int c = 0; c < 3; ++c) z2 += ur.component(c)[p] * ur.component(c)[p];
      const double x = beta * z2;
      max_x = std::max(max_x, x);
      const double e = std::expm1(std::min(x, kMaxDampingExponent));
      const double z = std::sqrt(z2);
      l2 += z2;
      diss += e * z2;
      l1 += e * z;
      magnitude.values()[p] = e * z;
      for (int k : moment_orders) lp[k] += std::pow(z2, k + 1);
      for (int m : poly_orders) {
        const double pm = truncated_expm1(x, m);
        ps[m] += pm * pm;
      }
    }
    if (max_x > kMaxDampingExponent) throw DampingOverflow(std::sqrt(max_x / beta), beta);
    q.t.push_back(s.t);
    q.l2_sq.push_back(l2 * cell);
    q.damp_diss.push_back(diss * cell);
    q.damping_l1.push_back(l1 * cell);
    q.damping_hneg.push_back(hneg_s > 0.0 ? h_neg_s_norm(forward_transform(magnitude), hneg_s)
                                          : 0.0);
    for (int k : moment_orders) q.lp_moments[k].push_back(lp[k] * cell);
    for (int m : poly_orders) q.poly_square[m].push_back(ps[m] * cell);
  }
  return q;
}

MomentReport moment_bound_check(const Trajectory& traj, const RowQuantities& q, int k,
                                double tail_tolerance) {
  const auto it = q.lp_moments.find(k);
  if (it == q.lp_moments.end()) throw std::invalid_argument("moment_bound_check: order not sampled");
  const double alpha = traj.config.damping.alpha;
  const double beta = traj.config.damping.beta;
  MomentReport r;
  r.k = k;
  r.integral = trapezoid(q.t, it->second);
  const double fact = std::tgamma(k + 1.0);
  r.bound = alpha > 0.0 ? fact * traj.initial_energy / (2.0 * alpha * std::pow(beta, k))
                        : std::numeric_limits<double>::infinity();
  r.unscaled_bound = fact * 2.0 * alpha / std::pow(beta, k);
  r.unscaled_bound_holds = r.integral <= r.unscaled_bound;
  r.tail_witness = r.integral > 0.0 ? it->second.back() / r.integral : 0.0;
  r.pass = r.integral <= r.bound * (1.0 + 1e-6) && r.tail_witness < tail_tolerance;
  return r;
}

PolySquareReport poly_square_integral_check(const Trajectory& traj, const RowQuantities& q, int m,
                                            double tail_tolerance) {
  const auto it = q.poly_square.find(m);
  if (it == q.poly_square.end()) {
    throw std::invalid_argument("poly_square_integral_check: order not sampled");
  }
  const double alpha = traj.config.damping.alpha;
  PolySquareReport r;
  r.m = m;
  r.integral = trapezoid(q.t, it->second);
  r.constant = poly_square_ratio_sup(m, traj.config.damping.beta).value;
  r.bound = alpha > 0.0 ? r.constant / (2.0 * alpha) : std::numeric_limits<double>::infinity();
  r.ratio = traj.initial_energy > 0.0 ? r.integral / traj.initial_energy : 0.0;
  r.tail_witness = r.integral > 0.0 ? it->second.back() / r.integral : 0.0;
  r.pass = r.ratio <= r.bound * (1.0 + 1e-6) && r.tail_witness < tail_tolerance;
  return r;
}

double hneg_integral_rhs(double s, double radius, double beta, double alpha, double t_end,
                         double initial_energy) {
  if (!(alpha > 0.0)) return std::numeric_limits<double>::infinity();
  return sigma_constant(s, 3) *
         (m_beta_r(beta, radius) * t_end + 1.0 / (2.0 * radius * alpha)) * initial_energy;
}

std::pair<double, double> hneg_integral_best_radius(double s, double beta, double alpha,
                                                    double t_end, double initial_energy,
                                                    double r_min, double r_max, int points) {
  if (!(r_min > 0.0) || !(r_max > r_min) || points < 2) {
    throw std::invalid_argument("hneg_integral_best_radius: bad grid");
  }
  r_max = std::min(r_max, std::sqrt(0.999 * kMaxDampingExponent / beta));
  const double sigma = sigma_constant(s, 3);
  double best_r = r_min;
  double best = std::numeric_limits<double>::infinity();
  for (int i = 0; i < points; ++i) {
    const double r = r_min * std::pow(r_max / r_min, double(i) / (points - 1));
    const double v =
        sigma * (m_beta_r(beta, r) * t_end + 1.0 / (2.0 * r * alpha)) * initial_energy;
    if (v < best) {
      best = v;
      best_r = r;
    }
  }
  return {best_r, best};
}

HnegIntegralReport damping_hneg_time_integral_check(const Trajectory& traj,
                                                    const RowQuantities& q, double s,
                                                    double radius) {
  if (!(s > 1.5)) throw std::domain_error("damping_hneg_time_integral_check: requires s > 3/2");
  if (!(radius > 0.0)) throw std::domain_error("damping_hneg_time_integral_check: R must be > 0");
  const auto& d = traj.config.damping;
  const double t_end = q.t.empty() ? 0.0 : q.t.back();
  HnegIntegralReport r;
  r.s = s;
  r.radius = radius;
  r.lhs = trapezoid(q.t, q.damping_hneg);
  r.rhs = hneg_integral_rhs(s, radius, d.beta, d.alpha, t_end, traj.initial_energy);
  if (d.alpha > 0.0) {
    std::tie(r.best_radius, r.best_rhs) =
        hneg_integral_best_radius(s, d.beta, d.alpha, t_end, traj.initial_energy);
  } else {
    r.best_rhs = std::numeric_limits<double>::infinity();
  }
  r.pass = r.lhs <= r.rhs * (1.0 + 1e-6) && r.lhs <= r.best_rhs * (1.0 + 1e-6);
  return r;
}

ModulusReport equicontinuity_modulus(const Trajectory& traj, double s0) {
  if (!(s0 > 0.0)) throw std::domain_error("equicontinuity_modulus: s0 must be > 0");
  ModulusReport rep;
  rep.s0 = s0;
  const auto& rows = traj.rows;
  if (rows.size() < 2) {
    rep.halving_monotone = true;
    return rep;
  }
  const double h = rows[1].t - rows[0].t;
  std::size_t count = 2;
  const double tol = 1e-9 * std::max(1.0, rows.back().t);
  while (count < rows.size() && std::abs(rows[count].t - rows[0].t - count * h) <= tol) ++count;

  const Grid& g = traj.config.grid;
  std::vector<double> weight;
  weight.reserve(traj.ball_modes.size());
  for (std::size_t p : traj.ball_modes) {
    const int i = static_cast<int>(p / (g.n() * g.n()));
    const int j = static_cast<int>((p / g.n()) % g.n());
    const int l = static_cast<int>(p % g.n());
    weight.push_back(std::pow(1.0 + g.wavevector_sq(i, j, l), -s0));
  }
  const std::size_t nb = traj.ball_modes.size();
  auto distance = [&](std::size_t a, std::size_t b) {
    const auto& x = traj.snapshots[a].packed;
    const auto& y = traj.snapshots[b].packed;
    double acc = 0.0;
    for (std::size_t q = 0; q < x.size(); ++q) acc += weight[q % nb] * std::norm(x[q] - y[q]);
    return std::sqrt(g.volume() * acc);
  };

  for (std::size_t lag = 1; lag < count; lag *= 2) {
    double worst = 0.0;
    for (std::size_t i = 0; i + lag < count; ++i) worst = std::max(worst, distance(i, i + lag));
    rep.table.push_back({lag * h, worst});
  }
  rep.halving_monotone = true;
  for (std::size_t j = 1; j < rep.table.size(); ++j) {
    if (rep.table[j - 1].modulus > rep.table[j].modulus * (1.0 + 1e-12)) {
      rep.halving_monotone = false;
    }
  }
  return rep;
}

bool modulus_dominated(const ModulusReport& curve, const ModulusReport& reference, double slack) {
  const std::size_t n = std::min(curve.table.size(), reference.table.size());
  for (std::size_t j = 0; j < n; ++j) {
    const double lag_a = curve.table[j].lag, lag_b = reference.table[j].lag;
    if (std::abs(lag_a - lag_b) > 1e-9 * std::max(lag_a, lag_b)) {
      throw std::invalid_argument("modulus_dominated: lag tables differ");
    }
    if (curve.table[j].modulus > (1.0 + slack) * reference.table[j].modulus) return false;
  }
  return true;
}

DampingL1Report damping_l1_bound_check(const Trajectory& traj, const RowQuantities& q) {
  DampingL1Report r;
  const double t_end = q.t.empty() ? 0.0 : q.t.back();
  r.m_beta = m_beta_r(traj.config.damping.beta, 1.0);
  r.lhs = trapezoid(q.t, q.damping_l1);
  const double sup_l2 = q.l2_sq.empty() ? 0.0 : *std::max_element(q.l2_sq.begin(), q.l2_sq.end());
  r.rhs = r.m_beta * t_end * sup_l2 + trapezoid(q.t, q.damp_diss);
  r.pass = r.lhs <= r.rhs * (1.0 + 1e-9);
  return r;
}

PressureReport pressure_hneg_bound_check(const SpectralVectorField& u, const DampingParams& damping,
                                         double s, const Grid& fine) {
  if (!(s > 1.5)) throw std::domain_error("pressure_hneg_bound_check: requires s > 3/2");
  damping.validate();
  const RealVectorField ur = to_physical(u, fine);
  const std::size_t np = fine.points();
  std::array<RealScalarField, 6> products{RealScalarField(fine), RealScalarField(fine),
                                          RealScalarField(fine), RealScalarField(fine),
                                          RealScalarField(fine), RealScalarField(fine)};
  constexpr int pairs[6][2] = {{0, 0}, {0, 1}, {0, 2}, {1, 1}, {1, 2}, {2, 2}};
  double l2 = 0.0;
  for (std::size_t p = 0; p < np; ++p) {
    for (int q = 0; q < 6; ++q) {
      products[q].values()[p] = ur.component(pairs[q][0])[p] * ur.component(pairs[q][1])[p];
    }
    l2 += products[0].values()[p] + products[3].values()[p] + products[5].values()[p];
  }
  l2 *= fine.cell_volume();

  const RealVectorField g = damping_pointwise(ur, damping);
  double g_l1 = 0.0;
  for (std::size_t p = 0; p < np; ++p) {
    g_l1 += std::sqrt(g.component(0)[p] * g.component(0)[p] + g.component(1)[p] * g.component(1)[p] +
                      g.component(2)[p] * g.component(2)[p]);
  }
  g_l1 *= fine.cell_volume();

  std::array<SpectralScalarField, 6> t_hat{
      forward_transform(products[0]), forward_transform(products[1]),
      forward_transform(products[2]), forward_transform(products[3]),
      forward_transform(products[4]), forward_transform(products[5])};
  const SpectralVectorField g_hat = forward_transform(g);
  constexpr int slot[3][3] = {{0, 1, 2}, {1, 3, 4}, {2, 4, 5}};
  SpectralScalarField p_adv(fine), p_damp(fine);
  for_each_mode(fine, [&](int i, int j, int l, std::size_t p) {
    const double k2 = fine.wavevector_sq(i, j, l);
    if (k2 == 0.0) return;
    const auto k = fine.wavevector(i, j, l);
    Complex adv(0.0, 0.0), dmp(0.0, 0.0);
    for (int a = 0; a < 3; ++a) {
      for (int b = 0; b < 3; ++b) adv += k[a] * k[b] * t_hat[slot[a][b]].at(p);
      dmp += k[a] * g_hat.at(a, p);
    }
    p_adv.at(p) = -adv / k2;
    p_damp.at(p) = Complex(0.0, 1.0) * dmp / k2;
  });

  PressureReport r;
  r.s = s;
  r.advective_lhs = h_neg_s_norm(p_adv, s);
  r.advective_rhs = sigma_constant(s, 3) * l2;
  r.damping_lhs = h_neg_s_norm(p_damp, s);
  r.damping_rhs = weighted_sigma_constant(s) * g_l1;
  r.pass = r.advective_lhs <= r.advective_rhs * (1.0 + 1e-9) &&
           r.damping_lhs <= r.damping_rhs * (1.0 + 1e-9);
  return r;
}

double weak_form_residual(const Trajectory& traj, const SpectralVectorField& phi) {
  const SimConfig& cfg = traj.config;
  if (!(phi.grid() == cfg.grid)) throw std::invalid_argument("weak_form_residual: grid mismatch");
  if (divergence_defect(phi) > 1e-12) {
    throw std::invalid_argument("weak_form_residual: test field is not divergence-free");
  }
  if (max_outside_ball(phi, cfg.cutoff) > 0.0) {
    throw std::invalid_argument("weak_form_residual: test field is not band-limited to the cutoff");
  }
  if (traj.rows.size() < 2) throw std::invalid_argument("weak_form_residual: need >= 2 rows");
  const double t_end = traj.rows.back().t;
  const double w = std::numbers::pi / (2.0 * t_end);

  const Grid fine = cfg.damping_grid();
  const RealVectorField phi_fine = to_physical(phi, fine);
  const std::size_t np = fine.points();
  const auto& d = cfg.damping;

  std::vector<double> t, time_term, space_terms;
  double initial_pairing = 0.0;
  for (std::size_t r = 0; r < traj.rows.size(); ++r) {
    const State s = traj.state(r);
    const double pair = inner_product(s.u_hat, phi).real();
    double viscous = 0.0;
    for_each_mode(cfg.grid, [&](int i, int j, int l, std::size_t p) {
      const double k2 = cfg.grid.wavevector_sq(i, j, l);
      for (int c = 0; c < 3; ++c) viscous += k2 * (s.u_hat.at(c, p) * std::conj(phi.at(c, p))).real();
    });
    viscous *= cfg.nu * cfg.grid.volume();
    const double advective =
        cfg.advection ? inner_product(advection_term(s.u_hat), phi).real() : 0.0;
    double damping = 0.0;
    if (d.alpha > 0.0) {
      const RealVectorField ur = to_physical(s.u_hat, fine);
      const RealVectorField g = damping_pointwise(ur, d);
      for (std::size_t p = 0; p < np; ++p)
        for (int c = 0; c < 3; ++c) damping += g.component(c)[p] * phi_fine.component(c)[p];
      damping *= fine.cell_volume();
    }
    const double psi = std::cos(w * s.t);
    const double dpsi = -w * std::sin(w * s.t);
    if (r == 0) initial_pairing = pair;
    t.push_back(s.t);
    time_term.push_back(dpsi * pair);
    space_terms.push_back(psi * (viscous + advective + damping));
  }
  const double lhs = -trapezoid(t, time_term) + trapezoid(t, space_terms);
  const double residual = std::abs(lhs - initial_pairing);
  const double norm = std::sqrt(traj.initial_energy) *
                      std::sqrt(l2_norm_sq(phi) + gradient_norm_sq(phi));
  return norm > 0.0 ? residual / norm : residual;
}

NormReport norm_report(const SpectralVectorField& u, const Grid& fine, const std::vector<int>& ps,
                       const std::vector<double>& ss) {
  NormReport rep;
  const RealVectorField ur = to_physical(u, fine);
  const std::size_t np = fine.points();
  for (int p : ps) {
    if (p < 1) throw std::domain_error("norm_report: p must be >= 1");
    double acc = 0.0;
    for (std::size_t q = 0; q < np; ++q) {
      double z2 = 0.0;
      for (int c = 0; c < 3; ++c) z2 += ur.component(c)[q] * ur.component(c)[q];
      acc += std::pow(z2, 0.5 * p);
    }
    rep.lp[p] = acc * fine.cell_volume();
  }
  for (double s : ss) rep.hneg[s] = h_neg_s_norm(u, s);
  return rep;
}

}  // namespace expdamp
