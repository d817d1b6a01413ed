#include "expdamp/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#if defined(__GLIBC__)
#include <malloc.h>
#endif

#include "expdamp/errors.hpp"
#include "expdamp/fft.hpp"
#include "expdamp/kernels.hpp"
#include "expdamp/spectral_ops.hpp"

namespace expdamp {

void SimConfig::validate() const {
  damping.validate();
  if (!(cutoff > 0.0) || !std::isfinite(cutoff)) throw ConfigError("cutoff", "must be > 0");
  if (cutoff > grid.max_resolvable_radius()) {
    throw ConfigError("cutoff", "exceeds the largest resolvable radius sqrt(3)*n/2 = " +
                                    std::to_string(grid.max_resolvable_radius()));
  }
  if (!(nu > 0.0) || !std::isfinite(nu)) throw ConfigError("nu", "must be > 0");
  if (!(t_end >= 0.0) || !std::isfinite(t_end)) throw ConfigError("t_end", "must be >= 0");
  if (!(dt_max > 0.0) || !std::isfinite(dt_max)) throw ConfigError("dt_max", "must be > 0");
  if (!(cfl_adv > 0.0 && cfl_adv <= 1.0)) throw ConfigError("cfl_adv", "must lie in (0, 1]");
  if (!(cfl_damp > 0.0 && cfl_damp <= 1.0)) throw ConfigError("cfl_damp", "must lie in (0, 1]");
  if (diag_every < 1) throw ConfigError("diag_every", "must be >= 1");
  if (!(oversample >= 1.0) || !std::isfinite(oversample)) {
    throw ConfigError("oversample", "must be >= 1");
  }
  if (ic.kind == InitialCondition::Kind::random && !(ic.energy >= 0.0)) {
    throw ConfigError("ic.energy", "must be >= 0");
  }
  if (ic.kind == InitialCondition::Kind::single_mode && ic.mode == std::array<int, 3>{0, 0, 0}) {
    throw ConfigError("ic.mode", "must be a nonzero wavevector");
  }
}

Grid SimConfig::damping_grid() const {
  const int m = fft_friendly_size(static_cast<int>(std::ceil(oversample * grid.n())));
  return Grid(m, grid.box_length());
}

namespace {

struct Nonlinear {
  SpectralVectorField advective;  // P J_R div(u (x) u)
  SpectralVectorField damping;    // alpha P J_R g(u)
  double dissipation = 0.0;       // D(u) on the damping grid
  double max_speed = 0.0;
};

void restrict_to_ball(SpectralVectorField& f, double radius, bool project) {
  kernels::cutoff(f, radius);
  if (project) {
    kernels::leray(f);
  } else {
    f.set_divfree(false);
  }
}

Nonlinear evaluate_nonlinear(const SpectralVectorField& u, const SimConfig& cfg, bool project) {
  const Grid& g = u.grid();
  Nonlinear out{SpectralVectorField(g), SpectralVectorField(g)};
  if (cfg.advection) {
    out.advective = advection_term(u);
    restrict_to_ball(out.advective, cfg.cutoff, project);
  }
  const Grid fine = cfg.damping_grid();
  const RealVectorField ur = to_physical(u, fine);
  RealVectorField gr(fine);
  const auto sums = kernels::damping(kernels::components(ur), kernels::components(gr),
                                     cfg.damping.alpha, cfg.damping.beta,
                                     cfg.damping.poly_order);
  out.dissipation = sums.dissipation_sum * fine.cell_volume();
  out.max_speed = std::sqrt(sums.max_speed_sq);
  if (cfg.damping.alpha > 0.0) {
    out.damping = from_physical(gr, g);
    restrict_to_ball(out.damping, cfg.cutoff, project);
  }
  return out;
}

// -(advective + damping)
SpectralVectorField nonlinear_rhs(const Nonlinear& nl) {
  SpectralVectorField r = nl.advective;
  r += nl.damping;
  r *= -1.0;
  r.set_divfree(nl.advective.divfree() && nl.damping.divfree());
  return r;
}

SpectralVectorField viscous_term(const SpectralVectorField& u, double nu) {
  SpectralVectorField v = laplacian(u);
  v *= nu;
  return v;
}

void apply_factor(SpectralVectorField& f, const std::vector<double>& factor) {
  const std::size_t np = f.grid().points();
  for (int c = 0; c < 3; ++c) {
    auto comp = f.component(c);
    for (std::size_t p = 0; p < np; ++p) comp[p] *= factor[p];
  }
}

std::vector<double> decay_factors(const Grid& g, double nu, double h) {
  std::vector<double> e(g.points());
  const int n = g.n();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) e[g.flat(i, j, l)] = std::exp(-nu * g.wavevector_sq(i, j, l) * h);
  return e;
}

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw NumericalError(std::string("non-finite ") + what);
}

State finish_stage(SpectralVectorField f, double radius) {
  kernels::cutoff(f, radius);
  kernels::leray(f);
  return State{std::move(f), 0.0};
}

}  // namespace

SpectralVectorField projected_rhs(const State& state, const SimConfig& config) {
  const Nonlinear nl = evaluate_nonlinear(state.u_hat, config, true);
  SpectralVectorField r = viscous_term(state.u_hat, config.nu);
  r += nonlinear_rhs(nl);
  kernels::cutoff(r, config.cutoff);
  r.set_divfree(true);
  return r;
}

SpectralVectorField unprojected_rhs(const State& state, const SimConfig& config) {
  const Nonlinear nl = evaluate_nonlinear(state.u_hat, config, false);
  SpectralVectorField r = viscous_term(state.u_hat, config.nu);
  r += nonlinear_rhs(nl);
  kernels::cutoff(r, config.cutoff);
  r.set_divfree(false);
  return r;
}

std::pair<State, StepStats> step(const State& state, const SimConfig& config, double max_dt) {
  const Grid& g = state.u_hat.grid();
  const double nu = config.nu;
  const double alpha = config.damping.alpha;
  const double beta = config.damping.beta;

  const Nonlinear nl1 = evaluate_nonlinear(state.u_hat, config, true);
  const SpectralVectorField k1 = nonlinear_rhs(nl1);

  StepStats stats;
  stats.max_speed = nl1.max_speed;
  const double speed = nl1.max_speed;
  double dt = config.dt_max;
  if (config.advection && speed > 0.0) dt = std::min(dt, config.cfl_adv * g.spacing() / speed);
  const double lip = alpha * ((1.0 + 2.0 * beta * speed * speed) *
                                  std::exp(beta * speed * speed) - 1.0);
  if (lip > 0.0) dt = std::min(dt, config.cfl_damp / lip);
  if (!(dt >= 1e-12)) {
    throw NumericalError("time step underflow: dt = " + std::to_string(dt) +
                         " at t = " + std::to_string(state.t) +
                         ", max|u| = " + std::to_string(speed));
  }
  if (max_dt <= dt) dt = max_dt;
  stats.dt_used = dt;

  const auto e_half = decay_factors(g, nu, 0.5 * dt);
  const auto e_full = decay_factors(g, nu, dt);

  SpectralVectorField a = state.u_hat;
  a.add_scaled(0.5 * dt, k1);
  apply_factor(a, e_half);
  const State sa = finish_stage(std::move(a), config.cutoff);
  const Nonlinear nl2 = evaluate_nonlinear(sa.u_hat, config, true);
  const SpectralVectorField k2 = nonlinear_rhs(nl2);

  SpectralVectorField b = state.u_hat;
  apply_factor(b, e_half);
  b.add_scaled(0.5 * dt, k2);
  const State sb = finish_stage(std::move(b), config.cutoff);
  const Nonlinear nl3 = evaluate_nonlinear(sb.u_hat, config, true);
  const SpectralVectorField k3 = nonlinear_rhs(nl3);

  SpectralVectorField c = state.u_hat;
  apply_factor(c, e_full);
  SpectralVectorField k3h = k3;
  apply_factor(k3h, e_half);
  c.add_scaled(dt, k3h);
  const State sc = finish_stage(std::move(c), config.cutoff);
  const Nonlinear nl4 = evaluate_nonlinear(sc.u_hat, config, true);
  const SpectralVectorField k4 = nonlinear_rhs(nl4);

  SpectralVectorField next = state.u_hat;
  apply_factor(next, e_full);
  SpectralVectorField k1e = k1;
  apply_factor(k1e, e_full);
  SpectralVectorField k23 = k2;
  k23 += k3;
  apply_factor(k23, e_half);
  next.add_scaled(dt / 6.0, k1e);
  next.add_scaled(dt / 3.0, k23);
  next.add_scaled(dt / 6.0, k4);
  State out = finish_stage(std::move(next), config.cutoff);
  out.t = state.t + dt;

  // Same RK4 weights applied to the dissipation integrands at the stage states.
  const double g1 = gradient_norm_sq(state.u_hat), g2 = gradient_norm_sq(sa.u_hat),
               g3 = gradient_norm_sq(sb.u_hat), g4 = gradient_norm_sq(sc.u_hat);
  stats.grad_increment = 2.0 * nu * dt / 6.0 * (g1 + 2.0 * g2 + 2.0 * g3 + g4);
  stats.damp_increment = 2.0 * alpha * dt / 6.0 *
                         (nl1.dissipation + 2.0 * nl2.dissipation + 2.0 * nl3.dissipation +
                          nl4.dissipation);
  require_finite(stats.grad_increment, "viscous dissipation");
  require_finite(stats.damp_increment, "damping dissipation");

  stats.viscous_norm = nu * std::sqrt(l2_norm_sq(laplacian(state.u_hat)));
  stats.advective_norm = std::sqrt(l2_norm_sq(nl1.advective));
  stats.damping_norm = std::sqrt(l2_norm_sq(nl1.damping));
  return {std::move(out), stats};
}

SpectralScalarField pressure_recover(const State& state, const SimConfig& config) {
  const Nonlinear nl = evaluate_nonlinear(state.u_hat, config, false);
  SpectralVectorField forcing = nl.advective;
  forcing += nl.damping;
  const Grid& g = forcing.grid();
  SpectralScalarField p(g);
  const int n = g.n();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        const double k2 = g.wavevector_sq(i, j, l);
        if (k2 == 0.0) continue;
        const auto k = g.wavevector(i, j, l);
        const std::size_t q = g.flat(i, j, l);
        const Complex dot = k[0] * forcing.at(0, q) + k[1] * forcing.at(1, q) +
                            k[2] * forcing.at(2, q);
        p.at(q) = Complex(0.0, 1.0) * dot / k2;
      }
  return p;
}

State initial_taylor_green(const Grid& grid, double amplitude) {
  RealVectorField u(grid);
  const int n = grid.n();
  const double s = grid.wave_scale();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        const double x = s * grid.coordinate(i), y = s * grid.coordinate(j),
                     z = s * grid.coordinate(l);
        const std::size_t p = grid.flat(i, j, l);
        u.component(0)[p] = amplitude * std::cos(x) * std::sin(y) * std::sin(z);
        u.component(1)[p] = -amplitude * std::sin(x) * std::cos(y) * std::sin(z);
      }
  State st{forward_transform(u), 0.0};
  // only the modes with |k_i| = 1 are present; drop transform round-off elsewhere
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        if (std::abs(grid.wavenumber(i)) == 1 && std::abs(grid.wavenumber(j)) == 1 &&
            std::abs(grid.wavenumber(l)) == 1) {
          continue;
        }
        for (int c = 0; c < 3; ++c) st.u_hat.at(c, grid.flat(i, j, l)) = 0.0;
      }
  st.u_hat.set_divfree(true);
  return st;
}

State initial_random_divfree(const Grid& grid, double spectrum_slope, double energy,
                             std::uint64_t seed) {
  if (!(energy >= 0.0)) throw std::invalid_argument("initial_random_divfree: energy must be >= 0");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  RealVectorField noise(grid);
  for (double& v : noise.values()) v = normal(rng);
  SpectralVectorField f = forward_transform(noise);
  const int n = grid.n();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l) {
        const std::size_t p = grid.flat(i, j, l);
        const double k2 = grid.wavevector_sq(i, j, l);
        const bool drop =
            k2 == 0.0 || grid.is_nyquist(i) || grid.is_nyquist(j) || grid.is_nyquist(l);
        const double shape = drop ? 0.0 : std::pow(k2, 0.5 * spectrum_slope);
        for (int c = 0; c < 3; ++c) f.at(c, p) *= shape;
      }
  kernels::leray(f);
  const double current = l2_norm_sq(f);
  if (current > 0.0) f *= std::sqrt(energy / current);
  return State{std::move(f), 0.0};
}

State initial_single_mode(const Grid& grid, const std::array<int, 3>& k, double amplitude) {
  const double kn = std::sqrt(double(k[0]) * k[0] + double(k[1]) * k[1] + double(k[2]) * k[2]);
  if (kn == 0.0) throw std::invalid_argument("initial_single_mode: k must be nonzero");
  for (int c = 0; c < 3; ++c) {
    if (2 * std::abs(k[c]) >= grid.n()) {
      throw std::invalid_argument("initial_single_mode: k outside the non-Nyquist mode set");
    }
  }
  // polarization e = k x a / |k x a| with a the axis least aligned with k
  std::array<double, 3> axis{0.0, 0.0, 0.0};
  int least = 0;
  for (int c = 1; c < 3; ++c)
    if (std::abs(k[c]) < std::abs(k[least])) least = c;
  axis[least] = 1.0;
  std::array<double, 3> e{k[1] * axis[2] - k[2] * axis[1], k[2] * axis[0] - k[0] * axis[2],
                          k[0] * axis[1] - k[1] * axis[0]};
  const double en = std::sqrt(e[0] * e[0] + e[1] * e[1] + e[2] * e[2]);
  for (auto& v : e) v /= en;

  SpectralVectorField f(grid, true);
  const std::size_t plus = grid.flat(grid.index_of(k[0]), grid.index_of(k[1]), grid.index_of(k[2]));
  const std::size_t minus =
      grid.flat(grid.index_of(-k[0]), grid.index_of(-k[1]), grid.index_of(-k[2]));
  for (int c = 0; c < 3; ++c) {
    f.at(c, plus) = 0.5 * amplitude * e[c];
    f.at(c, minus) = 0.5 * amplitude * e[c];
  }
  return State{std::move(f), 0.0};
}

State make_initial_state(const SimConfig& config) {
  State s{SpectralVectorField(config.grid, true), 0.0};
  switch (config.ic.kind) {
    case InitialCondition::Kind::zero:
      break;
    case InitialCondition::Kind::taylor_green:
      s = initial_taylor_green(config.grid, config.ic.amplitude);
      break;
    case InitialCondition::Kind::random:
      s = initial_random_divfree(config.grid, config.ic.slope, config.ic.energy, config.seed);
      break;
    case InitialCondition::Kind::single_mode:
      s = initial_single_mode(config.grid, config.ic.mode, config.ic.amplitude);
      break;
  }
  s.u_hat = projected_cutoff(s.u_hat, config.cutoff);
  s.t = 0.0;
  return s;
}

EnergyLedgerRow ledger_row(const State& state, const SimConfig& config, double cum_grad,
                           double cum_damp) {
  EnergyLedgerRow row;
  row.t = state.t;
  row.l2_sq = l2_norm_sq(state.u_hat);
  row.grad_sq = gradient_norm_sq(state.u_hat);
  const Grid fine = config.damping_grid();
  const RealVectorField ur = to_physical(state.u_hat, fine);
  RealVectorField scratch(fine);
  const auto sums = kernels::damping(kernels::components(ur), kernels::components(scratch), 1.0,
                                     config.damping.beta, config.damping.poly_order);
  row.damp_diss = sums.dissipation_sum * fine.cell_volume();
  row.max_speed = std::sqrt(sums.max_speed_sq);
  row.cum_grad = cum_grad;
  row.cum_damp = cum_damp;
  row.ledger_lhs = row.l2_sq + cum_grad + cum_damp;
  require_finite(row.ledger_lhs, "ledger row");
  return row;
}

namespace {

std::vector<std::size_t> ball_modes(const Grid& g, double radius) {
  std::vector<std::size_t> modes;
  const int n = g.n();
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int l = 0; l < n; ++l)
        if (g.wavevector_sq(i, j, l) < radius * radius) modes.push_back(g.flat(i, j, l));
  return modes;
}

Snapshot pack(const State& s, const std::vector<std::size_t>& modes) {
  Snapshot snap;
  snap.t = s.t;
  snap.packed.reserve(3 * modes.size());
  for (int c = 0; c < 3; ++c)
    for (std::size_t p : modes) snap.packed.push_back(s.u_hat.at(c, p));
  return snap;
}

}  // namespace

State Trajectory::state(std::size_t row) const {
  const Snapshot& snap = snapshots.at(row);
  State s{SpectralVectorField(config.grid, true), snap.t};
  std::size_t q = 0;
  for (int c = 0; c < 3; ++c)
    for (std::size_t p : ball_modes) s.u_hat.at(c, p) = snap.packed[q++];
  return s;
}

Trajectory simulate(const SimConfig& config) {
  config.validate();
  return simulate_from(config, make_initial_state(config));
}

Trajectory simulate_from(const SimConfig& config, const State& initial) {
#if defined(__GLIBC__)
  // Field buffers are freed and reallocated every stage; keep them off mmap.
  static const bool heap_tuned = [] {
    mallopt(M_MMAP_THRESHOLD, 256 << 20);
    mallopt(M_TRIM_THRESHOLD, 512 << 20);
    return true;
  }();
  (void)heap_tuned;
#endif
  config.validate();
  Trajectory traj;
  traj.config = config;
  traj.ball_modes = ball_modes(config.grid, config.cutoff);

  State s = initial;
  s.t = 0.0;
  s.u_hat = projected_cutoff(s.u_hat, config.cutoff);
  double cum_grad = 0.0, cum_damp = 0.0;
  try {
    traj.rows.push_back(ledger_row(s, config, cum_grad, cum_damp));
    traj.snapshots.push_back(pack(s, traj.ball_modes));
    traj.initial_energy = traj.rows.front().l2_sq;

    long step_index = 0;
    while (s.t < config.t_end) {
      const double remaining = config.t_end - s.t;
      auto [next, stats] = step(s, config, remaining);
      if (stats.dt_used == remaining || config.t_end - next.t < 1e-9 * stats.dt_used) {
        next.t = config.t_end;
      }
      cum_grad += stats.grad_increment;
      cum_damp += stats.damp_increment;
      s = std::move(next);
      traj.steps.push_back(stats);
      ++step_index;
      if (step_index % config.diag_every == 0 || s.t >= config.t_end) {
        traj.rows.push_back(ledger_row(s, config, cum_grad, cum_damp));
        traj.snapshots.push_back(pack(s, traj.ball_modes));
      }
    }
  } catch (const NumericalError& e) {
    traj.aborted = true;
    traj.abort_reason = e.what();
  }
  return traj;
}

}  // namespace expdamp
