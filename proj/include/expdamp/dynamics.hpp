#pragma once

#include <array>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "expdamp/damping.hpp"
#include "expdamp/fields.hpp"
#include "expdamp/ledger.hpp"

namespace expdamp {

struct InitialCondition {
  enum class Kind { zero, taylor_green, random, single_mode };

  Kind kind = Kind::taylor_green;
  double amplitude = 1.0;          ///< taylor_green, single_mode
  double slope = -2.0;             ///< random: coefficient magnitude ~ |k|^slope
  double energy = 1.0;             ///< random: ||u0||^2 before the cutoff is applied
  std::array<int, 3> mode{1, 0, 0};  ///< single_mode wavevector
};

struct SimConfig {
  Grid grid{32};
  double cutoff = 8.5;  ///< Friedrich radius; modes with |k| < cutoff evolve
  double nu = 1.0;
  DampingParams damping;
  double t_end = 1.0;
  double dt_max = 1e-3;
  double cfl_adv = 0.5;
  double cfl_damp = 0.5;
  int diag_every = 10;
  InitialCondition ic;
  std::uint64_t seed = 0;
  bool advection = true;     ///< false drops the quadratic term (linear test problems)
  double oversample = 2.0;   ///< damping grid size factor relative to grid.n()

  void validate() const;
  /// Grid on which e^{beta|u|^2} is evaluated before projection.
  Grid damping_grid() const;
};

/// Band-limited, divergence-free velocity coefficients at time t.
struct State {
  SpectralVectorField u_hat;
  double t = 0.0;
};

struct StepStats {
  double dt_used = 0.0;
  double max_speed = 0.0;
  double viscous_norm = 0.0;
  double advective_norm = 0.0;
  double damping_norm = 0.0;
  double grad_increment = 0.0;  ///< 2 nu int over the step of ||grad u||^2
  double damp_increment = 0.0;  ///< 2 alpha int over the step of D(u)
};

/// du/dt = nu Lap u - A_R div(u (x) u) - alpha A_R g(u), with A_R the
/// projected cutoff. The result lies in the cutoff ball and is divergence-free.
SpectralVectorField projected_rhs(const State& state, const SimConfig& config);
/// Same right-hand side with the cutoff but without the Leray projection.
SpectralVectorField unprojected_rhs(const State& state, const SimConfig& config);

/// One integrating-factor RK4 step of size min(dt_max, CFL bounds, max_dt).
/// Throws NumericalError on dt underflow or non-finite states.
std::pair<State, StepStats> step(const State& state, const SimConfig& config,
                                 double max_dt = std::numeric_limits<double>::infinity());

/// p(k) = i k . F(k) / |k|^2 with F = J_R[div(u (x) u) + alpha g(u)], p(0) = 0.
SpectralScalarField pressure_recover(const State& state, const SimConfig& config);

State initial_taylor_green(const Grid& grid, double amplitude);
State initial_random_divfree(const Grid& grid, double spectrum_slope, double energy,
                             std::uint64_t seed);
/// amplitude * e * cos(k.x) with a unit polarization e orthogonal to k.
State initial_single_mode(const Grid& grid, const std::array<int, 3>& k, double amplitude);
/// Initial condition from the config, passed through the projected cutoff.
State make_initial_state(const SimConfig& config);

/// Ledger row for `state` given the accumulated dissipation integrals.
EnergyLedgerRow ledger_row(const State& state, const SimConfig& config, double cum_grad,
                           double cum_damp);

struct Snapshot {
  double t = 0.0;
  std::vector<Complex> packed;  ///< 3 x ball_modes coefficients
};

/// Result of simulate(): ledger rows with matching state snapshots. On a
/// numerical abort the rows up to the last good state are kept.
struct Trajectory {
  SimConfig config;
  std::vector<std::size_t> ball_modes;  ///< flat indices of modes with |k| < cutoff
  std::vector<EnergyLedgerRow> rows;
  std::vector<Snapshot> snapshots;
  std::vector<StepStats> steps;
  double initial_energy = 0.0;
  bool aborted = false;
  std::string abort_reason;

  State state(std::size_t row) const;
  const State final_state() const { return state(snapshots.size() - 1); }
};

Trajectory simulate(const SimConfig& config);
/// Same, starting from a given band-limited state (t is reset to 0).
Trajectory simulate_from(const SimConfig& config, const State& initial);

}  // namespace expdamp
