#pragma once

namespace expdamp {

/// One diagnostic sample of the energy balance
///   ||u(t)||^2 + 2 nu int ||grad u||^2 + 2 alpha int D(u) <= ||u(0)||^2,
/// where D(u) is the quadrature of (e^{beta|u|^2} - 1)|u|^2 (P_m(beta|u|^2)|u|^2
/// for truncated damping).
struct EnergyLedgerRow {
  double t = 0.0;
  double l2_sq = 0.0;
  double grad_sq = 0.0;
  double damp_diss = 0.0;
  double cum_grad = 0.0;  ///< 2 nu int_0^t grad_sq
  double cum_damp = 0.0;  ///< 2 alpha int_0^t damp_diss
  double ledger_lhs = 0.0;
  double max_speed = 0.0;

  friend bool operator==(const EnergyLedgerRow&, const EnergyLedgerRow&) = default;
};

}  // namespace expdamp
