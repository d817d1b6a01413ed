#pragma once

#include <map>
#include <optional>
#include <vector>

#include "expdamp/dynamics.hpp"
#include "expdamp/fields.hpp"

namespace expdamp {

/// sqrt(L^3 sum_k (1 + |k|^2)^{-s} |f(k)|^2).
double h_neg_s_norm(const SpectralVectorField& f, double s);
double h_neg_s_norm(const SpectralScalarField& f, double s);

/// (int_{R^d} (1 + |xi|^2)^{-s} dxi)^{1/2}; requires s > d/2.
double sigma_constant(double s, int d = 3);
/// (int_{R^3} (1 + |xi|^2)^{-s} |xi|^{-2} dxi)^{1/2}; requires s > 1/2.
double weighted_sigma_constant(double s);

/// Trapezoid rule over (t, value) samples.
double trapezoid(const std::vector<double>& t, const std::vector<double>& v);

struct EmbeddingReport {
  double lhs = 0.0;  ///< ||f||_{H^-s}
  double rhs = 0.0;  ///< sigma_{s,3} ||f||_{L^1}
  bool pass = false;
};
EmbeddingReport l1_embedding_check(const RealScalarField& f, double s);

struct LedgerReport {
  double initial_energy = 0.0;
  double worst_slack = 0.0;       ///< max_rows (ledger_lhs - E0) / E0
  double min_slack = 0.0;         ///< min_rows of the same quantity
  double worst_increment = 0.0;   ///< max over consecutive rows of the lhs increment / E0
  bool pass = false;
};
/// Requires at least two rows.
LedgerReport ledger_inequality_check(const Trajectory& traj, double tolerance = 1e-6);

struct SeriesReport {
  double lhs = 0.0;               ///< quadrature of (e^{beta|u|^2} - 1)|u|^2
  double rhs = 0.0;               ///< sum_{k <= k_max} beta^k / k! ||u||_{2k+2}^{2k+2}
  double relative_gap = 0.0;
  double remainder_bound = 0.0;   ///< relative Taylor remainder after k_max terms
  bool pass = false;
};
/// Throws std::domain_error when beta * max|u|^2 > 50.
SeriesReport series_identity_check(const RealVectorField& u, double beta, int k_max);

/// Per-row fields evaluated on the damping grid of the trajectory.
struct RowQuantities {
  std::vector<double> t;
  std::vector<double> l2_sq;
  std::vector<double> damp_diss;       ///< full exponential, no alpha
  std::vector<double> damping_l1;      ///< ||(e^{beta|u|^2} - 1) u||_{L^1}
  std::vector<double> damping_hneg;    ///< ||(e^{beta|u|^2} - 1)|u| ||_{H^-s}
  std::map<int, std::vector<double>> lp_moments;   ///< k -> ||u||_{2k+2}^{2k+2}
  std::map<int, std::vector<double>> poly_square;  ///< m -> int (P_m(beta|u|^2))^2
};
RowQuantities row_quantities(const Trajectory& traj, const std::vector<int>& moment_orders,
                             const std::vector<int>& poly_orders, double hneg_s);

struct MomentReport {
  int k = 0;
  double integral = 0.0;
  double bound = 0.0;            ///< k! ||u0||^2 / (2 alpha beta^k)
  double tail_witness = 0.0;     ///< last integrand / integral
  double unscaled_bound = 0.0;   ///< k! 2 alpha / beta^k
  bool unscaled_bound_holds = false;
  bool pass = false;
};
MomentReport moment_bound_check(const Trajectory& traj, const RowQuantities& q, int k,
                                double tail_tolerance = 1e-3);

struct PolySquareReport {
  int m = 0;
  double integral = 0.0;
  double ratio = 0.0;            ///< integral / ||u0||^2
  double constant = 0.0;         ///< c_{m,beta}
  double bound = 0.0;            ///< c_{m,beta} / (2 alpha)
  double tail_witness = 0.0;
  bool pass = false;
};
PolySquareReport poly_square_integral_check(const Trajectory& traj, const RowQuantities& q, int m,
                                            double tail_tolerance = 1e-3);

struct HnegIntegralReport {
  double s = 0.0;
  double radius = 0.0;
  double lhs = 0.0;
  double rhs = 0.0;
  double best_radius = 0.0;      ///< argmin of the rhs over a log grid
  double best_rhs = 0.0;
  bool pass = false;             ///< lhs <= rhs and lhs <= best_rhs
};
/// rhs(R) = sigma_{s,3} (M_{beta,R} T + 1 / (2 R alpha)) ||u0||^2.
double hneg_integral_rhs(double s, double radius, double beta, double alpha, double t_end,
                         double initial_energy);
/// Log grid over [r_min, r_max] (capped where beta R^2 reaches the overflow limit).
std::pair<double, double> hneg_integral_best_radius(double s, double beta, double alpha,
                                                    double t_end, double initial_energy,
                                                    double r_min = 1e-3, double r_max = 1e3,
                                                    int points = 2001);
HnegIntegralReport damping_hneg_time_integral_check(const Trajectory& traj,
                                                    const RowQuantities& q, double s,
                                                    double radius);

struct ModulusEntry {
  double lag = 0.0;
  double modulus = 0.0;
};
struct ModulusReport {
  double s0 = 0.0;
  std::vector<ModulusEntry> table;  ///< lags h, 2h, 4h, ...
  bool halving_monotone = false;    ///< modulus(lag/2) <= modulus(lag)
};
/// Uses the rows with uniform spacing from t = 0 (a short last row is ignored).
ModulusReport equicontinuity_modulus(const Trajectory& traj, double s0 = 3.0);
/// Every entry of `curve` is at most (1 + slack) times the same-lag entry of `reference`.
bool modulus_dominated(const ModulusReport& curve, const ModulusReport& reference,
                       double slack = 0.1);

struct DampingL1Report {
  double lhs = 0.0;   ///< int_0^T ||(e^{beta|u|^2} - 1) u||_{L^1}
  double rhs = 0.0;   ///< M_beta T sup ||u||^2 + int_0^T D
  double m_beta = 0.0;
  bool pass = false;
};
DampingL1Report damping_l1_bound_check(const Trajectory& traj, const RowQuantities& q);

struct PressureReport {
  double s = 0.0;
  double advective_lhs = 0.0;
  double advective_rhs = 0.0;   ///< sigma_{s,3} ||u||^2
  double damping_lhs = 0.0;
  double damping_rhs = 0.0;     ///< C_s alpha ||(e^{beta|u|^2}-1) u||_{L^1}
  bool pass = false;
};
/// Pressure parts (-Lap)^{-1} div div(u (x) u) and alpha (-Lap)^{-1} div g(u), formed
/// on `fine` without truncation.
PressureReport pressure_hneg_bound_check(const SpectralVectorField& u, const DampingParams& damping,
                                         double s, const Grid& fine);

/// Phi(t, x) = cos(pi t / (2T)) phi(x). Returns |lhs - rhs| / (||u0|| ||phi||_{H^1}).
double weak_form_residual(const Trajectory& traj, const SpectralVectorField& phi);

struct NormReport {
  std::map<int, double> lp;      ///< p -> ||u||_{L^p}^p
  std::map<double, double> hneg; ///< s -> ||u||_{H^-s}
};
NormReport norm_report(const SpectralVectorField& u, const Grid& fine, const std::vector<int>& ps,
                       const std::vector<double>& ss);

}  // namespace expdamp
