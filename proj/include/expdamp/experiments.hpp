#pragma once

#include <filesystem>
#include <optional>
#include <vector>

#include "expdamp/diagnostics.hpp"
#include "expdamp/dynamics.hpp"
#include "json.hpp"

namespace expdamp {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitInvalidConfig = 2;
inline constexpr int kExitNumericalAbort = 3;

inline constexpr const char* kArtifactVersion = "0.1.0";

/// Parameters of the checks evaluated after a run ("checks" object of a run config).
struct CheckSettings {
  double ledger_tolerance = 1e-6;
  std::vector<int> moment_orders{1, 2, 3};
  std::vector<int> poly_orders{1, 2, 3};
  double hneg_s = 3.0;
  double hneg_radius = 1.0;
  double modulus_s0 = 3.0;
  double pressure_s = 3.0;
  int series_terms = 25;
  double tail_tolerance = 1e-3;
};

struct RunSpec {
  SimConfig sim;
  CheckSettings checks;
};

RunSpec run_spec_from_json(const nlohmann::json& j);
nlohmann::json run_spec_to_json(const RunSpec& spec);
RunSpec load_run_spec(const std::filesystem::path& path);

/// All enabled checks on a trajectory; {"checks": {...}, "all_pass": bool}.
nlohmann::json evaluate_checks(const Trajectory& traj, const CheckSettings& settings);

struct RunOutcome {
  int exit_code = kExitOk;
  nlohmann::json summary;
  Trajectory trajectory;
};
/// simulate + evaluate_checks; writes ledger.csv, summary.json, checkpoint.bin and
/// manifest.json into out_dir.
RunOutcome run_experiment(const RunSpec& spec, const std::filesystem::path& out_dir);

/// sqrt(trapezoid over rows of ||a(t) - b(t)||^2); rows must share times.
double trajectory_l2_distance(const Trajectory& a, const Trajectory& b);
/// max over rows of ||a(t) - b(t)||_{H^-s}.
double trajectory_hneg_sup_distance(const Trajectory& a, const Trajectory& b, double s);

/// Runs `configs` (one worker each when threads > 1, serial kernels inside).
std::vector<Trajectory> simulate_all(const std::vector<SimConfig>& configs, int threads);

struct LadderRung {
  double cutoff_from = 0.0;
  double cutoff_to = 0.0;
  double l2_distance = 0.0;
  double hneg_sup_distance = 0.0;
};
struct CutoffStudy {
  std::vector<double> cutoffs;
  std::vector<Trajectory> members;
  std::vector<LadderRung> rungs;
  bool l2_nonincreasing = false;    ///< last rung may exceed its predecessor by 10%
  bool hneg_nonincreasing = false;
};
/// Members share the base grid and initial condition and differ only in cutoff.
CutoffStudy cutoff_study(const SimConfig& base, const std::vector<double>& cutoffs, int threads);
bool ladder_nonincreasing(const std::vector<double>& d, double last_slack = 0.1);
nlohmann::json cutoff_study_to_json(const CutoffStudy& study);

struct PolyRung {
  int m = 0;
  double distance = 0.0;   ///< L2(0,T; L2) distance to the full-damping run
  double envelope = 0.0;   ///< alpha tail_gap(R0, m, beta) sqrt(|box|) T^{3/2} / sqrt(3)
  double ratio = 0.0;      ///< distance / envelope
};
struct PolyStudy {
  double r0 = 0.0;
  double max_exponent = 0.0;  ///< beta max|u|^2 over the full run
  Trajectory full;
  std::vector<Trajectory> members;
  std::vector<PolyRung> rungs;
  bool monotone = false;      ///< distance strictly decreasing in m
  bool dominated = false;     ///< every ratio <= 1
};
/// R0 defaults to the largest speed of the full-damping run.
PolyStudy polyorder_study(const SimConfig& base, const std::vector<int>& orders,
                          std::optional<double> r0, int threads);
nlohmann::json polyorder_study_to_json(const PolyStudy& study);

/// sigma spot values and the (m, beta) sweeps of the two truncation constants.
nlohmann::json verify_constants(std::size_t lipschitz_samples = 100000, std::uint64_t seed = 0);

}  // namespace expdamp
