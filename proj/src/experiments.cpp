#include "expdamp/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numbers>
#include <stdexcept>
#include <thread>

#include "expdamp/damping.hpp"
#include "expdamp/errors.hpp"
#include "expdamp/fft.hpp"
#include "expdamp/io.hpp"
#include "expdamp/parallel.hpp"
#include "expdamp/spectral_ops.hpp"

namespace expdamp {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

template <class T>
void read_checks_field(const json& j, const char* key, T& out) {
  const auto it = j.find(key);
  if (it == j.end()) return;
  try {
    out = it->get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("checks.") + key, e.what());
  }
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

const char* status(bool pass) { return pass ? "pass" : "fail"; }

json skipped(const std::string& reason) { return {{"status", "skipped"}, {"reason", reason}}; }

}  // namespace

RunSpec run_spec_from_json(const json& j) {
  if (!j.is_object()) throw ConfigError("<root>", "expected an object");
  RunSpec spec;
  json sim = j;
  if (const auto it = j.find("checks"); it != j.end()) {
    const json& c = *it;
    if (!c.is_object()) throw ConfigError("checks", "expected an object");
    static const char* known[] = {"ledger_tolerance", "moment_orders", "poly_orders",
                                  "hneg_s",           "hneg_radius",   "modulus_s0",
                                  "pressure_s",       "series_terms",  "tail_tolerance"};
    for (const auto& [key, value] : c.items()) {
      if (std::find(std::begin(known), std::end(known), key) == std::end(known)) {
        throw ConfigError("checks." + key, "unknown key");
      }
    }
    auto& s = spec.checks;
    read_checks_field(c, "ledger_tolerance", s.ledger_tolerance);
    read_checks_field(c, "moment_orders", s.moment_orders);
    read_checks_field(c, "poly_orders", s.poly_orders);
    read_checks_field(c, "hneg_s", s.hneg_s);
    read_checks_field(c, "hneg_radius", s.hneg_radius);
    read_checks_field(c, "modulus_s0", s.modulus_s0);
    read_checks_field(c, "pressure_s", s.pressure_s);
    read_checks_field(c, "series_terms", s.series_terms);
    read_checks_field(c, "tail_tolerance", s.tail_tolerance);
    if (!(s.ledger_tolerance >= 0.0)) throw ConfigError("checks.ledger_tolerance", "must be >= 0");
    for (int k : s.moment_orders)
      if (k < 1) throw ConfigError("checks.moment_orders", "orders must be >= 1");
    for (int m : s.poly_orders)
      if (m < 1) throw ConfigError("checks.poly_orders", "orders must be >= 1");
    if (!(s.hneg_s > 1.5)) throw ConfigError("checks.hneg_s", "must be > 3/2");
    if (!(s.hneg_radius > 0.0)) throw ConfigError("checks.hneg_radius", "must be > 0");
    if (!(s.modulus_s0 > 0.0)) throw ConfigError("checks.modulus_s0", "must be > 0");
    if (!(s.pressure_s > 1.5)) throw ConfigError("checks.pressure_s", "must be > 3/2");
    if (s.series_terms < 1) throw ConfigError("checks.series_terms", "must be >= 1");
    if (!(s.tail_tolerance > 0.0)) throw ConfigError("checks.tail_tolerance", "must be > 0");
    sim.erase("checks");
  }
  spec.sim = sim_config_from_json(sim);
  return spec;
}

json run_spec_to_json(const RunSpec& spec) {
  json j = sim_config_to_json(spec.sim);
  const auto& s = spec.checks;
  j["checks"] = {{"ledger_tolerance", s.ledger_tolerance}, {"moment_orders", s.moment_orders},
                 {"poly_orders", s.poly_orders},           {"hneg_s", s.hneg_s},
                 {"hneg_radius", s.hneg_radius},           {"modulus_s0", s.modulus_s0},
                 {"pressure_s", s.pressure_s},             {"series_terms", s.series_terms},
                 {"tail_tolerance", s.tail_tolerance}};
  return j;
}

RunSpec load_run_spec(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("parse error: ") + e.what());
  }
  return run_spec_from_json(j);
}

json evaluate_checks(const Trajectory& traj, const CheckSettings& settings) {
  json checks = json::object();
  bool all_pass = true;
  auto guarded = [&](const std::string& name, auto&& fn) {
    try {
      json r = fn();
      if (r.value("status", "") == "fail") all_pass = false;
      checks[name] = std::move(r);
    } catch (const std::exception& e) {
      all_pass = false;
      checks[name] = {{"status", "error"}, {"reason", e.what()}};
    }
  };

  const SimConfig& cfg = traj.config;
  const auto& d = cfg.damping;
  const bool has_rows = traj.rows.size() >= 2;
  const bool full_damping = !d.poly_order.has_value();
  const Grid fine = cfg.damping_grid();

  std::optional<RowQuantities> q;
  if (has_rows) {
    std::vector<int> moments = full_damping ? settings.moment_orders : std::vector<int>{};
    std::vector<int> polys = full_damping ? settings.poly_orders : std::vector<int>{};
    guarded("row_quantities", [&] {
      q = row_quantities(traj, moments, polys, settings.hneg_s);
      return json{{"status", "pass"}, {"rows", q->t.size()}};
    });
  }

  guarded("energy_ledger", [&]() -> json {
    if (!has_rows) return skipped("fewer than two diagnostic rows");
    const auto r = ledger_inequality_check(traj, settings.ledger_tolerance);
    return {{"status", status(r.pass)},       {"initial_energy", r.initial_energy},
            {"worst_slack", r.worst_slack},   {"min_slack", r.min_slack},
            {"worst_increment", r.worst_increment}, {"tolerance", settings.ledger_tolerance}};
  });

  guarded("equicontinuity_modulus", [&]() -> json {
    if (!has_rows) return skipped("fewer than two diagnostic rows");
    const auto r = equicontinuity_modulus(traj, settings.modulus_s0);
    json table = json::array();
    for (const auto& e : r.table) table.push_back({{"lag", e.lag}, {"modulus", e.modulus}});
    return {{"status", status(r.halving_monotone)}, {"s0", r.s0}, {"table", table}};
  });

  const bool integrals_ok = has_rows && q.has_value();
  guarded("damping_l1_bound", [&]() -> json {
    if (!integrals_ok) return skipped("no row quantities");
    if (!full_damping) return skipped("truncated damping run");
    const auto r = damping_l1_bound_check(traj, *q);
    return {{"status", status(r.pass)}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"m_beta", r.m_beta}};
  });

  for (int k : settings.moment_orders) {
    guarded("moment_k" + std::to_string(k), [&]() -> json {
      if (!integrals_ok) return skipped("no row quantities");
      if (!full_damping) return skipped("truncated damping run");
      if (!(d.alpha > 0.0)) return skipped("alpha = 0");
      const auto r = moment_bound_check(traj, *q, k, settings.tail_tolerance);
      return {{"status", status(r.pass)},
              {"k", r.k},
              {"integral", r.integral},
              {"bound", r.bound},
              {"tail_witness", r.tail_witness},
              {"unscaled_constant", r.unscaled_bound},
              {"unscaled_constant_holds_here", r.unscaled_bound_holds},
              {"unscaled_constant_scale_consistent", false},
              {"note",
               "bound tested is k! ||u0||^2 / (2 alpha beta^k); the alternative constant "
               "k! 2 alpha / beta^k does not scale with ||u0||^2 and is reported only"}};
    });
  }

  for (int m : settings.poly_orders) {
    guarded("poly_square_m" + std::to_string(m), [&]() -> json {
      if (!integrals_ok) return skipped("no row quantities");
      if (!full_damping) return skipped("truncated damping run");
      if (!(d.alpha > 0.0)) return skipped("alpha = 0");
      const auto r = poly_square_integral_check(traj, *q, m, settings.tail_tolerance);
      return {{"status", status(r.pass)}, {"m", r.m},
              {"integral", r.integral},   {"ratio", r.ratio},
              {"constant", r.constant},   {"bound", r.bound},
              {"tail_witness", r.tail_witness}};
    });
  }

  guarded("damping_hneg_time_integral", [&]() -> json {
    if (!integrals_ok) return skipped("no row quantities");
    if (!full_damping) return skipped("truncated damping run");
    if (!(d.alpha > 0.0)) return skipped("alpha = 0");
    const auto r = damping_hneg_time_integral_check(traj, *q, settings.hneg_s, settings.hneg_radius);
    return {{"status", status(r.pass)}, {"s", r.s},
            {"radius", r.radius},       {"lhs", r.lhs},
            {"rhs", r.rhs},             {"best_radius", r.best_radius},
            {"best_rhs", r.best_rhs}};
  });

  if (!traj.snapshots.empty()) {
    const State first = traj.state(0);
    const RealVectorField u0 = to_physical(first.u_hat, fine);

    guarded("series_identity", [&]() -> json {
      const double umax = u0.max_magnitude();
      if (d.beta * umax * umax > 50.0) return skipped("beta max|u|^2 exceeds 50");
      const auto r = series_identity_check(u0, d.beta, settings.series_terms);
      return {{"status", status(r.pass)},          {"lhs", r.lhs},
              {"rhs", r.rhs},                      {"relative_gap", r.relative_gap},
              {"remainder_bound", r.remainder_bound}, {"terms", settings.series_terms}};
    });

    guarded("l1_embedding", [&]() -> json {
      RealScalarField mag(fine);
      const std::size_t np = fine.points();
      for (std::size_t p = 0; p < np; ++p) {
        double z2 = 0.0;
        for (int c = 0; c < 3; ++c) z2 += u0.component(c)[p] * u0.component(c)[p];
        if (d.beta * z2 > kMaxDampingExponent) throw DampingOverflow(std::sqrt(z2), d.beta);
        mag.values()[p] = std::expm1(d.beta * z2) * std::sqrt(z2);
      }
      const auto r = l1_embedding_check(mag, settings.hneg_s);
      return {{"status", status(r.pass)}, {"lhs", r.lhs}, {"rhs", r.rhs}, {"s", settings.hneg_s}};
    });

    auto pressure_entry = [&](const State& s) -> json {
      const auto r = pressure_hneg_bound_check(s.u_hat, d, settings.pressure_s, fine);
      return {{"status", status(r.pass)},
              {"t", s.t},
              {"s", r.s},
              {"advective_lhs", r.advective_lhs},
              {"advective_rhs", r.advective_rhs},
              {"damping_lhs", r.damping_lhs},
              {"damping_rhs", r.damping_rhs}};
    };
    guarded("pressure_hneg_initial", [&] { return pressure_entry(first); });
    guarded("pressure_hneg_final", [&] { return pressure_entry(traj.final_state()); });

    guarded("weak_form_residual", [&]() -> json {
      if (!has_rows) return skipped("fewer than two diagnostic rows");
      if (traj.initial_energy == 0.0) return {{"status", "info"}, {"value", 0.0}};
      return {{"status", "info"},
              {"value", weak_form_residual(traj, first.u_hat)},
              {"test_field", "u0 * cos(pi t / (2 T))"}};
    });
  }
  return {{"checks", checks}, {"all_pass", all_pass}};
}

RunOutcome run_experiment(const RunSpec& spec, const fs::path& out_dir) {
  spec.sim.validate();
  const auto start = std::chrono::steady_clock::now();
  fs::create_directories(out_dir);

  RunOutcome outcome;
  outcome.trajectory = simulate(spec.sim);
  const Trajectory& traj = outcome.trajectory;

  json summary;
  summary["initial_energy"] = traj.initial_energy;
  summary["rows"] = traj.rows.size();
  summary["steps"] = traj.steps.size();
  summary["aborted"] = traj.aborted;
  if (traj.aborted) summary["abort_reason"] = traj.abort_reason;
  if (!traj.rows.empty()) summary["final_time"] = traj.rows.back().t;

  if (traj.aborted) {
    outcome.exit_code = kExitNumericalAbort;
    summary["all_pass"] = false;
  } else {
    json checks = evaluate_checks(traj, spec.checks);
    summary["checks"] = checks["checks"];
    summary["all_pass"] = checks["all_pass"];
    outcome.exit_code = checks["all_pass"].get<bool>() ? kExitOk : kExitCheckFailed;
  }
  summary["exit_code"] = outcome.exit_code;

  const fs::path ledger = out_dir / "ledger.csv";
  const fs::path summary_path = out_dir / "summary.json";
  const fs::path checkpoint = out_dir / "checkpoint.bin";
  const fs::path manifest_path = out_dir / "manifest.json";
  write_ledger_csv(ledger, traj.rows);
  write_checkpoint(checkpoint, spec.sim,
                   traj.snapshots.empty() ? make_initial_state(spec.sim) : traj.final_state());
  write_json(summary_path, summary);
  outcome.summary = summary;

  const double wall =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  json manifest;
  manifest["artifact_version"] = kArtifactVersion;
  manifest["config"] = run_spec_to_json(spec);
  manifest["seed"] = spec.sim.seed;
  manifest["threads"] = num_threads();
  manifest["outputs"] = {{"ledger", ledger.string()},
                         {"summary", summary_path.string()},
                         {"checkpoint", checkpoint.string()}};
  manifest["wall_clock_seconds"] = wall;
  write_json(manifest_path, manifest);
  return outcome;
}

namespace {

void require_shared_times(const Trajectory& a, const Trajectory& b) {
  if (a.rows.size() != b.rows.size()) {
    throw std::runtime_error("trajectories have different row counts");
  }
  for (std::size_t r = 0; r < a.rows.size(); ++r) {
    if (a.rows[r].t != b.rows[r].t) throw std::runtime_error("trajectories have different row times");
  }
  if (!(a.config.grid == b.config.grid)) throw std::runtime_error("trajectories use different grids");
}

}  // namespace

double trajectory_l2_distance(const Trajectory& a, const Trajectory& b) {
  require_shared_times(a, b);
  std::vector<double> t, v;
  for (std::size_t r = 0; r < a.rows.size(); ++r) {
    t.push_back(a.rows[r].t);
    v.push_back(l2_norm_sq(a.state(r).u_hat - b.state(r).u_hat));
  }
  return std::sqrt(trapezoid(t, v));
}

double trajectory_hneg_sup_distance(const Trajectory& a, const Trajectory& b, double s) {
  require_shared_times(a, b);
  double worst = 0.0;
  for (std::size_t r = 0; r < a.rows.size(); ++r) {
    worst = std::max(worst, h_neg_s_norm(a.state(r).u_hat - b.state(r).u_hat, s));
  }
  return worst;
}

std::vector<Trajectory> simulate_all(const std::vector<SimConfig>& configs, int threads) {
  std::vector<Trajectory> out(configs.size());
  if (threads <= 1 || configs.size() <= 1) {
    for (std::size_t i = 0; i < configs.size(); ++i) out[i] = simulate(configs[i]);
    return out;
  }
  const int saved = num_threads();
  set_num_threads(1);
  std::atomic<std::size_t> next{0};
  std::vector<std::exception_ptr> errors(configs.size());
  auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < configs.size();) {
      try {
        out[i] = simulate(configs[i]);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const std::size_t workers = std::min<std::size_t>(threads, configs.size());
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  set_num_threads(saved);
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return out;
}

bool ladder_nonincreasing(const std::vector<double>& d, double last_slack) {
  for (std::size_t i = 1; i < d.size(); ++i) {
    const double allowed = (i + 1 == d.size()) ? (1.0 + last_slack) * d[i - 1] : d[i - 1];
    if (d[i] > allowed) return false;
  }
  return true;
}

CutoffStudy cutoff_study(const SimConfig& base, const std::vector<double>& cutoffs, int threads) {
  if (cutoffs.size() < 2) throw std::invalid_argument("cutoff_study: need at least two cutoffs");
  CutoffStudy study;
  study.cutoffs = cutoffs;
  std::vector<SimConfig> configs;
  for (double r : cutoffs) {
    SimConfig c = base;
    c.cutoff = r;
    c.validate();
    configs.push_back(c);
  }
  study.members = simulate_all(configs, threads);
  for (const auto& m : study.members) {
    if (m.aborted) throw NumericalError("cutoff study member aborted: " + m.abort_reason);
  }
  std::vector<double> l2, hn;
  for (std::size_t i = 0; i + 1 < cutoffs.size(); ++i) {
    LadderRung rung;
    rung.cutoff_from = cutoffs[i];
    rung.cutoff_to = cutoffs[i + 1];
    rung.l2_distance = trajectory_l2_distance(study.members[i + 1], study.members[i]);
    rung.hneg_sup_distance = trajectory_hneg_sup_distance(study.members[i + 1], study.members[i], 3.0);
    l2.push_back(rung.l2_distance);
    hn.push_back(rung.hneg_sup_distance);
    study.rungs.push_back(rung);
  }
  study.l2_nonincreasing = ladder_nonincreasing(l2);
  study.hneg_nonincreasing = ladder_nonincreasing(hn);
  return study;
}

json cutoff_study_to_json(const CutoffStudy& study) {
  json rungs = json::array();
  for (const auto& r : study.rungs) {
    rungs.push_back({{"cutoff_from", r.cutoff_from},
                     {"cutoff_to", r.cutoff_to},
                     {"l2_distance", r.l2_distance},
                     {"hneg3_sup_distance", r.hneg_sup_distance}});
  }
  json members = json::array();
  for (const auto& m : study.members) {
    members.push_back({{"cutoff", m.config.cutoff},
                       {"initial_energy", m.initial_energy},
                       {"final_energy", m.rows.empty() ? 0.0 : m.rows.back().l2_sq}});
  }
  return {{"kind", "cutoff_ladder"},
          {"label", "empirical Cauchy ladder between successive cutoffs (no reference limit)"},
          {"cutoffs", study.cutoffs},
          {"members", members},
          {"rungs", rungs},
          {"l2_nonincreasing", study.l2_nonincreasing},
          {"hneg3_nonincreasing", study.hneg_nonincreasing},
          {"pass", study.l2_nonincreasing}};
}

PolyStudy polyorder_study(const SimConfig& base, const std::vector<int>& orders,
                          std::optional<double> r0, int threads) {
  if (orders.empty()) throw std::invalid_argument("polyorder_study: orders must be nonempty");
  std::vector<int> sorted = orders;
  std::sort(sorted.begin(), sorted.end());
  if (sorted.front() < 1) throw std::invalid_argument("polyorder_study: orders must be >= 1");

  std::vector<SimConfig> configs;
  SimConfig full = base;
  full.damping.poly_order.reset();
  full.validate();
  configs.push_back(full);
  for (int m : sorted) {
    SimConfig c = base;
    c.damping.poly_order = m;
    c.validate();
    configs.push_back(c);
  }
  auto runs = simulate_all(configs, threads);
  for (const auto& r : runs) {
    if (r.aborted) throw NumericalError("poly-order study member aborted: " + r.abort_reason);
  }

  PolyStudy study;
  study.full = std::move(runs.front());
  study.members.assign(std::make_move_iterator(runs.begin() + 1),
                       std::make_move_iterator(runs.end()));
  double vmax = 0.0;
  for (const auto& row : study.full.rows) vmax = std::max(vmax, row.max_speed);
  study.r0 = r0.value_or(vmax);
  study.max_exponent = full.damping.beta * vmax * vmax;
  const double t_end = study.full.rows.back().t;
  const double vol = full.grid.volume();

  for (std::size_t i = 0; i < sorted.size(); ++i) {
    PolyRung rung;
    rung.m = sorted[i];
    rung.distance = trajectory_l2_distance(study.members[i], study.full);
    rung.envelope = full.damping.alpha * tail_gap(study.r0, rung.m, full.damping.beta) *
                    std::sqrt(vol) * std::pow(t_end, 1.5) / std::sqrt(3.0);
    rung.ratio = rung.envelope > 0.0 ? rung.distance / rung.envelope
                                     : (rung.distance == 0.0 ? 0.0 : INFINITY);
    study.rungs.push_back(rung);
  }
  study.monotone = true;
  study.dominated = true;
  for (std::size_t i = 0; i < study.rungs.size(); ++i) {
    if (i > 0 && !(study.rungs[i].distance < study.rungs[i - 1].distance) &&
        study.rungs[i - 1].distance > 0.0) {
      study.monotone = false;
    }
    if (study.rungs[i].ratio > 1.0) study.dominated = false;
  }
  return study;
}

json polyorder_study_to_json(const PolyStudy& study) {
  json rungs = json::array();
  for (const auto& r : study.rungs) {
    rungs.push_back({{"m", r.m}, {"distance", r.distance}, {"envelope", r.envelope}, {"ratio", r.ratio}});
  }
  return {{"kind", "poly_order"},
          {"r0", study.r0},
          {"beta_max_speed_sq", study.max_exponent},
          {"full_initial_energy", study.full.initial_energy},
          {"rungs", rungs},
          {"monotone", study.monotone},
          {"dominated", study.dominated},
          {"pass", study.monotone && study.dominated}};
}

json verify_constants(std::size_t lipschitz_samples, std::uint64_t seed) {
  bool all_pass = true;
  json sigma = json::array();
  const std::pair<double, double> spots[] = {{2.0, std::numbers::pi}, {3.0, std::numbers::pi / 2}};
  for (const auto& [s, exact] : spots) {
    const double v = sigma_constant(s, 3);
    const bool ok = std::abs(v - exact) <= 1e-5;
    all_pass = all_pass && ok;
    sigma.push_back({{"s", s}, {"d", 3}, {"value", v}, {"closed_form", exact},
                     {"abs_error", std::abs(v - exact)}, {"pass", ok}});
  }

  json sup = json::array();
  json lip = json::array();
  std::uint64_t stream = seed;
  for (int m : {1, 2, 3, 5}) {
    for (double beta : {0.5, 1.0, 2.0}) {
      const auto e = poly_square_ratio_sup(m, beta);
      const bool ok = std::isfinite(e.value) && e.ratio_at_z_min <= e.value &&
                      e.ratio_at_z_max <= e.value;
      all_pass = all_pass && ok;
      sup.push_back({{"m", m},
                     {"beta", beta},
                     {"value", e.value},
                     {"argmax_z", e.argmax_z},
                     {"z_min", e.z_min},
                     {"z_max", e.z_max},
                     {"ratio_at_z_min", e.ratio_at_z_min},
                     {"ratio_at_z_max", e.ratio_at_z_max},
                     {"pass", ok}});

      const auto r = poly_lipschitz_check(m, beta, lipschitz_samples, stream++);
      all_pass = all_pass && r.pass;
      lip.push_back({{"m", m},
                     {"beta", beta},
                     {"worst_ratio", r.worst_ratio},
                     {"bound", r.bound},
                     {"witness_x", r.witness_x},
                     {"witness_y", r.witness_y},
                     {"evaluated", r.evaluated},
                     {"skipped", r.skipped},
                     {"pass", r.pass}});
    }
  }
  return {{"sigma", sigma}, {"poly_square_ratio_sup", sup}, {"poly_lipschitz", lip},
          {"all_pass", all_pass}};
}

}  // namespace expdamp
