// expdamp: runs, convergence studies and constant sweeps for the damped
// Navier-Stokes Galerkin solver.

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "expdamp/errors.hpp"
#include "expdamp/experiments.hpp"
#include "expdamp/io.hpp"
#include "expdamp/parallel.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct Common {
  std::string config;
  std::string out = "out";
  std::optional<std::uint64_t> seed;
  int threads = 1;
};

void add_common(CLI::App* sub, Common& c, bool config_required) {
  auto* opt = sub->add_option("--config", c.config, "run configuration (JSON)");
  if (config_required) opt->required()->check(CLI::ExistingFile);
  sub->add_option("--out", c.out, "output directory")->capture_default_str();
  sub->add_option("--seed", c.seed, "override the configuration seed");
  sub->add_option("--threads", c.threads, "worker threads (1 = serial, reproducible)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

expdamp::RunSpec load(const Common& c) {
  expdamp::RunSpec spec = expdamp::load_run_spec(c.config);
  if (c.seed) spec.sim.seed = *c.seed;
  return spec;
}

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

void write_manifest(const fs::path& dir, const json& config, const Common& c,
                    const json& outputs, double wall) {
  json m;
  m["artifact_version"] = expdamp::kArtifactVersion;
  m["config"] = config;
  m["seed"] = c.seed ? json(*c.seed) : (config.contains("seed") ? config["seed"] : json(nullptr));
  m["threads"] = c.threads;
  m["outputs"] = outputs;
  m["wall_clock_seconds"] = wall;
  write_json(dir / "manifest.json", m);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int cmd_run(const Common& c) {
  const auto spec = load(c);
  expdamp::set_num_threads(c.threads);
  const auto outcome = expdamp::run_experiment(spec, c.out);
  const json& s = outcome.summary;
  std::cout << "rows " << s["rows"] << ", steps " << s["steps"] << ", exit " << outcome.exit_code
            << '\n';
  if (s.contains("checks")) {
    for (const auto& [name, r] : s["checks"].items()) {
      std::cout << "  " << name << ": " << r.value("status", "?") << '\n';
    }
  }
  if (outcome.trajectory.aborted) {
    std::cerr << "numerical abort: " << outcome.trajectory.abort_reason << '\n';
  }
  return outcome.exit_code;
}

int cmd_cutoff_study(const Common& c, const std::vector<double>& cutoffs) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto spec = load(c);
  fs::create_directories(c.out);
  const auto study = expdamp::cutoff_study(spec.sim, cutoffs, c.threads);
  json outputs = {{"study", (fs::path(c.out) / "cutoff_study.json").string()}};
  for (std::size_t i = 0; i < study.members.size(); ++i) {
    const fs::path p = fs::path(c.out) / ("ledger_cutoff_" + std::to_string(i) + ".csv");
    expdamp::write_ledger_csv(p, study.members[i].rows);
    outputs["ledgers"].push_back(p.string());
  }
  const json j = expdamp::cutoff_study_to_json(study);
  write_json(fs::path(c.out) / "cutoff_study.json", j);
  write_manifest(c.out, expdamp::run_spec_to_json(spec), c, outputs, seconds_since(t0));
  for (const auto& r : study.rungs) {
    std::cout << r.cutoff_from << " -> " << r.cutoff_to << ": L2 " << r.l2_distance << ", H^-3 "
              << r.hneg_sup_distance << '\n';
  }
  std::cout << "nonincreasing: " << (study.l2_nonincreasing ? "yes" : "no") << '\n';
  return j["pass"].get<bool>() ? expdamp::kExitOk : expdamp::kExitCheckFailed;
}

int cmd_polyorder_study(const Common& c, const std::vector<int>& orders, std::optional<double> r0) {
  const auto t0 = std::chrono::steady_clock::now();
  const auto spec = load(c);
  fs::create_directories(c.out);
  const auto study = expdamp::polyorder_study(spec.sim, orders, r0, c.threads);
  const json j = expdamp::polyorder_study_to_json(study);
  write_json(fs::path(c.out) / "polyorder_study.json", j);
  write_manifest(c.out, expdamp::run_spec_to_json(spec), c,
                 {{"study", (fs::path(c.out) / "polyorder_study.json").string()}},
                 seconds_since(t0));
  for (const auto& r : study.rungs) {
    std::cout << "m = " << r.m << ": distance " << r.distance << ", envelope " << r.envelope << '\n';
  }
  return j["pass"].get<bool>() ? expdamp::kExitOk : expdamp::kExitCheckFailed;
}

int cmd_verify_constants(const Common& c) {
  const auto t0 = std::chrono::steady_clock::now();
  fs::create_directories(c.out);
  const json j = expdamp::verify_constants(100000, c.seed.value_or(0));
  write_json(fs::path(c.out) / "constants.json", j);
  write_manifest(c.out, json::object(), c,
                 {{"constants", (fs::path(c.out) / "constants.json").string()}}, seconds_since(t0));
  for (const auto& s : j["sigma"]) {
    std::cout << "sigma(s=" << s["s"] << ") = " << s["value"].get<double>() << '\n';
  }
  std::cout << "all constants checks: " << (j["all_pass"].get<bool>() ? "pass" : "fail") << '\n';
  return j["all_pass"].get<bool>() ? expdamp::kExitOk : expdamp::kExitCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Galerkin solver and diagnostics for Navier-Stokes with exponential damping"};
  app.require_subcommand(1);

  Common run_opts, cut_opts, poly_opts, const_opts;
  std::vector<double> cutoffs{4.5, 6.5, 8.5, 10.5};
  std::vector<int> orders{1, 2, 3, 5, 10, 50};
  std::optional<double> r0;

  auto* run = app.add_subcommand("run", "simulate one configuration and evaluate all checks");
  add_common(run, run_opts, true);
  auto* cut = app.add_subcommand("cutoff-study", "Cauchy ladder across increasing cutoffs");
  add_common(cut, cut_opts, true);
  cut->add_option("--cutoffs", cutoffs, "increasing cutoff radii")->delimiter(',')->capture_default_str();
  auto* poly = app.add_subcommand("polyorder-study", "truncated damping P_m against full damping");
  add_common(poly, poly_opts, true);
  poly->add_option("--orders", orders, "truncation orders m")->delimiter(',')->capture_default_str();
  poly->add_option("--r0", r0, "speed bound R0 for the tail envelope (default: max speed)");
  auto* cons = app.add_subcommand("verify-constants", "embedding and truncation constants");
  add_common(cons, const_opts, false);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : expdamp::kExitInvalidConfig;
  }

  try {
    if (*run) return cmd_run(run_opts);
    if (*cut) return cmd_cutoff_study(cut_opts, cutoffs);
    if (*poly) return cmd_polyorder_study(poly_opts, orders, r0);
    if (*cons) return cmd_verify_constants(const_opts);
  } catch (const expdamp::ConfigError& e) {
    std::cerr << "invalid configuration: " << e.what() << '\n';
    return expdamp::kExitInvalidConfig;
  } catch (const expdamp::NumericalError& e) {
    std::cerr << "numerical abort: " << e.what() << '\n';
    return expdamp::kExitNumericalAbort;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return expdamp::kExitCheckFailed;
  }
  return expdamp::kExitOk;
}
