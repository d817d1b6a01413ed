#include <charconv>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <sstream>

#include "doctest.h"
#include "expdamp/errors.hpp"
#include "expdamp/io.hpp"
#include "test_support.hpp"

using namespace expdamp;
namespace fs = std::filesystem;

namespace {

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("expdamp_io_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof(double)) == 0; }

std::string error_of(const std::string& csv) {
  std::istringstream in(csv);
  try {
    read_ledger_csv(in);
  } catch (const std::runtime_error& e) {
    return e.what();
  }
  return "";
}

std::string field_of(const nlohmann::json& j) {
  try {
    sim_config_from_json(j);
  } catch (const ConfigError& e) {
    return e.field();
  }
  return "";
}

}  // namespace

TEST_CASE("format_double round-trips awkward values") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> values{0.0, -0.0, 0.1, 1.0 / 3.0, 1e-300, 5e-324, 1.7976931348623157e308,
                             62.01255336059963};
  for (int i = 0; i < 1000; ++i) values.push_back(u(rng) * std::pow(10.0, (i % 40) - 20));
  for (double v : values) {
    const std::string s = format_double(v);
    double back = 1.0;
    std::from_chars(s.data(), s.data() + s.size(), back);
    CHECK(same_bits(back, v));
  }
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(2.0) == "2");
}

TEST_CASE("ledger csv round trip is bitwise") {
  std::vector<EnergyLedgerRow> rows;
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (int r = 0; r < 50; ++r) {
    rows.push_back({r * 1e-3, u(rng), u(rng), u(rng), u(rng), u(rng), u(rng), u(rng)});
  }
  std::ostringstream out;
  write_ledger_csv(out, rows);
  const std::string text = out.str();
  CHECK(text.rfind(std::string(kLedgerHeader) + "\n", 0) == 0);
  std::istringstream in(text);
  const auto back = read_ledger_csv(in);
  REQUIRE(back.size() == rows.size());
  for (std::size_t r = 0; r < rows.size(); ++r) CHECK(back[r] == rows[r]);

  std::ostringstream again;
  write_ledger_csv(again, back);
  CHECK(again.str() == text);

  const fs::path dir = scratch_dir("ledger");
  write_ledger_csv(dir / "ledger.csv", rows);
  CHECK(read_ledger_csv(dir / "ledger.csv") == rows);
  fs::remove_all(dir);
}

TEST_CASE("ledger reader tolerates CRLF and blank lines") {
  const std::string csv = std::string(kLedgerHeader) + "\r\n1,2,3,4,5,6,7,8\r\n\r\n";
  std::istringstream in(csv);
  const auto rows = read_ledger_csv(in);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0].max_speed == 8.0);
}

TEST_CASE("ledger reader names the offending column") {
  CHECK(error_of("").find("empty") != std::string::npos);
  CHECK(error_of("t,l2_sq,grad_sq,damp_diss,cum_grad,cum_damp,ledger_lhs\n").find("'max_speed'") !=
        std::string::npos);
  CHECK(error_of("t,l2_sq,grad_sq,damp_diss,cum_damp,cum_grad,ledger_lhs,max_speed\n")
            .find("'cum_grad'") != std::string::npos);
  CHECK(error_of(std::string(kLedgerHeader) + ",extra\n").find("'extra'") != std::string::npos);

  const std::string head = std::string(kLedgerHeader) + "\n";
  const std::string bad_cell = error_of(head + "0,1,2,x,4,5,6,7\n");
  CHECK(bad_cell.find("'damp_diss'") != std::string::npos);
  CHECK(bad_cell.find("line 2") != std::string::npos);
  CHECK(error_of(head + "0,1,2,3,4,5,6,7\n0,1,2\n").find("'damp_diss'") != std::string::npos);
  CHECK(error_of(head + "0,1,2,3,4,5,6,7,8\n").find("<extra>") != std::string::npos);
  CHECK(error_of(head + "0,1,2,3,4,5,6,7 \n").find("'max_speed'") != std::string::npos);
}

TEST_CASE("config json round trip") {
  SimConfig c;
  c.grid = Grid(16);
  c.cutoff = 5.5;
  c.nu = 0.05;
  c.damping.alpha = 0.7;
  c.damping.beta = 0.3;
  c.damping.poly_order = 3;
  c.t_end = 0.25;
  c.dt_max = 2e-3;
  c.diag_every = 4;
  c.ic.kind = InitialCondition::Kind::single_mode;
  c.ic.mode = {1, -2, 0};
  c.ic.amplitude = 0.4;
  c.seed = 123456789012345ull;
  c.advection = false;
  const auto j = sim_config_to_json(c);
  const SimConfig back = sim_config_from_json(j);
  CHECK(back.grid == c.grid);
  CHECK(back.cutoff == c.cutoff);
  CHECK(back.nu == c.nu);
  CHECK(back.damping.alpha == c.damping.alpha);
  CHECK(back.damping.beta == c.damping.beta);
  CHECK(back.damping.poly_order == c.damping.poly_order);
  CHECK(back.t_end == c.t_end);
  CHECK(back.dt_max == c.dt_max);
  CHECK(back.diag_every == c.diag_every);
  CHECK(back.ic.kind == c.ic.kind);
  CHECK(back.ic.mode == c.ic.mode);
  CHECK(back.ic.amplitude == c.ic.amplitude);
  CHECK(back.seed == c.seed);
  CHECK(back.advection == c.advection);
  CHECK(sim_config_to_json(back) == j);

  c.damping.poly_order.reset();
  CHECK_FALSE(sim_config_from_json(sim_config_to_json(c)).damping.poly_order.has_value());
}

TEST_CASE("empty config object gives the defaults") {
  const SimConfig c = sim_config_from_json(nlohmann::json::object());
  const SimConfig d;
  CHECK(c.grid == d.grid);
  CHECK(c.cutoff == d.cutoff);
  CHECK(c.ic.kind == d.ic.kind);
}

TEST_CASE("config errors carry the dotted field path") {
  using nlohmann::json;
  CHECK(field_of(json{{"bogus", 1}}) == "bogus");
  CHECK(field_of(json{{"damping", {{"gamma", 1.0}}}}) == "damping.gamma");
  CHECK(field_of(json{{"ic", {{"kind", "vortex"}}}}) == "ic.kind");
  CHECK(field_of(json{{"ic", {{"mode", {1, 2}}}}}) == "ic.mode");
  CHECK(field_of(json{{"grid", {{"n", 7}}}}) == "grid");
  CHECK(field_of(json{{"grid", {{"n", "big"}}}}) == "grid.n");
  CHECK(field_of(json{{"nu", "one"}}) == "nu");
  CHECK(field_of(json{{"diag_every", 2.5}}) == "diag_every");
  CHECK(field_of(json{{"advection", 1}}) == "advection");
  CHECK(field_of(json{{"seed", -1}}) == "seed");
  CHECK(field_of(json{{"damping", {{"poly_order", 1.5}}}}) == "damping.poly_order");
  CHECK(field_of(json::array()) == "<root>");
  CHECK(!field_of(json{{"nu", -1.0}}).empty());
  CHECK(!field_of(json{{"grid", {{"n", 16}}}, {"cutoff", 14.0}}).empty());
}

TEST_CASE("checkpoint round trip is bitwise") {
  SimConfig c;
  c.grid = Grid(8);
  c.cutoff = 3.5;
  c.ic.kind = InitialCondition::Kind::random;
  c.seed = 17;
  const State s0 = make_initial_state(c);
  const State s{s0.u_hat, 0.375};
  const fs::path dir = scratch_dir("checkpoint");
  const fs::path file = dir / "state.bin";
  write_checkpoint(file, c, s);
  const Checkpoint cp = read_checkpoint(file);
  CHECK(cp.state.t == 0.375);
  CHECK(cp.config.grid == c.grid);
  CHECK(cp.config.seed == c.seed);
  CHECK(cp.config.ic.kind == c.ic.kind);
  const auto a = s.u_hat.coeffs();
  const auto b = cp.state.u_hat.coeffs();
  REQUIRE(a.size() == b.size());
  CHECK(std::memcmp(a.data(), b.data(), a.size() * sizeof(Complex)) == 0);

  const auto size = fs::file_size(file);
  {
    std::ofstream app(file, std::ios::binary | std::ios::app);
    app.put('\0');
  }
  CHECK_THROWS_WITH_AS(read_checkpoint(file), doctest::Contains("trailing"), std::runtime_error);
  fs::resize_file(file, size - 5);
  CHECK_THROWS_WITH_AS(read_checkpoint(file), doctest::Contains("truncated"), std::runtime_error);
  {
    std::ofstream bad(file, std::ios::binary);
    bad << "EXPDAMP-CHECKPOINT 2\n";
  }
  CHECK_THROWS_WITH_AS(read_checkpoint(file), doctest::Contains("version-1"), std::runtime_error);
  CHECK_THROWS_AS(read_checkpoint(dir / "missing.bin"), std::runtime_error);

  SimConfig other = c;
  other.grid = Grid(16);
  CHECK_THROWS_AS(write_checkpoint(file, other, s), std::invalid_argument);
  fs::remove_all(dir);
}
