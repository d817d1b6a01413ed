#include "expdamp/io.hpp"

#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "expdamp/errors.hpp"

namespace expdamp {

using nlohmann::json;

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

void write_ledger_csv(std::ostream& out, const std::vector<EnergyLedgerRow>& rows) {
  out << kLedgerHeader << '\n';
  for (const auto& r : rows) {
    out << format_double(r.t) << ',' << format_double(r.l2_sq) << ',' << format_double(r.grad_sq)
        << ',' << format_double(r.damp_diss) << ',' << format_double(r.cum_grad) << ','
        << format_double(r.cum_damp) << ',' << format_double(r.ledger_lhs) << ','
        << format_double(r.max_speed) << '\n';
  }
}

void write_ledger_csv(const std::filesystem::path& path, const std::vector<EnergyLedgerRow>& rows) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_ledger_csv(out, rows);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

namespace {

std::vector<std::string> split_commas(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double parse_cell(const std::string& cell, const std::string& column, std::size_t line_no) {
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (res.ec != std::errc() || res.ptr != cell.data() + cell.size()) {
    throw std::runtime_error("line " + std::to_string(line_no) + ": column '" + column +
                             "' is not a number: '" + cell + "'");
  }
  return v;
}

}  // namespace

std::vector<EnergyLedgerRow> read_ledger_csv(std::istream& in) {
  static const std::vector<std::string> expected = split_commas(kLedgerHeader);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty ledger file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = split_commas(line);
  for (std::size_t c = 0; c < expected.size(); ++c) {
    if (c >= header.size() || header[c] != expected[c]) {
      throw std::runtime_error("ledger header: missing or misplaced column '" + expected[c] + "'");
    }
  }
  if (header.size() != expected.size()) {
    throw std::runtime_error("ledger header: unexpected column '" + header[expected.size()] + "'");
  }
  std::vector<EnergyLedgerRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cells = split_commas(line);
    if (cells.size() != expected.size()) {
      const std::string col = cells.size() < expected.size() ? expected[cells.size()] : "<extra>";
      throw std::runtime_error("line " + std::to_string(line_no) + ": wrong number of fields (column '" +
                               col + "')");
    }
    double v[8];
    for (std::size_t c = 0; c < 8; ++c) v[c] = parse_cell(cells[c], expected[c], line_no);
    rows.push_back({v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7]});
  }
  return rows;
}

std::vector<EnergyLedgerRow> read_ledger_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_ledger_csv(in);
}

const char* ic_kind_name(InitialCondition::Kind kind) {
  switch (kind) {
    case InitialCondition::Kind::zero:
      return "zero";
    case InitialCondition::Kind::taylor_green:
      return "taylor_green";
    case InitialCondition::Kind::random:
      return "random";
    case InitialCondition::Kind::single_mode:
      return "single_mode";
  }
  return "?";
}

namespace {

// Reads typed members of one JSON object and rejects keys nobody asked for.
class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  std::string field(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  const json* find(const std::string& key) {
    seen_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  template <class T>
  void get(const std::string& key, T& out) {
    const json* v = find(key);
    if (!v) return;
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v->is_boolean()) throw ConfigError(field(key), "expected true or false");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v->is_number_integer()) throw ConfigError(field(key), "expected an integer");
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v->is_number()) throw ConfigError(field(key), "expected a number");
      }
      out = v->get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(field(key), e.what());
    }
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError(field(key), "unknown key");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

InitialCondition::Kind parse_kind(const std::string& s) {
  if (s == "zero") return InitialCondition::Kind::zero;
  if (s == "taylor_green") return InitialCondition::Kind::taylor_green;
  if (s == "random") return InitialCondition::Kind::random;
  if (s == "single_mode") return InitialCondition::Kind::single_mode;
  throw ConfigError("ic.kind", "expected zero, taylor_green, random or single_mode, got '" + s + "'");
}

}  // namespace

SimConfig sim_config_from_json(const json& j) {
  SimConfig c;
  ObjectReader root(j, "");

  if (const json* g = root.find("grid")) {
    ObjectReader rg(*g, "grid");
    int n = c.grid.n();
    double box = c.grid.box_length();
    rg.get("n", n);
    rg.get("box_length", box);
    rg.finish();
    try {
      c.grid = Grid(n, box);
    } catch (const std::invalid_argument& e) {
      throw ConfigError("grid", e.what());
    }
  }
  root.get("cutoff", c.cutoff);
  root.get("nu", c.nu);
  if (const json* d = root.find("damping")) {
    ObjectReader rd(*d, "damping");
    rd.get("alpha", c.damping.alpha);
    rd.get("beta", c.damping.beta);
    if (const json* m = rd.find("poly_order"); m && !m->is_null()) {
      if (!m->is_number_integer()) throw ConfigError("damping.poly_order", "expected an integer or null");
      c.damping.poly_order = m->get<int>();
    }
    rd.finish();
  }
  root.get("t_end", c.t_end);
  root.get("dt_max", c.dt_max);
  root.get("cfl_adv", c.cfl_adv);
  root.get("cfl_damp", c.cfl_damp);
  root.get("diag_every", c.diag_every);
  if (const json* ic = root.find("ic")) {
    ObjectReader ri(*ic, "ic");
    std::string kind = ic_kind_name(c.ic.kind);
    ri.get("kind", kind);
    c.ic.kind = parse_kind(kind);
    ri.get("amplitude", c.ic.amplitude);
    ri.get("slope", c.ic.slope);
    ri.get("energy", c.ic.energy);
    if (const json* mode = ri.find("mode")) {
      if (!mode->is_array() || mode->size() != 3) {
        throw ConfigError("ic.mode", "expected an array of three integers");
      }
      for (int a = 0; a < 3; ++a) {
        if (!(*mode)[a].is_number_integer()) throw ConfigError("ic.mode", "expected integers");
        c.ic.mode[a] = (*mode)[a].get<int>();
      }
    }
    ri.finish();
  }
  if (const json* seed = root.find("seed")) {
    if (!seed->is_number_unsigned()) throw ConfigError("seed", "expected a nonnegative integer");
    c.seed = seed->get<std::uint64_t>();
  }
  root.get("advection", c.advection);
  root.get("oversample", c.oversample);
  root.finish();
  c.validate();
  return c;
}

json sim_config_to_json(const SimConfig& c) {
  json j;
  j["grid"] = {{"n", c.grid.n()}, {"box_length", c.grid.box_length()}};
  j["cutoff"] = c.cutoff;
  j["nu"] = c.nu;
  j["damping"] = {{"alpha", c.damping.alpha}, {"beta", c.damping.beta}};
  j["damping"]["poly_order"] = c.damping.poly_order ? json(*c.damping.poly_order) : json(nullptr);
  j["t_end"] = c.t_end;
  j["dt_max"] = c.dt_max;
  j["cfl_adv"] = c.cfl_adv;
  j["cfl_damp"] = c.cfl_damp;
  j["diag_every"] = c.diag_every;
  j["ic"] = {{"kind", ic_kind_name(c.ic.kind)},
             {"amplitude", c.ic.amplitude},
             {"slope", c.ic.slope},
             {"energy", c.ic.energy},
             {"mode", c.ic.mode}};
  j["seed"] = c.seed;
  j["advection"] = c.advection;
  j["oversample"] = c.oversample;
  return j;
}

namespace {

constexpr const char* kCheckpointMagic = "EXPDAMP-CHECKPOINT 1";

void put_le(std::ostream& out, std::uint64_t bits) {
  unsigned char bytes[8];
  for (int b = 0; b < 8; ++b) bytes[b] = static_cast<unsigned char>(bits >> (8 * b));
  out.write(reinterpret_cast<const char*>(bytes), 8);
}

std::uint64_t get_le(std::istream& in) {
  unsigned char bytes[8];
  if (!in.read(reinterpret_cast<char*>(bytes), 8)) throw std::runtime_error("checkpoint truncated");
  std::uint64_t bits = 0;
  for (int b = 0; b < 8; ++b) bits |= static_cast<std::uint64_t>(bytes[b]) << (8 * b);
  return bits;
}

// Calls fn(flat) over all modes in row-major signed-k order.
template <class Fn>
void for_each_signed_mode(const Grid& g, Fn&& fn) {
  const int h = g.n() / 2;
  for (int k1 = -h; k1 < h; ++k1)
    for (int k2 = -h; k2 < h; ++k2)
      for (int k3 = -h; k3 < h; ++k3) fn(g.flat(g.index_of(k1), g.index_of(k2), g.index_of(k3)));
}

}  // namespace

void write_checkpoint(const std::filesystem::path& path, const SimConfig& config,
                      const State& state) {
  if (!(state.u_hat.grid() == config.grid)) {
    throw std::invalid_argument("write_checkpoint: state grid differs from config grid");
  }
  json header;
  header["config"] = sim_config_to_json(config);
  header["t"] = state.t;
  header["n"] = config.grid.n();
  header["cutoff"] = config.cutoff;
  header["layout"] = "3 components x n^3 modes, k in [-n/2, n/2) row-major, (re, im) float64 LE";
  const std::string text = header.dump();

  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  out << kCheckpointMagic << '\n';
  put_le(out, text.size());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for (int c = 0; c < 3; ++c) {
    for_each_signed_mode(config.grid, [&](std::size_t p) {
      const Complex v = state.u_hat.at(c, p);
      put_le(out, std::bit_cast<std::uint64_t>(v.real()));
      put_le(out, std::bit_cast<std::uint64_t>(v.imag()));
    });
  }
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

Checkpoint read_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string magic;
  std::getline(in, magic);
  if (magic != kCheckpointMagic) throw std::runtime_error("not a version-1 checkpoint: " + path.string());
  const std::uint64_t len = get_le(in);
  if (len > (1u << 24)) throw std::runtime_error("checkpoint header too large");
  std::string text(len, '\0');
  if (!in.read(text.data(), static_cast<std::streamsize>(len))) {
    throw std::runtime_error("checkpoint truncated");
  }
  const json header = json::parse(text);
  SimConfig config = sim_config_from_json(header.at("config"));
  const Grid grid = config.grid;
  Checkpoint cp{std::move(config), State{SpectralVectorField(grid, true), header.at("t").get<double>()}};
  for (int c = 0; c < 3; ++c) {
    for_each_signed_mode(cp.config.grid, [&](std::size_t p) {
      const double re = std::bit_cast<double>(get_le(in));
      const double im = std::bit_cast<double>(get_le(in));
      cp.state.u_hat.at(c, p) = Complex(re, im);
    });
  }
  if (in.peek() != std::char_traits<char>::eof()) {
    throw std::runtime_error("checkpoint has trailing bytes");
  }
  return cp;
}

}  // namespace expdamp
