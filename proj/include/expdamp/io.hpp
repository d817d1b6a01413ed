#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"

#include "expdamp/dynamics.hpp"
#include "expdamp/ledger.hpp"

namespace expdamp {

inline constexpr const char* kLedgerHeader =
    "t,l2_sq,grad_sq,damp_diss,cum_grad,cum_damp,ledger_lhs,max_speed";

/// Shortest decimal string that reads back to the same double.
std::string format_double(double v);

void write_ledger_csv(std::ostream& out, const std::vector<EnergyLedgerRow>& rows);
void write_ledger_csv(const std::filesystem::path& path, const std::vector<EnergyLedgerRow>& rows);
/// Throws std::runtime_error naming the offending column or line.
std::vector<EnergyLedgerRow> read_ledger_csv(std::istream& in);
std::vector<EnergyLedgerRow> read_ledger_csv(const std::filesystem::path& path);

/// Unknown keys and bad values raise ConfigError with the dotted field path.
SimConfig sim_config_from_json(const nlohmann::json& j);
nlohmann::json sim_config_to_json(const SimConfig& c);

const char* ic_kind_name(InitialCondition::Kind kind);

/// Version-tagged checkpoint: config echo plus raw coefficients.
void write_checkpoint(const std::filesystem::path& path, const SimConfig& config,
                      const State& state);
struct Checkpoint {
  SimConfig config;
  State state;
};
Checkpoint read_checkpoint(const std::filesystem::path& path);

}  // namespace expdamp
