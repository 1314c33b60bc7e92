#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <json.hpp>

namespace grpx::cli {

// Exit codes: every requested check passed, some check failed, error before a verdict.
inline constexpr int exit_pass = 0;
inline constexpr int exit_fail = 1;
inline constexpr int exit_error = 2;

// The run-config schema, compiled in from docs/config.schema.json.
const nlohmann::json& config_schema();

// Subset validator: type, properties, required, additionalProperties (bool), patternProperties,
// enum, minimum, maximum, exclusiveMinimum, exclusiveMaximum, items, minItems, maxItems.
// Returns one message per violation, each prefixed by its JSON pointer.
std::vector<std::string> validate(const nlohmann::json& schema, const nlohmann::json& value);

std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

// Doubles print with 17 significant digits; non-finite values as nan, inf, -inf.
std::string format_double(double x);

using Cell = std::variant<double, long long, std::string, bool>;

struct Table {
    std::string name;  // file stem
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;

    // "# <provenance>" line, header row, data rows.
    std::string to_csv(const std::string& provenance) const;
    nlohmann::json to_json() const;  // array of row objects
};

struct CommandResult {
    nlohmann::json report = nlohmann::json::object();
    std::vector<Table> tables;
    bool pass = true;
    std::string summary;  // one line for stdout
};

struct RunContext {
    nlohmann::json config;  // validated
    std::uint64_t seed = 1;
};

CommandResult cmd_check(const RunContext& ctx);
CommandResult cmd_variation(const RunContext& ctx);
CommandResult cmd_qp(const RunContext& ctx);
CommandResult cmd_young(const RunContext& ctx);
CommandResult cmd_rde(const RunContext& ctx);
CommandResult cmd_malliavin(const RunContext& ctx);
CommandResult cmd_roughness(const RunContext& ctx);
CommandResult cmd_density(const RunContext& ctx);

// Full command line (without the program name). Writes artifacts under --out and returns
// the exit code; messages go to out and err.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace grpx::cli
