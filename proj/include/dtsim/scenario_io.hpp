#pragma once

#include <string>

#include "dtsim/core.hpp"

namespace dtsim {

/// Malformed scenario text; carries the 1-based location of the problem.
class ParseError : public ConfigError {
 public:
  ParseError(const std::string& what, int line, int column)
      : ConfigError(what), line_(line), column_(column) {}
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

struct ParseResult {
  ScenarioConfig config;
  /// Schema problems (unknown keys, wrong types, bad enum names). Reported as
  /// violations, alongside whatever validate_config finds.
  ValidationReport schema;
};

/// Parses a scenario document. Top-level keys: topology, delay, horizon,
/// arrivals, channels, services, policy, controller, bootstrap, seed,
/// replications. Throws ParseError only for text that is not JSON.
ParseResult parse_scenario_json(const std::string& text);

/// Canonical JSON form; parse_scenario_json(serialize_scenario(c)) == c.
std::string serialize_scenario(const ScenarioConfig& cfg);

bool operator==(const ScenarioConfig& a, const ScenarioConfig& b);

}  // namespace dtsim
