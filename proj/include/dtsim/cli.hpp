#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "dtsim/core.hpp"
#include "dtsim/engine.hpp"

namespace dtsim {

std::vector<std::string> builtin_names();

/// Fully resolved builtin scenario; throws ConfigError for unknown names.
ScenarioConfig builtin_scenario(const std::string& name);

/// Human-readable notes for a builtin, listing which parameters are placeholders.
std::string describe_builtin(const std::string& name);

/// Builtin name or path to a scenario JSON file. The result is validated.
ScenarioConfig load_scenario(const std::string& source);

/// Slot-by-slot table: t, A, Q, Q_rx, then Qe/Qe_rx (UT) or Obs/Obs_rx
/// (Naive), then the requested flows F. Qe in row t is the emulated state at
/// slot t.
void write_trace_table(std::ostream& os, const Trace& trace, std::int64_t slots);

/// Entry point; returns the process exit code (0 ok, 2 usage, 3 config, 4 runtime).
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dtsim
