#pragma once

#include "qcurv/config.hpp"

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>

namespace qcurv {

enum class Command { Info, Flow, Green, Bubble, MaxPrinciple };

const char* to_string(Command c);
Command command_from_string(const std::string& s);

struct RunOptions {
  std::uint64_t seed = 0;
  /// Overrides [output] dir when set.
  std::optional<std::string> out_dir;
};

/// Runs one subcommand; human-readable progress goes to `log`, files to the output
/// directory.  Returns the process exit status.  Library errors propagate as Error.
int run_command(const ExperimentConfig& cfg, Command cmd, const RunOptions& opt, std::ostream& log);

/// Discretization described by the config.
DiscPtr make_discretization(const ExperimentConfig& cfg);

/// {"error": kind, "message": text} on one line.
std::string error_json(const std::string& kind, const std::string& message);

}  // namespace qcurv
