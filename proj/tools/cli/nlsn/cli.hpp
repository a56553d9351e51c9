#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "nlsn/params.hpp"
#include "nlsn/solver.hpp"
#include "nlsn/survey.hpp"

namespace nlsn::cli {

enum class Command { Oracle, Solve, Sweep, Threshold, Check };
enum class OutputFormat { Json, Csv };

std::string_view to_string(Command command) noexcept;

/// A fully validated run description. Grid fields left empty take the
/// default of the command (oracle grids and solver grids use different
/// length units).
struct RunConfig {
  Command command = Command::Solve;
  Params problem{};
  std::optional<double> r_max{};
  std::optional<std::size_t> n_nodes{};
  SolverOptions solver{};
  double oracle_tol = 1e-7;
  std::optional<SweepAxis> axis{};
  std::vector<double> values{};
  std::optional<double> m_estimate{};
  OutputFormat format = OutputFormat::Json;
  /// Empty means standard output.
  std::string path{};
  std::uint64_t seed = 0;
  bool timing = false;
};

/// One row of the defaults table: every accepted key with its default.
struct DefaultEntry {
  std::string_view key;
  std::string_view value;
  std::string_view meaning;
};

/// The single source of truth for accepted keys and their defaults.
std::span<const DefaultEntry> defaults();
/// Human-readable rendering of defaults(), as printed by --show-defaults.
std::string defaults_table();

/// Parses `key = value` lines. '#' starts a comment. p, q and sweep values
/// accept the token 2* for the Sobolev exponent of N. Throws Error(Config)
/// with a line number on syntax errors, duplicate or unknown keys, and with
/// the constraint name when the problem data are invalid for the command.
RunConfig parse_config(std::string_view text);

struct RunOutcome {
  int exit_code = 0;
  /// JSON or CSV document to be written to the output path.
  std::string artifact;
  /// Short human summary for standard error; may be empty.
  std::string message;
};

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitNotConverged = 2;
inline constexpr int kExitNonexistence = 3;

/// Runs the command without touching the file system. `jobs` bounds the
/// sweep worker pool (0 = hardware concurrency).
RunOutcome execute(const RunConfig& config, unsigned jobs = 1);

/// execute() followed by writing the artifact to config.path (or stdout).
/// Returns the exit code; errors are reported on stderr and map to 1.
int run(const RunConfig& config, unsigned jobs = 1);

}  // namespace nlsn::cli
