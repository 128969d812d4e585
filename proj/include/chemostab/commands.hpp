#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "chemostab/config.hpp"

namespace chemostab {

namespace exit_code {
inline constexpr int verdict = 0;
inline constexpr int validation = 1;
inline constexpr int runtime = 2;
}  // namespace exit_code

struct CommandOptions {
  /// Overrides output.dir when set.
  std::optional<std::filesystem::path> out_dir;
  int threads = 1;
  /// Overrides the config's random seed when set.
  std::optional<std::uint64_t> seed;
};

/// Constants after the config values, the convex-domain formula and (when
/// requested) measurement have been merged, in that order of precedence.
struct ResolvedConstants {
  KnownConstants constants;
  std::optional<PersistenceEstimate> persistence;
  std::optional<BoundsEstimate> bounds;
  std::vector<std::string> notes;
};

ResolvedConstants resolve_constants(const RunConfig& config, const CoefficientSet& coeffs,
                                    bool measure, int threads);

/// One period when the coefficients are periodic, else [t0, max(t_end, t0 + 1)].
Window stability_window(const RunConfig& config, const CoefficientSet& coeffs);

int cmd_simulate(const RunConfig& config, const CommandOptions& options, std::ostream& out);
int cmd_stability(const RunConfig& config, const CommandOptions& options, std::ostream& out);
int cmd_stability_experiment(const RunConfig& config, const CommandOptions& options,
                             std::ostream& out);
int cmd_sweep(const RunConfig& config, const CommandOptions& options, std::ostream& out);
int cmd_converge(const RunConfig& config, const CommandOptions& options, std::ostream& out);

const std::vector<std::string>& command_names();

/// Loads the config, dispatches and maps exceptions to exit codes. Failures
/// print a one-line JSON error block on `err`.
int run_command(const std::string& command, const std::filesystem::path& config_path,
                const CommandOptions& options, std::ostream& out, std::ostream& err);
int run_command(const std::string& command, const RunConfig& config,
                const CommandOptions& options, std::ostream& out, std::ostream& err);

}  // namespace chemostab
