#pragma once

#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "ergc/experiment/config.hpp"

namespace ergc {

enum class Command { Simulate, Couple, Ergodic, InviscidLimit };

std::string to_string(Command command);
/// "simulate", "couple", "ergodic" or "inviscid-limit".
Command command_from_string(const std::string& name);

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitDiverged = 3;

struct RunOutcome {
  int exit_status = kExitOk;
  /// Paths relative to the output directory, sorted; manifest.json is not listed.
  std::vector<std::string> outputs;
  std::filesystem::path directory;
};

/// Runs one subcommand and writes its outputs, resolved_config.json and
/// manifest.json into `out_dir`. Divergence beyond ensemble.diverged_tolerance
/// gives kExitDiverged; other errors propagate.
RunOutcome run_command(Command command, const ExperimentConfig& config, const std::filesystem::path& out_dir,
                       std::ostream& log);

/// --output if given, else $ERGC_OUTPUT_ROOT/output.directory, else output.directory.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config, const std::optional<std::string>& flag);

Json read_manifest(const std::filesystem::path& path);

/// Reruns the subcommand and config embedded in a manifest.
RunOutcome replay(const Json& manifest, const std::filesystem::path& out_dir, std::ostream& log);

/// Outputs whose size or hash differ between two manifests, plus outputs
/// present in only one of them.
std::vector<std::string> compare_outputs(const Json& a, const Json& b);

}  // namespace ergc
