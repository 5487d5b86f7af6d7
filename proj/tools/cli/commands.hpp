#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>

#include "config.hpp"

namespace chaplygin::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitDomain = 3;
inline constexpr int kExitPrecondition = 4;

/// A precondition of the requested run does not hold (e.g. the system is not
/// phi-simple, or the initial state lies outside the chart).
class PreconditionFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct CommandContext {
  /// Worker threads for grid sweeps and residual channels (0 = all cores).
  unsigned threads = 0;
  /// Seed for the random states used in diagnostic statistics.
  std::uint64_t seed = 12345;
  std::ostream* out = nullptr;
  std::ostream* err = nullptr;
};

int cmd_simulate(const RunConfig& cfg, const CommandContext& ctx);
int cmd_diagnose(const RunConfig& cfg, const CommandContext& ctx);
int cmd_hamiltonise(const RunConfig& cfg, const CommandContext& ctx);
int cmd_emit_plot(const RunConfig& cfg, const CommandContext& ctx);

/// Loads the config for `cmd`, runs it and maps failures onto the exit-code
/// contract: 2 config/parse error, 3 domain exit, 4 precondition failure.
int run_command(Command cmd, const std::filesystem::path& config, const CommandContext& ctx);

}  // namespace chaplygin::cli
