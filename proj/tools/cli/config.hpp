#pragma once

// Run configuration: a single JSON file, validated field by field before any
// computation. Errors carry a JSON pointer to the offending field.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "chaplygin/diagnostics.hpp"
#include "chaplygin/systems.hpp"

namespace chaplygin::cli {

class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string pointer, const std::string& message)
      : std::runtime_error("config error at " + (pointer.empty() ? std::string("/") : pointer) +
                           ": " + message),
        pointer_(std::move(pointer)) {}
  const std::string& pointer() const noexcept { return pointer_; }

 private:
  std::string pointer_;
};

enum class Command { kSimulate, kDiagnose, kHamiltonise, kEmitPlot };

struct IntegratorSpec {
  Method method = Method::kRk45;
  double dt = 1e-3;
  double tol = 1e-9;
  double t_end = 10.0;
  std::size_t sample_stride = 1;
};

struct DiagnosticsSpec {
  SampleGrid grid;
  double tol = 1e-5;
  /// Random states for the Liouville and conformal residual statistics.
  std::size_t samples = 100;
  double p_scale = 1.0;
};

enum class PhiSource { kAuto, kBuiltin, kExpression };

struct HamiltoniseSpec {
  bool enabled = true;
  PhiSource source = PhiSource::kAuto;
  std::string expression;
  double dtau = 1e-3;
  /// Physical end time; the run stops once t reaches it.
  double t_end = 10.0;
  /// Optional cap on tau.
  std::optional<double> tau_end;
  double reference_tol = 1e-11;
  std::size_t sample_stride = 1;
};

struct OutputSpec {
  std::optional<std::filesystem::path> trajectory;
  std::optional<std::filesystem::path> report;
  std::optional<std::filesystem::path> plot;
};

struct RunConfig {
  std::filesystem::path config_path;
  std::string system_name;
  std::optional<SystemDefinition> system;
  std::optional<ReducedState> initial_state;
  IntegratorSpec integrator;
  std::optional<DiagnosticsSpec> diagnostics;
  HamiltoniseSpec hamiltonise;
  OutputSpec output;
};

/// Reads and validates the file for the given command. Relative output paths
/// resolve against the directory holding the config file.
RunConfig load_config(const std::filesystem::path& path, Command cmd);

RunConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                       Command cmd);

/// User function of the shape point for the named system. Expressions see
/// s1..sr; Veselova expressions also see g1..gn (gamma), the particle x, y
/// and the disk phi, theta.
ScalarMap shape_expression(const std::string& system_name, Index r, const std::string& source);

}  // namespace chaplygin::cli
