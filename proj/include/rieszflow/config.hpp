#pragma once

// Run configuration, read from a YAML file with one section per module:
// curve, params, init, integrator, diagnostics, output.

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "rieszflow/curve.hpp"
#include "rieszflow/diagnostics.hpp"
#include "rieszflow/dynamics.hpp"
#include "rieszflow/riesz.hpp"

namespace rieszflow {

/// Parse or validation failure; line is 1-based, 0 when unknown.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(const std::string& what, int line) : std::runtime_error(what), line_(line) {}
  int line() const { return line_; }

 private:
  int line_;
};

struct InitSpec {
  enum class Kind { uniform, random, jitter, file };
  Kind kind = Kind::random;
  std::optional<std::uint64_t> seed;
  double jitter = 0.5;  // amplitude in units of the mean spacing
  std::string path;     // one z per line, or a snapshot .json
};

struct DiagnosticsSpec {
  double epsilon = 0.01;
  std::vector<Window> windows{{0.0, 0.1}, {0.0, 0.25}, {0.0, 0.5}};
  int sample_every = 100;
};

struct OutputSpec {
  std::string directory = "out";
  bool trajectory = true;
  bool trajectory_full_z = false;
  int trajectory_every = 10;
  int snapshot_every = 0;  // 0 writes only the final snapshot
};

struct RunConfig {
  CurveSpec curve;
  std::string table_path;  // table curves only
  int grid_size = kDefaultGridSize;
  RieszParams params{2.0, 128};
  InitSpec init;
  IntegratorConfig integrator;
  DiagnosticsSpec diagnostics;
  OutputSpec output;

  /// Throws ConfigError.
  void validate() const;
};

const char* to_string(InitSpec::Kind kind);

/// Reads and validates a config file. Relative paths inside it resolve
/// against the file's directory.
RunConfig load_config(const std::string& path);
RunConfig parse_config(const std::string& text, const std::string& base_dir = ".");

/// YAML text that parse_config maps back to the same RunConfig.
std::string to_yaml(const RunConfig& cfg);

/// Builds the curve described by the config (loading the table if needed).
Curve build_configured_curve(const RunConfig& cfg);

/// Initial configuration described by the config.
Configuration initial_configuration(const RunConfig& cfg);

}  // namespace rieszflow
