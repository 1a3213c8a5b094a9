#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "mvdyn/analysis.hpp"
#include "mvdyn/error.hpp"
#include "mvdyn/scenario.hpp"

namespace mvdyn::cli {

/// Process exit codes.
enum ExitCode : int {
  kOk = 0,
  kCheckFailed = 1,
  kValidation = 2,
  kNumerical = 3,
  kIo = 4,
};

int exit_code_for(ErrorKind kind) noexcept;

/// {"error": {"kind", "message", "exit_code", ...}} on one line.
std::string error_json(const Error& e);

/// "# mvdyn <version> scenario=<hash>" followed by "t,S,mass,w0,...,w{n-1}",
/// numbers with 17 significant digits.
void write_trajectory_csv(const std::filesystem::path& path, const Trajectory& trajectory,
                          const std::string& scenario_hash);

/// Diagnostics, endpoint and metadata as a JSON document (pretty-printed).
std::string diagnostics_json(const Scenario& scenario, const PreparedModel& prepared,
                             const Trajectory& trajectory, const DiagnosticsReport& report);

struct SimulateResult {
  int exit_code = kOk;
  std::optional<DiagnosticsReport> report;
  std::optional<SystemState> endpoint;
};

/// Writes trajectory.csv, diagnostics.json and concentration.csv into
/// `out_dir`. Errors are reported as JSON on `out` and in the exit code.
SimulateResult simulate(const Scenario& scenario, const std::filesystem::path& out_dir,
                        std::ostream& out);
int cmd_simulate(const std::filesystem::path& scenario_path,
                 const std::optional<std::filesystem::path>& out_dir, std::ostream& out);

struct CheckOptions {
  /// Overrides the semiflow and mass-balance tolerances (default 1e-6).
  std::optional<double> tolerance;
  /// Extra randomly generated admissible scenarios.
  std::size_t random_scenarios = 0;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> out_dir;
};

struct CheckItem {
  std::string scenario;
  std::string check;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string note;
};

/// Runs the invariant suite on one scenario.
std::vector<CheckItem> run_checks(const Scenario& scenario, const CheckOptions& options);

/// `path` may be a scenario file or a directory of *.json scenarios.
int cmd_check(const std::optional<std::filesystem::path>& path, const CheckOptions& options,
              std::ostream& out);

/// Prints flat_distance(A, B) with 12 decimals.
int cmd_flatnorm(const std::filesystem::path& a, const std::filesystem::path& b,
                 std::ostream& out);

struct SweepParameter {
  std::string path;  // dotted path into the scenario document, e.g. rates.inflow
  std::vector<std::string> values;  // JSON literals
};

/// Parses "rates.inflow=0.5,1,2".
SweepParameter parse_sweep_parameter(const std::string& spec);

int cmd_sweep(const std::filesystem::path& template_path,
              const std::vector<SweepParameter>& parameters,
              const std::filesystem::path& out_dir, std::size_t jobs, std::ostream& out);

}  // namespace mvdyn::cli
