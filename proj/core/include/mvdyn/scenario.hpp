#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "mvdyn/dynamics.hpp"
#include "mvdyn/picard.hpp"

namespace mvdyn {

/// A fully parsed simulation input: the strategy space, the vital rates,
/// the mutation kernel, the initial state and the run controls.
///
/// Scenarios are JSON documents; see docs/scenario-format.md for the schema.
struct Scenario {
  std::string name;
  SpacePtr space;
  VitalRates rates;
  MutationKernel kernel;
  std::string kernel_family;
  SystemState initial;
  StepControl control;
  std::optional<double> truncation;
  PicardOptions picard;
  std::uint64_t seed = 0;
  bool allow_unvalidated = false;
  std::string output_dir;
  /// Sorted-key compact dump of the input document.
  std::string canonical_json;
  /// SHA-256 of canonical_json, lowercase hex.
  std::string hash;

  /// Validates the rates and truncates them (see prepare_model).
  PreparedModel prepare() const;
};

/// Throws ConfigError (or DimensionError) with a message naming the
/// offending field.
Scenario parse_scenario(std::string_view json_text);
Scenario load_scenario(const std::filesystem::path& path);

/// Measure file: {"space": <space spec>, "atoms": [[index, weight], ...]}
/// or {"space": ..., "weights": [...]}.
DiscreteMeasure parse_measure(std::string_view json_text);
DiscreteMeasure load_measure(const std::filesystem::path& path);
std::string measure_to_json(const DiscreteMeasure& mu);

struct RandomScenarioOptions {
  std::size_t max_atoms = 20;
  double t_end = 200.0;
  double dt = 1e-2;
  /// Restrict to the pure-selection kernel.
  bool pure_selection = false;
};

/// Admissible random scenario as a JSON document; identical seeds give
/// identical documents.
std::string random_scenario_json(std::uint64_t seed, const RandomScenarioOptions& options = {});

/// Reads a whole file; throws IoError.
std::string read_text_file(const std::filesystem::path& path);

std::string sha256_hex(std::string_view data);

}  // namespace mvdyn
