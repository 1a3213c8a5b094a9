#include <iostream>

#include "CLI11.hpp"
#include "commands.hpp"
#include "mvdyn/error.hpp"
#include "mvdyn/version.hpp"

namespace fs = std::filesystem;
using namespace mvdyn::cli;

int main(int argc, char** argv) {
  CLI::App app{"Measure-valued consumer-resource dynamics on a finite strategy space"};
  app.set_version_flag("--version", std::string(mvdyn::kVersion));
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  double tolerance = 0.0;

  auto* simulate = app.add_subcommand("simulate", "Integrate a scenario and write trajectory, diagnostics");
  simulate->add_option("--scenario,scenario", scenario_path, "Scenario JSON file")->required();
  simulate->add_option("--out", out_dir, "Output directory");

  auto* check = app.add_subcommand("check", "Run the invariant checks on scenarios");
  check->add_option("--scenario,scenario", scenario_path, "Scenario file or directory");
  check->add_option("--out", out_dir, "Write check.json here");
  check->add_option("--seed", seed, "Seed for --random scenarios");
  std::size_t random_count = 0;
  check->add_option("--random", random_count, "Also check N random admissible scenarios");
  auto* tol_opt = check->add_option("--tolerance", tolerance, "Semiflow and mass-balance tolerance");

  auto* flatnorm = app.add_subcommand("flatnorm", "Flat (dual bounded-Lipschitz) distance of two measures");
  std::string measure_a, measure_b;
  flatnorm->add_option("a", measure_a, "First measure file")->required();
  flatnorm->add_option("b", measure_b, "Second measure file")->required();

  auto* sweep = app.add_subcommand("sweep", "Run a scenario template over a parameter grid");
  std::vector<std::string> params;
  sweep->add_option("--scenario,scenario", scenario_path, "Scenario template")->required();
  sweep->add_option("--param", params, "path=v1,v2,... (repeatable)")->required();
  sweep->add_option("--out", out_dir, "Output directory")->required();
  sweep->add_option("--jobs", jobs, "Worker threads")->check(CLI::PositiveNumber);
  sweep->add_option("--seed", seed, "Unused; accepted for symmetry with check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kValidation;
  }

  if (*simulate) {
    return cmd_simulate(scenario_path,
                        out_dir.empty() ? std::nullopt : std::optional<fs::path>(out_dir),
                        std::cout);
  }
  if (*check) {
    CheckOptions options;
    if (*tol_opt) options.tolerance = tolerance;
    options.random_scenarios = random_count;
    options.seed = seed;
    if (!out_dir.empty()) options.out_dir = out_dir;
    return cmd_check(scenario_path.empty() ? std::nullopt : std::optional<fs::path>(scenario_path),
                     options, std::cout);
  }
  if (*flatnorm) return cmd_flatnorm(measure_a, measure_b, std::cout);
  if (*sweep) {
    std::vector<SweepParameter> parsed;
    try {
      for (const auto& p : params) parsed.push_back(parse_sweep_parameter(p));
    } catch (const mvdyn::Error& e) {
      std::cout << error_json(e) << '\n';
      return kValidation;
    }
    return cmd_sweep(scenario_path, parsed, out_dir, jobs, std::cout);
  }
  return kValidation;
}
