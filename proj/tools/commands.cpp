#include "commands.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "mvdyn/error.hpp"
#include "mvdyn/version.hpp"

namespace mvdyn::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kConfig:
    case ErrorKind::kDimension:
    case ErrorKind::kAssumption:
      return kValidation;
    case ErrorKind::kNumerical:
    case ErrorKind::kConvergence:
    case ErrorKind::kPositivity:
      return kNumerical;
    case ErrorKind::kIo:
      return kIo;
  }
  return kNumerical;
}

namespace {

json error_object(const Error& e) {
  return {{"kind", to_string(e.kind())}, {"message", e.what()}, {"exit_code", exit_code_for(e.kind())}};
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  os << content;
  if (!os) throw IoError("failed writing " + path.string());
}

std::string header_line(const std::string& hash) {
  return fmt::format("# mvdyn {} scenario={}\n", kVersion, hash);
}

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

json assumptions_json(const AssumptionReport& r) {
  return {{"ok", r.ok},
          {"violations", r.violations},
          {"samples", r.samples},
          {"substrate_max", r.substrate_max},
          {"mortality_floor", r.mortality_floor},
          {"uptake_sup", r.uptake_sup},
          {"mortality_sup", r.mortality_sup},
          {"uptake_lipschitz", r.uptake_lipschitz},
          {"mortality_lipschitz", r.mortality_lipschitz}};
}

}  // namespace

std::string error_json(const Error& e) { return json{{"error", error_object(e)}}.dump(); }

void write_trajectory_csv(const fs::path& path, const Trajectory& trajectory,
                          const std::string& scenario_hash) {
  std::string text = header_line(scenario_hash);
  text += "t,S,mass";
  for (std::size_t j = 0; j < trajectory.atoms(); ++j) text += fmt::format(",w{}", j);
  text += '\n';
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    text += fmt::format("{:.16e},{:.16e},{:.16e}", trajectory.time(k), trajectory.substrate(k),
                        trajectory.mass(k));
    for (double w : trajectory.weights(k)) text += fmt::format(",{:.16e}", w);
    text += '\n';
  }
  write_file(path, text);
}

std::string diagnostics_json(const Scenario& scenario, const PreparedModel& prepared,
                             const Trajectory& trajectory, const DiagnosticsReport& report) {
  const auto end = trajectory.back();
  const auto w = end.population.weights();
  json breakeven = json::array();
  for (const auto& b : report.breakeven) breakeven.push_back(optional_number(b));
  json series = json::array();
  for (const auto& [t, d] : report.concentration_series) series.push_back({t, d});

  json doc = {
      {"version", kVersion},
      {"scenario", scenario.name},
      {"scenario_hash", scenario.hash},
      {"truncation_level", prepared.truncation_level},
      {"assumptions", assumptions_json(prepared.assumptions)},
      {"integrator",
       {{"method", trajectory.metadata.integrator},
        {"dt", trajectory.metadata.dt},
        {"tolerance", trajectory.metadata.tolerance},
        {"accepted_steps", trajectory.metadata.accepted_steps},
        {"rejected_steps", trajectory.metadata.rejected_steps},
        {"clamped_components", trajectory.metadata.clamped_components}}},
      {"endpoint",
       {{"t", trajectory.time(trajectory.size() - 1)},
        {"S", end.substrate},
        {"mass", end.mass()},
        {"weights", std::vector<double>(w.begin(), w.end())}}},
      {"diagnostics",
       {{"dissipativity_bound", report.dissipativity_bound},
        {"initial_mass", report.initial_mass},
        {"max_mass", report.max_mass},
        {"final_mass", report.final_mass},
        {"limsup_proxy", report.limsup_proxy},
        {"min_weight", report.min_weight},
        {"min_substrate", report.min_substrate},
        {"mass_balance_residual", report.mass_balance_residual},
        {"semiflow_residual", optional_number(report.semiflow_residual)},
        {"winner", report.winner ? json(*report.winner) : json(nullptr)},
        {"concentration_distance", report.concentration_distance},
        {"concentration_series", series},
        {"breakeven", breakeven}}},
  };
  return doc.dump(2) + "\n";
}

SimulateResult simulate(const Scenario& scenario, const fs::path& out_dir, std::ostream& out) {
  SimulateResult result;
  try {
    std::optional<PreparedModel> prepared;
    try {
      prepared.emplace(scenario.prepare());
    } catch (const AssumptionError& e) {
      const double level = scenario.truncation.value_or(
          default_truncation_level(scenario.rates, scenario.initial));
      auto report = validate_assumptions(scenario.rates, *scenario.space, level);
      json err = error_object(e);
      err["violations"] = report.violations;
      err["assumptions"] = assumptions_json(report);
      out << json{{"error", err}}.dump() << '\n';
      result.exit_code = kValidation;
      return result;
    }
    auto trajectory = integrate(scenario.initial, prepared->model, scenario.control);
    trajectory.metadata.scenario_hash = scenario.hash;
    auto report = diagnose(trajectory, prepared->model);

    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());
    write_trajectory_csv(out_dir / "trajectory.csv", trajectory, scenario.hash);
    write_file(out_dir / "diagnostics.json",
               diagnostics_json(scenario, *prepared, trajectory, report));
    std::string conc = header_line(scenario.hash) + "t,concentration_distance\n";
    for (const auto& [t, d] : report.concentration_series) {
      conc += fmt::format("{:.16e},{:.16e}\n", t, d);
    }
    write_file(out_dir / "concentration.csv", conc);

    out << json{{"status", "ok"},
                {"scenario_hash", scenario.hash},
                {"out", out_dir.string()},
                {"final_mass", report.final_mass},
                {"dissipativity_bound", report.dissipativity_bound}}
               .dump()
        << '\n';
    result.report = std::move(report);
    result.endpoint = trajectory.back();
  } catch (const Error& e) {
    out << error_json(e) << '\n';
    result.exit_code = exit_code_for(e.kind());
  }
  return result;
}

int cmd_simulate(const fs::path& scenario_path, const std::optional<fs::path>& out_dir,
                 std::ostream& out) {
  try {
    const auto scenario = load_scenario(scenario_path);
    fs::path dir = out_dir ? *out_dir
                   : !scenario.output_dir.empty() ? fs::path(scenario.output_dir)
                                                  : fs::path("mvdyn-out") / scenario.name;
    return simulate(scenario, dir, out).exit_code;
  } catch (const Error& e) {
    out << error_json(e) << '\n';
    return exit_code_for(e.kind());
  }
}

namespace {

constexpr double kDefaultResidualTolerance = 1e-6;
constexpr double kPicardTolerance = 1e-5;
constexpr double kConeTolerance = 1e-9;

double sup_difference(const SystemState& a, const SystemState& b) {
  double d = std::abs(a.substrate - b.substrate);
  for (std::size_t j = 0; j < a.population.size(); ++j) {
    d = std::max(d, std::abs(a.population[j] - b.population[j]));
  }
  return d;
}

}  // namespace

std::vector<CheckItem> run_checks(const Scenario& scenario, const CheckOptions& options) {
  std::vector<CheckItem> items;
  const double tol = options.tolerance.value_or(kDefaultResidualTolerance);
  auto add = [&](std::string check, bool passed, double value, double limit, std::string note = {}) {
    items.push_back({scenario.name, std::move(check), passed, value, limit, std::move(note)});
  };
  // Runs one check body; an exception counts as a failed check.
  auto guarded = [&](const std::string& check, double limit, auto&& body) {
    try {
      body();
    } catch (const Error& e) {
      add(check, false, std::numeric_limits<double>::quiet_NaN(), limit,
          std::string(to_string(e.kind())) + ": " + e.what());
    }
  };

  std::optional<PreparedModel> prepared;
  try {
    prepared.emplace(scenario.prepare());
  } catch (const Error& e) {
    add("validation", false, std::numeric_limits<double>::quiet_NaN(), 0.0, e.what());
    return items;
  }
  const Model& model = prepared->model;
  const auto& control = scenario.control;
  // Finite differences in the mass-balance check need every step recorded.
  StepControl dense = control;
  dense.output_stride = 1;

  std::optional<Trajectory> trajectory;
  guarded("positivity", -kConeTolerance, [&] {
    trajectory.emplace(integrate(scenario.initial, model, dense));
    double lowest = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < trajectory->size(); ++k) {
      lowest = std::min(lowest, trajectory->substrate(k));
      for (double w : trajectory->weights(k)) lowest = std::min(lowest, w);
    }
    add("positivity", lowest >= -kConeTolerance, lowest, -kConeTolerance);
  });

  if (trajectory) {
    guarded("mass_balance", tol, [&] {
      const double r = mass_balance_residual(*trajectory, model);
      add("mass_balance", r <= tol, r, tol);
    });
    guarded("dissipativity", 1e-6, [&] {
      const auto report = diagnose(*trajectory, model, DiagnoseOptions{1, std::nullopt});
      const double bound = report.dissipativity_bound;
      const double allowed = std::max(report.initial_mass, bound) + 1e-6;
      add("dissipativity", report.max_mass <= allowed, report.max_mass - allowed + 1e-6, 1e-6,
          fmt::format("max M {:.6g}, bound {:.6g}", report.max_mass, bound));
      const double d = dissipation_rate(model.rates().dilution(), model.rates().mortality_floor());
      if (control.t_end >= 50.0 / d) {
        const double excess = report.final_mass - bound;
        add("eventual_bound", excess <= 0.01, excess, 0.01);
      }
    });
  }

  guarded("semiflow", tol, [&] {
    const double s = control.t_end / 4.0;
    const double t = control.t_end - s;
    const double r = control.t_end > 0.0 ? semiflow_residual(scenario.initial, model, control, s, t) : 0.0;
    add("semiflow", r <= tol, r, tol);
  });

  guarded("rk4_order", 0.0, [&] {
    StepControl c = control;
    c.method = StepMethod::kFixed;
    const double horizon = std::min(control.t_end, std::max(1.0, 8.0 * control.dt));
    if (!(horizon > 0.0)) {
      add("rk4_order", true, 0.0, 0.0, "empty horizon");
      return;
    }
    c.dt = std::min(control.dt, horizon);
    const auto coarse = semiflow(horizon, scenario.initial, model, c);
    StepControl half = c;
    half.dt = c.dt / 2.0;
    StepControl ref = c;
    ref.dt = c.dt / 8.0;
    const auto fine = semiflow(horizon, scenario.initial, model, half);
    const auto reference = semiflow(horizon, scenario.initial, model, ref);
    const double e1 = sup_difference(coarse, reference);
    const double e2 = sup_difference(fine, reference);
    if (e1 < 1e-10) {
      add("rk4_order", true, 16.0, 16.0, "errors below the measurable floor");
      return;
    }
    const double ratio = e2 > 0.0 ? e1 / e2 : std::numeric_limits<double>::infinity();
    add("rk4_order", ratio >= 8.0 && ratio <= 32.0, ratio, 16.0, "expected 16 within factor 2");
  });

  guarded("lipschitz_dependence", std::numeric_limits<double>::infinity(), [&] {
    StepControl c = control;
    c.method = StepMethod::kFixed;
    c.dt = std::min(control.dt, 1e-3);
    const double horizon = std::min(control.t_end, 1.0);
    if (!(horizon > 0.0)) {
      add("lipschitz_dependence", true, 0.0, std::numeric_limits<double>::infinity(), "empty horizon");
      return;
    }
    const double constant = lipschitz_dependence(scenario.initial, model, c, horizon);
    add("lipschitz_dependence", std::isfinite(constant), constant,
        std::numeric_limits<double>::infinity(), fmt::format("empirical constant at t={:.3g}", horizon));
  });

  guarded("picard_vs_rk4", kPicardTolerance, [&] {
    const double horizon = scenario.picard.horizon;
    if (!(horizon > 0.0)) {
      add("picard_vs_rk4", true, 0.0, kPicardTolerance, "empty horizon");
      return;
    }
    PicardOptions popts = scenario.picard;
    const auto picard = picard_solve(scenario.initial, model, popts);
    StepControl c = control;
    c.method = StepMethod::kFixed;
    c.dt = std::min(control.dt, 1e-3);
    const auto rk = semiflow(horizon, scenario.initial, model, c);
    const auto end = picard.trajectory.back();
    const double gap = std::abs(end.substrate - rk.substrate) + flat_distance(end.population, rk.population);
    add("picard_vs_rk4", gap <= kPicardTolerance, gap, kPicardTolerance);
    const double ratio = picard.contraction_ratio();
    add("picard_contraction", ratio < 1.0, ratio, 1.0,
        fmt::format("{} iterations, lambda {:.4g}", picard.total_iterations(), picard.lambda));
  });
  return items;
}

int cmd_check(const std::optional<fs::path>& path, const CheckOptions& options, std::ostream& out) {
  std::vector<Scenario> scenarios;
  int worst = kOk;
  try {
    if (path) {
      if (fs::is_directory(*path)) {
        std::vector<fs::path> files;
        for (const auto& entry : fs::directory_iterator(*path)) {
          if (entry.is_regular_file() && entry.path().extension() == ".json") files.push_back(entry.path());
        }
        std::sort(files.begin(), files.end());
        for (const auto& f : files) {
          try {
            scenarios.push_back(load_scenario(f));
          } catch (const Error& e) {
            out << f.string() << ": " << error_json(e) << '\n';
            worst = std::max(worst, exit_code_for(e.kind()));
          }
        }
      } else if (fs::exists(*path)) {
        scenarios.push_back(load_scenario(*path));
      } else {
        throw IoError("no such file or directory: " + path->string());
      }
    }
    for (std::size_t r = 0; r < options.random_scenarios; ++r) {
      scenarios.push_back(parse_scenario(random_scenario_json(options.seed + r)));
    }
  } catch (const Error& e) {
    out << error_json(e) << '\n';
    return exit_code_for(e.kind());
  }

  out << scenarios.size() << " scenarios\n";
  json report = json::array();
  std::size_t failures = 0;
  for (const auto& scenario : scenarios) {
    for (const auto& item : run_checks(scenario, options)) {
      out << fmt::format("{:<4} {:<28} {:<20} value={:<12.4g} limit={:<10.3g} {}\n",
                         item.passed ? "PASS" : "FAIL", item.scenario, item.check, item.value,
                         item.tolerance, item.note);
      if (!item.passed) ++failures;
      report.push_back({{"scenario", item.scenario},
                        {"scenario_hash", scenario.hash},
                        {"check", item.check},
                        {"passed", item.passed},
                        {"value", std::isfinite(item.value) ? json(item.value) : json(nullptr)},
                        {"tolerance", item.tolerance},
                        {"note", item.note}});
    }
  }
  if (options.out_dir) {
    try {
      fs::create_directories(*options.out_dir);
      write_file(*options.out_dir / "check.json",
                 json{{"version", kVersion}, {"results", report}}.dump(2) + "\n");
    } catch (const Error& e) {
      out << error_json(e) << '\n';
      return kIo;
    } catch (const fs::filesystem_error& e) {
      out << error_json(IoError(e.what())) << '\n';
      return kIo;
    }
  }
  out << failures << " failed\n";
  if (failures > 0) worst = std::max(worst, static_cast<int>(kCheckFailed));
  return worst;
}

int cmd_flatnorm(const fs::path& a, const fs::path& b, std::ostream& out) {
  try {
    const auto mu = load_measure(a);
    const auto nu = load_measure(b);
    out << fmt::format("{:.12f}\n", flat_distance(mu, nu));
    return kOk;
  } catch (const Error& e) {
    out << error_json(e) << '\n';
    return exit_code_for(e.kind());
  }
}

SweepParameter parse_sweep_parameter(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos || eq == 0 || eq + 1 == spec.size()) {
    throw ConfigError("sweep parameter must look like path=v1,v2,...: " + spec);
  }
  SweepParameter p{spec.substr(0, eq), {}};
  std::stringstream values(spec.substr(eq + 1));
  std::string item;
  while (std::getline(values, item, ',')) {
    if (item.empty()) throw ConfigError("empty value in sweep parameter " + spec);
    p.values.push_back(item);
  }
  return p;
}

namespace {

json::json_pointer pointer_for(const std::string& dotted) {
  std::string ptr;
  std::stringstream parts(dotted);
  std::string part;
  while (std::getline(parts, part, '.')) ptr += "/" + part;
  return json::json_pointer(ptr);
}

json literal(const std::string& text) {
  try {
    json v = json::parse(text);
    if (v.is_number()) return json(v.get<double>());
    return v;
  } catch (const json::parse_error&) {
    return json(text);
  }
}

}  // namespace

int cmd_sweep(const fs::path& template_path, const std::vector<SweepParameter>& parameters,
              const fs::path& out_dir, std::size_t jobs, std::ostream& out) {
  json base;
  try {
    base = json::parse(read_text_file(template_path));
  } catch (const Error& e) {
    out << error_json(e) << '\n';
    return exit_code_for(e.kind());
  } catch (const json::exception& e) {
    out << error_json(ConfigError(std::string("invalid template: ") + e.what())) << '\n';
    return kValidation;
  }

  // Cartesian product, last parameter varying fastest.
  std::vector<std::vector<std::size_t>> grid{{}};
  for (const auto& p : parameters) {
    std::vector<std::vector<std::size_t>> next;
    for (const auto& prefix : grid) {
      for (std::size_t v = 0; v < p.values.size(); ++v) {
        auto row = prefix;
        row.push_back(v);
        next.push_back(std::move(row));
      }
    }
    grid = std::move(next);
  }

  struct Row {
    int exit_code = kOk;
    std::string status;
    std::string hash;
    double endpoint_mass = std::nan("");
    double bound = std::nan("");
    std::optional<std::size_t> winner;
    double concentration = std::nan("");
  };
  std::vector<Row> rows(grid.size());

  auto run_one = [&](std::size_t index) {
    Row& row = rows[index];
    std::ostringstream log;
    try {
      json doc = base;
      for (std::size_t k = 0; k < parameters.size(); ++k) {
        doc[pointer_for(parameters[k].path)] = literal(parameters[k].values[grid[index][k]]);
      }
      const auto scenario = parse_scenario(doc.dump());
      row.hash = scenario.hash;
      const auto result = simulate(scenario, out_dir / fmt::format("run_{:04d}", index), log);
      row.exit_code = result.exit_code;
      if (result.report) {
        row.endpoint_mass = result.report->final_mass;
        row.bound = result.report->dissipativity_bound;
        row.winner = result.report->winner;
        row.concentration = result.report->concentration_distance;
      }
    } catch (const Error& e) {
      row.exit_code = exit_code_for(e.kind());
      log << error_json(e);
    } catch (const json::exception& e) {
      row.exit_code = kValidation;
      log << error_json(ConfigError(e.what()));
    }
    row.status = row.exit_code == kOk ? "ok" : "error";
  };

  const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, grid.size()));
  std::atomic<std::size_t> next_index{0};
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next_index++; i < grid.size(); i = next_index++) run_one(i);
    });
  }
  for (auto& t : pool) t.join();

  std::string summary = header_line(sha256_hex(base.dump())) + "run";
  for (const auto& p : parameters) summary += "," + p.path;
  summary +=
      ",status,exit_code,endpoint_mass,dissipativity_bound,bound_margin,winner,"
      "concentration_distance,scenario_hash\n";
  int worst = kOk;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const Row& row = rows[i];
    summary += fmt::format("{}", i);
    for (std::size_t k = 0; k < parameters.size(); ++k) {
      summary += "," + parameters[k].values[grid[i][k]];
    }
    summary += fmt::format(",{},{},{:.16e},{:.16e},{:.16e},{},{:.16e},{}\n", row.status,
                           row.exit_code, row.endpoint_mass, row.bound,
                           row.bound - row.endpoint_mass,
                           row.winner ? std::to_string(*row.winner) : std::string(),
                           row.concentration, row.hash);
    worst = std::max(worst, row.exit_code);
    out << fmt::format("run {:04d}: {} (exit {})\n", i, row.status, row.exit_code);
  }
  try {
    fs::create_directories(out_dir);
    write_file(out_dir / "summary.csv", summary);
  } catch (const Error& e) {
    out << error_json(e) << '\n';
    return kIo;
  } catch (const fs::filesystem_error& e) {
    out << error_json(IoError(e.what())) << '\n';
    return kIo;
  }
  return worst;
}

}  // namespace mvdyn::cli
