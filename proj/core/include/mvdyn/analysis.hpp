#pragma once

#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "mvdyn/dynamics.hpp"

namespace mvdyn {

/// d = min{dilution, 1, mortality floor}.
double dissipation_rate(double dilution, double mortality_floor);

/// Lambda / min{dilution, 1, floor}: the eventual bound on S + mu[1].
/// Throws AssumptionError when the floor or the dilution is not positive.
double dissipativity_bound(double inflow, double dilution, double mortality_floor);
double dissipativity_bound(const VitalRates& rates);

struct Concentration {
  std::size_t winner = 0;
  /// Flat distance between mu / mu[1] and the Dirac mass at the winner.
  double distance = 0.0;
};

/// Heaviest atom (lowest index on ties) and the flat distance of the
/// normalized measure to its Dirac mass. Throws ConfigError for zero or
/// signed measures.
Concentration concentration(const DiscreteMeasure& mu);

/// Root of B(S, q_i) - D_mort(S, q_i) on [0, S_max] by bisection to 1e-10,
/// or nullopt when uptake never reaches mortality on the interval.
std::optional<double> breakeven(const VitalRates& rates, std::size_t atom, double substrate_max);

/// n-species chemostat S' = Lambda - D S - sum_j B_j(S) I_j,
/// I_j' = (B_j(S) - D_j(S)) I_j, integrated with the same fixed-step RK4
/// schedule as integrate(). Only the fixed-step method is supported.
Trajectory integrate_reduced_ode(const SystemState& initial, const VitalRates& rates,
                                 const StepControl& control);

/// Largest |difference| over all recorded times and components of two
/// trajectories on the same time grid.
double max_deviation(const Trajectory& a, const Trajectory& b);

struct OdeComparison {
  double max_deviation = 0.0;
  Trajectory measure_valued;
  Trajectory reduced;
};

/// Runs the measure-valued system and the reduced ODE side by side.
/// Throws ConfigError unless the kernel is pure selection.
OdeComparison compare_to_ode(const SystemState& initial, const Model& model,
                             const StepControl& control);

/// Max over interior points of |dM/dt - (Lambda - D S - mu[D_mort(S,.)])|
/// divided by max(1, Lambda + D S + mu[D_mort]), with dM/dt from a five-point
/// finite-difference stencil on the recorded times.
double mass_balance_residual(const Trajectory& trajectory, const Model& model);

/// |dS| + flat distance between Phi(s + t; x) and Phi(t; Phi(s; x)).
double semiflow_residual(const SystemState& initial, const Model& model,
                         const StepControl& control, double s, double t);

/// Empirical Lipschitz constant of x -> Phi(t; x) at `initial`: adds `delta`
/// mass to the heaviest atom (a flat perturbation of exactly delta) and returns
/// (|dS| + flat distance) at time t, divided by delta.
double lipschitz_dependence(const SystemState& initial, const Model& model,
                            const StepControl& control, double t, double delta = 1e-4);

struct DiagnosticsReport {
  double dissipativity_bound = 0.0;
  double initial_mass = 0.0;
  double max_mass = 0.0;
  double final_mass = 0.0;
  /// max of M(t) over the last 10% of the horizon
  double limsup_proxy = 0.0;
  double min_weight = 0.0;
  double min_substrate = 0.0;
  double mass_balance_residual = 0.0;
  std::optional<double> semiflow_residual;
  std::optional<std::size_t> winner;
  double concentration_distance = 0.0;
  /// (t, concentration distance) at evenly spaced recorded times.
  std::vector<std::pair<double, double>> concentration_series;
  std::vector<std::optional<double>> breakeven;
  std::size_t clamped_components = 0;
};

struct DiagnoseOptions {
  std::size_t concentration_samples = 20;
  /// Upper end of the break-even search; defaults to the truncation level.
  std::optional<double> breakeven_max;
};

DiagnosticsReport diagnose(const Trajectory& trajectory, const Model& model,
                           const DiagnoseOptions& options = {});

}  // namespace mvdyn
