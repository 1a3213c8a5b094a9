#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mvdyn/kernel.hpp"
#include "mvdyn/measure.hpp"
#include "mvdyn/rates.hpp"

namespace mvdyn {

/// Substrate concentration and population measure.
struct SystemState {
  double substrate = 0.0;
  DiscreteMeasure population;

  /// S + mu[1]
  double mass() const noexcept { return substrate + population.total_mass(); }
};

/// Time derivative of a SystemState.
struct FieldValue {
  double substrate = 0.0;
  DiscreteMeasure population;
};

/// Rates and kernel over one strategy space. Construction only checks
/// dimensions; see prepare_model for admissibility and truncation.
class Model {
 public:
  Model(VitalRates rates, MutationKernel kernel);

  const VitalRates& rates() const noexcept { return rates_; }
  const MutationKernel& kernel() const noexcept { return kernel_; }
  const SpacePtr& space() const noexcept { return kernel_.space(); }
  std::size_t size() const noexcept { return kernel_.size(); }

  /// Packed form y = (S, mu_0, ..., mu_{n-1}) used by the integrators.
  void field(std::span<const double> y, std::span<double> dy) const;

 private:
  VitalRates rates_;
  MutationKernel kernel_;
};

struct ModelOptions {
  /// Truncation level N; defaults to default_truncation_level(...).
  std::optional<double> truncation;
  /// Skip the assumption check (the report is still produced).
  bool allow_unvalidated = false;
  std::size_t validation_samples = 256;
};

struct PreparedModel {
  Model model;
  double truncation_level = 0.0;
  AssumptionReport assumptions;
};

/// 2 max(S0, inflow / dilution, mu0[1]), or 1 if all of those vanish.
double default_truncation_level(const VitalRates& rates, const SystemState& initial);

/// Validates the rates on [0, N] (throwing AssumptionError on violation
/// unless allowed) and truncates them at N.
PreparedModel prepare_model(const VitalRates& rates, const MutationKernel& kernel,
                            const SystemState& initial, const ModelOptions& options = {});

/// dS = Lambda - D S - B(S,.) . mu[1]
/// dmu = K . (B(S,.) . mu) - D_mort(S,.) . mu
FieldValue vector_field(const SystemState& state, const Model& model);
FieldValue vector_field(const SystemState& state, const VitalRates& rates,
                        const MutationKernel& kernel);

/// One classical RK4 step. Throws NumericalError on non-finite output.
SystemState step_rk4(const SystemState& state, double dt, const Model& model);

enum class StepMethod { kFixed, kAdaptive };

struct StepControl {
  StepMethod method = StepMethod::kFixed;
  double dt = 1e-3;  // fixed step, or initial step when adaptive
  double tolerance = 1e-8;  // adaptive: mixed abs/rel local error per step
  double t_end = 1.0;
  std::size_t output_stride = 1;  // record every k-th accepted step
  double min_step = 1e-12;
};

struct TrajectoryMetadata {
  std::string integrator;
  double dt = 0.0;
  double tolerance = 0.0;
  std::string scenario_hash;
  std::size_t accepted_steps = 0;
  std::size_t rejected_steps = 0;
  /// Components in (-1e-9, 0) reset to 0 after a step.
  std::size_t clamped_components = 0;
};

/// Time series of states, stored packed.
class Trajectory {
 public:
  explicit Trajectory(SpacePtr space);

  /// Throws if t does not exceed the previous time.
  void append(double t, double substrate, std::span<const double> weights);
  void append(double t, const SystemState& state);

  std::size_t size() const noexcept { return times_.size(); }
  bool empty() const noexcept { return times_.empty(); }
  std::size_t atoms() const noexcept { return atoms_; }
  const SpacePtr& space() const noexcept { return space_; }

  double time(std::size_t k) const { return times_[k]; }
  double substrate(std::size_t k) const { return substrate_[k]; }
  std::span<const double> weights(std::size_t k) const {
    return std::span<const double>(weights_).subspan(k * atoms_, atoms_);
  }
  double mass(std::size_t k) const;
  SystemState state(std::size_t k) const;
  SystemState back() const { return state(size() - 1); }
  const std::vector<double>& times() const noexcept { return times_; }

  TrajectoryMetadata metadata;

 private:
  SpacePtr space_;
  std::size_t atoms_;
  std::vector<double> times_;
  std::vector<double> substrate_;
  std::vector<double> weights_;
};

/// Integrates on [0, t_end] and records the initial state plus every
/// `output_stride`-th accepted step (the final state is always recorded).
///
/// Fixed stepping uses exactly dt on full steps with t_k = k dt, and a
/// shorter last step if dt does not divide t_end. After each step,
/// components in (-1e-9, 0) are clamped to 0; anything lower raises
/// PositivityError. Adaptive stepping uses step doubling and raises
/// NumericalError when the step drops below control.min_step.
Trajectory integrate(const SystemState& initial, const Model& model, const StepControl& control);

/// Phi(t; x): the endpoint of integrate over [0, t]. Phi(0; x) = x.
SystemState semiflow(double t, const SystemState& initial, const Model& model,
                     StepControl control);

/// Pack/unpack helpers for the (S, mu) <-> R^(1+n) identification.
std::vector<double> pack(const SystemState& state);
SystemState unpack(std::span<const double> y, const SpacePtr& space);

}  // namespace mvdyn
