#include "mvdyn/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mvdyn/error.hpp"
#include "mvdyn/rk4.hpp"

namespace mvdyn {

namespace {

constexpr double kPositivityTolerance = 1e-9;

std::string dump(double t, std::span<const double> y) {
  std::ostringstream os;
  os.precision(17);
  os << "t=" << t << " S=" << y[0] << " weights=[";
  for (std::size_t i = 1; i < y.size(); ++i) os << (i > 1 ? "," : "") << y[i];
  os << "]";
  return os.str();
}

void require_finite(double t, std::span<const double> y) {
  for (double v : y) {
    if (!std::isfinite(v)) throw NumericalError("non-finite state: " + dump(t, y));
  }
}

// Enforces the cone after an accepted step.
void enforce_cone(double t, std::span<double> y, std::size_t& clamped) {
  for (double& v : y) {
    if (v >= 0.0) continue;
    if (v > -kPositivityTolerance) {
      v = 0.0;
      ++clamped;
    } else {
      throw PositivityError("state left the nonnegative cone: " + dump(t, y));
    }
  }
}

}  // namespace

Model::Model(VitalRates rates, MutationKernel kernel)
    : rates_(std::move(rates)), kernel_(std::move(kernel)) {
  if (rates_.size() != kernel_.size()) {
    throw DimensionError("rates cover " + std::to_string(rates_.size()) +
                         " atoms, kernel " + std::to_string(kernel_.size()));
  }
}

void Model::field(std::span<const double> y, std::span<double> dy) const {
  const std::size_t n = kernel_.size();
  const double s = y[0];
  double consumption = 0.0;
  for (std::size_t j = 0; j < n; ++j) dy[1 + j] = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double births = rates_.uptake(s, i) * y[1 + i];
    consumption += births;
    if (births == 0.0) continue;
    const auto row = kernel_.row(i);
    for (std::size_t j = 0; j < n; ++j) dy[1 + j] += row[j] * births;
  }
  for (std::size_t j = 0; j < n; ++j) dy[1 + j] -= rates_.mortality(s, j) * y[1 + j];
  dy[0] = rates_.inflow() - rates_.dilution() * s - consumption;
}

double default_truncation_level(const VitalRates& rates, const SystemState& initial) {
  const double level = 2.0 * std::max({initial.substrate, rates.inflow() / rates.dilution(),
                                       initial.population.total_mass()});
  return level > 0.0 ? level : 1.0;
}

PreparedModel prepare_model(const VitalRates& rates, const MutationKernel& kernel,
                            const SystemState& initial, const ModelOptions& options) {
  if (!same_space(kernel.space(), initial.population.space())) {
    throw DimensionError("kernel and initial population live on different spaces");
  }
  if (!(rates.dilution() > 0.0)) throw AssumptionError("dilution must be > 0");
  const double level = options.truncation ? *options.truncation
                                          : default_truncation_level(rates, initial);
  auto report = validate_assumptions(rates, *kernel.space(), level, options.validation_samples);
  if (!report.ok && !options.allow_unvalidated) {
    std::string msg = "vital rates violate the admissibility assumptions:";
    for (const auto& v : report.violations) msg += " [" + v + "]";
    throw AssumptionError(msg);
  }
  return PreparedModel{Model(rates.truncated(level), kernel), level, std::move(report)};
}

FieldValue vector_field(const SystemState& state, const Model& model) {
  if (!same_space(state.population.space(), model.space())) {
    throw DimensionError("state and model live on different spaces");
  }
  const auto y = pack(state);
  std::vector<double> dy(y.size());
  model.field(y, dy);
  return FieldValue{dy[0], DiscreteMeasure(model.space(), std::vector<double>(dy.begin() + 1, dy.end()))};
}

FieldValue vector_field(const SystemState& state, const VitalRates& rates,
                        const MutationKernel& kernel) {
  return vector_field(state, Model(rates, kernel));
}

SystemState step_rk4(const SystemState& state, double dt, const Model& model) {
  if (!(dt > 0.0)) throw ConfigError("step_rk4: dt must be positive");
  if (!same_space(state.population.space(), model.space())) {
    throw DimensionError("state and model live on different spaces");
  }
  const auto y = pack(state);
  std::vector<double> out(y.size());
  Rk4Stepper stepper(y.size());
  stepper.step([&model](std::span<const double> a, std::span<double> b) { model.field(a, b); },
               y, dt, out);
  require_finite(dt, out);
  return unpack(out, model.space());
}

std::vector<double> pack(const SystemState& state) {
  std::vector<double> y;
  y.reserve(1 + state.population.size());
  y.push_back(state.substrate);
  const auto w = state.population.weights();
  y.insert(y.end(), w.begin(), w.end());
  return y;
}

SystemState unpack(std::span<const double> y, const SpacePtr& space) {
  return SystemState{y[0], DiscreteMeasure(space, std::vector<double>(y.begin() + 1, y.end()))};
}

Trajectory::Trajectory(SpacePtr space)
    : space_(std::move(space)), atoms_(space_ ? space_->size() : 0) {
  if (!space_) throw ConfigError("trajectory requires a strategy space");
}

void Trajectory::append(double t, double substrate, std::span<const double> weights) {
  if (weights.size() != atoms_) throw DimensionError("trajectory: wrong weight count");
  if (!times_.empty() && !(t > times_.back())) {
    throw NumericalError("trajectory times must be strictly increasing");
  }
  times_.push_back(t);
  substrate_.push_back(substrate);
  weights_.insert(weights_.end(), weights.begin(), weights.end());
}

void Trajectory::append(double t, const SystemState& state) {
  append(t, state.substrate, state.population.weights());
}

double Trajectory::mass(std::size_t k) const {
  double m = substrate_[k];
  for (double w : weights(k)) m += w;
  return m;
}

SystemState Trajectory::state(std::size_t k) const {
  const auto w = weights(k);
  return SystemState{substrate_[k], DiscreteMeasure(space_, std::vector<double>(w.begin(), w.end()))};
}

namespace {

Trajectory integrate_fixed(std::vector<double> y, const Model& model, const StepControl& c,
                           Trajectory traj) {
  const double dt = c.dt;
  const double rounded = std::round(c.t_end / dt);
  std::size_t full_steps;
  double last_step = 0.0;
  if (std::abs(rounded * dt - c.t_end) <= 1e-9 * std::max(1.0, c.t_end)) {
    full_steps = static_cast<std::size_t>(rounded);
  } else {
    full_steps = static_cast<std::size_t>(std::floor(c.t_end / dt));
    last_step = c.t_end - static_cast<double>(full_steps) * dt;
  }
  const std::size_t total = full_steps + (last_step > 0.0 ? 1 : 0);

  auto rhs = [&model](std::span<const double> a, std::span<double> b) { model.field(a, b); };
  Rk4Stepper stepper(y.size());
  std::vector<double> next(y.size());
  for (std::size_t k = 0; k < total; ++k) {
    const bool is_last = k + 1 == total;
    const double h = k < full_steps ? dt : last_step;
    const double t = is_last ? c.t_end : static_cast<double>(k + 1) * dt;
    stepper.step(rhs, y, h, next);
    require_finite(t, next);
    enforce_cone(t, next, traj.metadata.clamped_components);
    y.swap(next);
    ++traj.metadata.accepted_steps;
    if (is_last || (k + 1) % c.output_stride == 0) {
      traj.append(t, y[0], std::span<const double>(y).subspan(1));
    }
  }
  return traj;
}

double local_error(std::span<const double> coarse, std::span<const double> fine) {
  double err = 0.0;
  for (std::size_t i = 0; i < coarse.size(); ++i) {
    err = std::max(err, std::abs(fine[i] - coarse[i]) / (15.0 * (1.0 + std::abs(fine[i]))));
  }
  return err;
}

Trajectory integrate_adaptive(std::vector<double> y, const Model& model, const StepControl& c,
                              Trajectory traj) {
  if (!(c.tolerance > 0.0)) throw ConfigError("adaptive stepping needs a positive tolerance");
  auto rhs = [&model](std::span<const double> a, std::span<double> b) { model.field(a, b); };
  Rk4Stepper stepper(y.size());
  const std::size_t n = y.size();
  std::vector<double> coarse(n), half(n), fine(n);
  double t = 0.0;
  double h = std::min(c.dt, c.t_end);
  std::size_t since_output = 0;
  while (t < c.t_end) {
    const bool reaches_end = t + h >= c.t_end * (1.0 - 1e-15);
    if (reaches_end) h = c.t_end - t;
    if (h < c.min_step) {
      std::ostringstream os;
      os << "step size " << h << " underflowed below " << c.min_step << " (stiff system?) at ";
      throw NumericalError(os.str() + dump(t, y));
    }
    stepper.step(rhs, y, h, coarse);
    stepper.step(rhs, y, 0.5 * h, half);
    stepper.step(rhs, half, 0.5 * h, fine);
    const double err = local_error(coarse, fine);
    if (!std::isfinite(err) || err > c.tolerance) {
      ++traj.metadata.rejected_steps;
      const double factor = std::isfinite(err) ? 0.9 * std::pow(c.tolerance / err, 0.2) : 0.1;
      h *= std::clamp(factor, 0.1, 0.9);
      continue;
    }
    const double t_next = reaches_end ? c.t_end : t + h;
    require_finite(t_next, fine);
    enforce_cone(t_next, fine, traj.metadata.clamped_components);
    y.swap(fine);
    t = t_next;
    ++traj.metadata.accepted_steps;
    if (++since_output == c.output_stride || reaches_end) {
      since_output = 0;
      traj.append(t, y[0], std::span<const double>(y).subspan(1));
    }
    if (reaches_end) break;
    const double factor = err > 0.0 ? 0.9 * std::pow(c.tolerance / err, 0.2) : 5.0;
    h *= std::clamp(factor, 0.2, 5.0);
  }
  return traj;
}

}  // namespace

Trajectory integrate(const SystemState& initial, const Model& model, const StepControl& control) {
  if (!same_space(initial.population.space(), model.space())) {
    throw DimensionError("initial state and model live on different spaces");
  }
  if (!(control.t_end >= 0.0) || !std::isfinite(control.t_end)) {
    throw ConfigError("t_end must be finite and >= 0");
  }
  if (!(control.dt > 0.0)) throw ConfigError("dt must be positive");
  if (control.output_stride == 0) throw ConfigError("output_stride must be >= 1");

  Trajectory traj(model.space());
  traj.metadata.integrator = control.method == StepMethod::kFixed ? "rk4" : "rk4-adaptive";
  traj.metadata.dt = control.dt;
  traj.metadata.tolerance = control.method == StepMethod::kFixed ? 0.0 : control.tolerance;

  auto y = pack(initial);
  require_finite(0.0, y);
  if (*std::min_element(y.begin(), y.end()) < 0.0) {
    throw ConfigError("initial state must lie in the nonnegative cone: " + dump(0.0, y));
  }
  traj.append(0.0, initial);
  if (control.t_end == 0.0) return traj;
  return control.method == StepMethod::kFixed
             ? integrate_fixed(std::move(y), model, control, std::move(traj))
             : integrate_adaptive(std::move(y), model, control, std::move(traj));
}

SystemState semiflow(double t, const SystemState& initial, const Model& model,
                     StepControl control) {
  if (!(t >= 0.0)) throw ConfigError("semiflow time must be >= 0");
  if (t == 0.0) return initial;
  control.t_end = t;
  control.output_stride = std::numeric_limits<std::size_t>::max();
  return integrate(initial, model, control).back();
}

}  // namespace mvdyn
