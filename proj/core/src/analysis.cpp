#include "mvdyn/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mvdyn/error.hpp"
#include "mvdyn/rk4.hpp"

namespace mvdyn {

double dissipation_rate(double dilution, double mortality_floor) {
  return std::min({dilution, 1.0, mortality_floor});
}

double dissipativity_bound(double inflow, double dilution, double mortality_floor) {
  if (!(mortality_floor > 0.0)) {
    throw AssumptionError("dissipativity bound needs a positive mortality floor");
  }
  if (!(dilution > 0.0)) throw AssumptionError("dissipativity bound needs a positive dilution");
  return inflow / dissipation_rate(dilution, mortality_floor);
}

double dissipativity_bound(const VitalRates& rates) {
  return dissipativity_bound(rates.inflow(), rates.dilution(), rates.mortality_floor());
}

Concentration concentration(const DiscreteMeasure& mu) {
  if (!mu.is_nonnegative()) throw ConfigError("concentration: measure must be nonnegative");
  const double mass = mu.total_mass();
  if (!(mass > 0.0)) throw ConfigError("concentration: winner undefined for the zero measure");
  Concentration c;
  for (std::size_t i = 1; i < mu.size(); ++i) {
    if (mu[i] > mu[c.winner]) c.winner = i;
  }
  DiscreteMeasure normalized = (1.0 / mass) * mu;
  c.distance = flat_distance(normalized, DiscreteMeasure::dirac(mu.space(), c.winner));
  return c;
}

std::optional<double> breakeven(const VitalRates& rates, std::size_t atom, double substrate_max) {
  if (atom >= rates.size()) throw DimensionError("breakeven: atom out of range");
  if (!(substrate_max > 0.0)) throw ConfigError("breakeven: S_max must be positive");
  auto excess = [&](double s) { return rates.uptake(s, atom) - rates.mortality(s, atom); };
  double lo = 0.0;
  double hi = substrate_max;
  if (excess(lo) >= 0.0) return lo;
  if (excess(hi) < 0.0) return std::nullopt;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (excess(mid) < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

Trajectory integrate_reduced_ode(const SystemState& initial, const VitalRates& rates,
                                 const StepControl& control) {
  if (control.method != StepMethod::kFixed) {
    throw ConfigError("reduced ODE comparison needs fixed stepping");
  }
  const std::size_t n = rates.size();
  if (initial.population.size() != n) throw DimensionError("reduced ODE: size mismatch");

  auto rhs = [&rates, n](std::span<const double> y, std::span<double> dy) {
    const double s = y[0];
    double uptake_total = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double bj = rates.uptake(s, j);
      uptake_total += bj * y[1 + j];
      dy[1 + j] = bj * y[1 + j] - rates.mortality(s, j) * y[1 + j];
    }
    dy[0] = rates.inflow() - rates.dilution() * s - uptake_total;
  };

  Trajectory traj(initial.population.space());
  traj.metadata.integrator = "rk4-reduced";
  traj.metadata.dt = control.dt;
  traj.append(0.0, initial);
  if (control.t_end == 0.0) return traj;

  const double dt = control.dt;
  const double rounded = std::round(control.t_end / dt);
  std::size_t full_steps;
  double last_step = 0.0;
  if (std::abs(rounded * dt - control.t_end) <= 1e-9 * std::max(1.0, control.t_end)) {
    full_steps = static_cast<std::size_t>(rounded);
  } else {
    full_steps = static_cast<std::size_t>(std::floor(control.t_end / dt));
    last_step = control.t_end - static_cast<double>(full_steps) * dt;
  }
  const std::size_t total = full_steps + (last_step > 0.0 ? 1 : 0);

  auto y = pack(initial);
  std::vector<double> next(y.size());
  Rk4Stepper stepper(y.size());
  for (std::size_t k = 0; k < total; ++k) {
    const bool is_last = k + 1 == total;
    const double t = is_last ? control.t_end : static_cast<double>(k + 1) * dt;
    stepper.step(rhs, y, k < full_steps ? dt : last_step, next);
    y.swap(next);
    ++traj.metadata.accepted_steps;
    if (is_last || (k + 1) % control.output_stride == 0) {
      traj.append(t, y[0], std::span<const double>(y).subspan(1));
    }
  }
  return traj;
}

double max_deviation(const Trajectory& a, const Trajectory& b) {
  if (a.size() != b.size() || a.atoms() != b.atoms()) {
    throw DimensionError("max_deviation: trajectories have different shapes");
  }
  double dev = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (a.time(k) != b.time(k)) throw DimensionError("max_deviation: time grids differ");
    dev = std::max(dev, std::abs(a.substrate(k) - b.substrate(k)));
    const auto wa = a.weights(k);
    const auto wb = b.weights(k);
    for (std::size_t j = 0; j < wa.size(); ++j) dev = std::max(dev, std::abs(wa[j] - wb[j]));
  }
  return dev;
}

OdeComparison compare_to_ode(const SystemState& initial, const Model& model,
                             const StepControl& control) {
  if (!model.kernel().is_identity()) {
    throw ConfigError("compare_to_ode requires the pure-selection kernel");
  }
  auto measure_valued = integrate(initial, model, control);
  auto reduced = integrate_reduced_ode(initial, model.rates(), control);
  const double dev = max_deviation(measure_valued, reduced);
  return OdeComparison{dev, std::move(measure_valued), std::move(reduced)};
}

namespace {

// Fornberg's recursion for first-derivative weights at x0 over nodes x.
std::vector<double> derivative_weights(double x0, std::span<const double> x) {
  const std::size_t n = x.size();
  std::vector<std::vector<double>> c(n, std::vector<double>(2, 0.0));
  c[0][0] = 1.0;
  double c1 = 1.0;
  double c4 = x[0] - x0;
  for (std::size_t i = 1; i < n; ++i) {
    const std::size_t mn = std::min<std::size_t>(i, 1);
    double c2 = 1.0;
    const double c5 = c4;
    c4 = x[i] - x0;
    for (std::size_t j = 0; j < i; ++j) {
      const double c3 = x[i] - x[j];
      c2 *= c3;
      if (j == i - 1) {
        for (std::size_t k = mn; k >= 1; --k) {
          c[i][k] = c1 * (static_cast<double>(k) * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
        }
        c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
      }
      for (std::size_t k = mn; k >= 1; --k) {
        c[j][k] = (c4 * c[j][k] - static_cast<double>(k) * c[j][k - 1]) / c3;
      }
      c[j][0] = c4 * c[j][0] / c3;
    }
    c1 = c2;
  }
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = c[i][1];
  return w;
}

}  // namespace

double mass_balance_residual(const Trajectory& trajectory, const Model& model) {
  const std::size_t count = trajectory.size();
  if (count < 5) return 0.0;
  const auto& rates = model.rates();
  const auto& times = trajectory.times();
  double worst = 0.0;
  for (std::size_t k = 1; k + 1 < count; ++k) {
    const std::size_t first = std::min(k >= 2 ? k - 2 : 0, count - 5);
    const auto nodes = std::span<const double>(times).subspan(first, 5);
    const auto w = derivative_weights(times[k], nodes);
    double derivative = 0.0;
    for (std::size_t i = 0; i < 5; ++i) derivative += w[i] * trajectory.mass(first + i);

    const double s = trajectory.substrate(k);
    const auto weights = trajectory.weights(k);
    double deaths = 0.0;
    for (std::size_t j = 0; j < weights.size(); ++j) deaths += rates.mortality(s, j) * weights[j];
    const double expected = rates.inflow() - rates.dilution() * s - deaths;
    const double scale = std::abs(rates.inflow()) + rates.dilution() * std::abs(s) + std::abs(deaths);
    worst = std::max(worst, std::abs(derivative - expected) / std::max(1.0, scale));
  }
  return worst;
}

double semiflow_residual(const SystemState& initial, const Model& model,
                         const StepControl& control, double s, double t) {
  const auto direct = semiflow(s + t, initial, model, control);
  const auto composed = semiflow(t, semiflow(s, initial, model, control), model, control);
  return std::abs(direct.substrate - composed.substrate) +
         flat_distance(direct.population, composed.population);
}

double lipschitz_dependence(const SystemState& initial, const Model& model,
                            const StepControl& control, double t, double delta) {
  if (!(delta > 0.0)) throw ConfigError("lipschitz_dependence: delta must be positive");
  if (initial.population.size() == 0) throw ConfigError("lipschitz_dependence: empty space");
  const auto& w = initial.population.weights();
  const auto heaviest = static_cast<std::size_t>(std::max_element(w.begin(), w.end()) - w.begin());
  SystemState moved = initial;
  moved.population += DiscreteMeasure::dirac(initial.population.space(), heaviest, delta);
  const auto a = semiflow(t, initial, model, control);
  const auto b = semiflow(t, moved, model, control);
  return (std::abs(a.substrate - b.substrate) + flat_distance(a.population, b.population)) / delta;
}

DiagnosticsReport diagnose(const Trajectory& trajectory, const Model& model,
                           const DiagnoseOptions& options) {
  if (trajectory.empty()) throw ConfigError("diagnose: empty trajectory");
  DiagnosticsReport r;
  const auto& rates = model.rates();
  r.dissipativity_bound = dissipativity_bound(rates);
  r.initial_mass = trajectory.mass(0);
  r.max_mass = -std::numeric_limits<double>::infinity();
  r.min_weight = std::numeric_limits<double>::infinity();
  r.min_substrate = std::numeric_limits<double>::infinity();
  const double t0 = trajectory.time(0);
  const double t1 = trajectory.time(trajectory.size() - 1);
  const double tail_start = t1 - 0.1 * (t1 - t0);
  r.limsup_proxy = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < trajectory.size(); ++k) {
    const double m = trajectory.mass(k);
    r.max_mass = std::max(r.max_mass, m);
    if (trajectory.time(k) >= tail_start) r.limsup_proxy = std::max(r.limsup_proxy, m);
    r.min_substrate = std::min(r.min_substrate, trajectory.substrate(k));
    for (double w : trajectory.weights(k)) r.min_weight = std::min(r.min_weight, w);
  }
  r.final_mass = trajectory.mass(trajectory.size() - 1);
  r.mass_balance_residual = mass_balance_residual(trajectory, model);
  r.clamped_components = trajectory.metadata.clamped_components;

  const std::size_t samples = std::max<std::size_t>(options.concentration_samples, 1);
  const std::size_t count = trajectory.size();
  std::size_t last_index = count;  // sentinel
  for (std::size_t q = 0; q < samples; ++q) {
    const std::size_t k = samples == 1 ? count - 1 : q * (count - 1) / (samples - 1);
    if (k == last_index) continue;
    last_index = k;
    const auto state = trajectory.state(k);
    if (state.population.total_mass() > 0.0 && state.population.is_nonnegative()) {
      r.concentration_series.emplace_back(trajectory.time(k),
                                          concentration(state.population).distance);
    }
  }
  const auto final_state = trajectory.back();
  if (final_state.population.total_mass() > 0.0 && final_state.population.is_nonnegative()) {
    const auto c = concentration(final_state.population);
    r.winner = c.winner;
    r.concentration_distance = c.distance;
  }
  const double smax = options.breakeven_max.value_or(
      rates.truncation_level().value_or(std::max(1.0, 2.0 * rates.inflow() / rates.dilution())));
  for (std::size_t i = 0; i < rates.size(); ++i) r.breakeven.push_back(breakeven(rates, i, smax));
  return r;
}

}  // namespace mvdyn
