#include "mvdyn/picard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mvdyn/error.hpp"

namespace mvdyn {

namespace {

// Product trapezoid weights on one interval with exponent increment z:
//   int_0^h e^{-(z/h)(h-u)} [F0 (1 - u/h) + F1 u/h] du = h (F0 wa(z) + F1 wb(z)).
struct ProductWeights {
  double decay;  // e^{-z}
  double wa;
  double wb;
};

ProductWeights product_weights(double z) {
  ProductWeights w;
  w.decay = std::exp(-z);
  if (std::abs(z) < 0.5) {
    // wa = sum (k+1) (-z)^k / (k+2)!, wb = sum (-z)^k / (k+2)!.
    double term = 0.5;  // (-z)^k / (k+2)!
    w.wa = 0.0;
    w.wb = 0.0;
    for (int k = 0; k < 30; ++k) {
      w.wa += (k + 1) * term;
      w.wb += term;
      term *= -z / (k + 3);
    }
  } else {
    w.wa = (1.0 - w.decay - z * w.decay) / (z * z);
    w.wb = (z - 1.0 + w.decay) / (z * z);
  }
  return w;
}

// Iterates of one window, node-major: s[m], w[m * n + j].
struct Path {
  std::vector<double> s;
  std::vector<double> w;
};

class WindowOperator {
 public:
  WindowOperator(const Model& model, std::size_t nodes, double step)
      : model_(model), n_(model.size()), nodes_(nodes), h_(step),
        births_(nodes * n_), deaths_(nodes * n_), inflow_(nodes) {}

  // out = T(in) for initial data (s0, u).
  void apply(const Path& in, double s0, std::span<const double> u, Path& out) {
    const auto& rates = model_.rates();
    const auto& kernel = model_.kernel();
    for (std::size_t m = 0; m < nodes_; ++m) {
      const double s = in.s[m];
      double consumption = 0.0;
      double* births = births_.data() + m * n_;
      std::fill(births, births + n_, 0.0);
      for (std::size_t i = 0; i < n_; ++i) {
        const double b = rates.uptake(s, i) * in.w[m * n_ + i];
        consumption += b;
        if (b == 0.0) continue;
        const auto row = kernel.row(i);
        for (std::size_t j = 0; j < n_; ++j) births[j] += row[j] * b;
      }
      inflow_[m] = rates.inflow() - consumption;
      for (std::size_t j = 0; j < n_; ++j) deaths_[m * n_ + j] = rates.mortality(s, j);
    }

    // Substrate: linear decay at the dilution rate.
    const double dil = rates.dilution();
    const auto ws = product_weights(dil * h_);
    double conv = 0.0;
    out.s[0] = s0;
    for (std::size_t m = 0; m + 1 < nodes_; ++m) {
      conv = ws.decay * conv + h_ * (inflow_[m] * ws.wa + inflow_[m + 1] * ws.wb);
      out.s[m + 1] = std::exp(-dil * h_ * static_cast<double>(m + 1)) * s0 + conv;
    }

    // Population: per-atom decay with the accumulated mortality exponent.
    for (std::size_t j = 0; j < n_; ++j) {
      double exponent = 0.0;
      double acc = 0.0;
      out.w[j] = u[j];
      for (std::size_t m = 0; m + 1 < nodes_; ++m) {
        const double z = 0.5 * h_ * (deaths_[m * n_ + j] + deaths_[(m + 1) * n_ + j]);
        exponent += z;
        const auto wm = product_weights(z);
        acc = wm.decay * acc +
              h_ * (births_[m * n_ + j] * wm.wa + births_[(m + 1) * n_ + j] * wm.wb);
        out.w[(m + 1) * n_ + j] = std::exp(-exponent) * u[j] + acc;
      }
    }
  }

  double weighted_distance(const Path& a, const Path& b, double lambda) const {
    double d = 0.0;
    for (std::size_t m = 0; m < nodes_; ++m) {
      double diff = std::abs(a.s[m] - b.s[m]);
      for (std::size_t j = 0; j < n_; ++j) diff += std::abs(a.w[m * n_ + j] - b.w[m * n_ + j]);
      d = std::max(d, std::exp(-lambda * h_ * static_cast<double>(m)) * diff);
    }
    return d;
  }

 private:
  const Model& model_;
  std::size_t n_;
  std::size_t nodes_;
  double h_;
  std::vector<double> births_;
  std::vector<double> deaths_;
  std::vector<double> inflow_;
};

}  // namespace

std::size_t PicardResult::total_iterations() const noexcept {
  std::size_t total = 0;
  for (const auto& w : windows) total += w.iterations;
  return total;
}

double PicardResult::contraction_ratio() const noexcept {
  double r = 0.0;
  for (const auto& w : windows) r = std::max(r, w.contraction_ratio);
  return r;
}

double field_lipschitz_estimate(const Model& model, double mass_bound) {
  const auto& rates = model.rates();
  const double level = rates.truncation_level().value_or(std::max(mass_bound, 1.0));
  const auto report = validate_assumptions(rates, *model.space(), level);
  return rates.dilution() + 2.0 * report.uptake_sup + report.mortality_sup +
         (report.uptake_lipschitz + report.mortality_lipschitz) * mass_bound;
}

PicardResult picard_solve(const SystemState& initial, const Model& model,
                          const PicardOptions& options) {
  if (!same_space(initial.population.space(), model.space())) {
    throw DimensionError("initial state and model live on different spaces");
  }
  if (!(options.horizon > 0.0) || !std::isfinite(options.horizon)) {
    throw ConfigError("picard horizon must be positive");
  }
  if (options.nodes < 2) throw ConfigError("picard needs at least two nodes per window");
  if (!(options.window > 0.0)) throw ConfigError("picard window must be positive");
  if (initial.substrate < 0.0 || !initial.population.is_nonnegative()) {
    throw ConfigError("picard_solve requires an initial state in the nonnegative cone");
  }

  const std::size_t n = model.size();
  const double inflow = model.rates().inflow();
  const double floor = std::min({model.rates().dilution(), 1.0, model.rates().mortality_floor()});
  const double mass_bound =
      std::max(initial.mass(), floor > 0.0 ? inflow / floor : initial.mass()) + 1.0;

  PicardResult result{Trajectory(model.space()), 0.0, 0.0, {}};
  result.lipschitz_estimate = field_lipschitz_estimate(model, mass_bound);
  result.lambda = options.lambda.value_or(2.0 * result.lipschitz_estimate);
  if (!(result.lambda > 0.0)) throw ConfigError("picard lambda must be positive");
  result.trajectory.metadata.integrator = "picard";
  result.trajectory.metadata.tolerance = options.tolerance;

  const auto window_count = static_cast<std::size_t>(
      std::max(1.0, std::ceil(options.horizon / options.window - 1e-12)));
  const double length = options.horizon / static_cast<double>(window_count);
  const double h = length / static_cast<double>(options.nodes - 1);
  result.trajectory.metadata.dt = h;

  double s0 = initial.substrate;
  std::vector<double> u(initial.population.weights().begin(), initial.population.weights().end());
  result.trajectory.append(0.0, s0, u);

  WindowOperator op(model, options.nodes, h);
  Path current{std::vector<double>(options.nodes), std::vector<double>(options.nodes * n)};
  Path next = current;

  for (std::size_t win = 0; win < window_count; ++win) {
    const double start = length * static_cast<double>(win);
    PicardWindowReport report;
    report.start = start;
    report.length = length;

    for (std::size_t m = 0; m < options.nodes; ++m) {
      current.s[m] = s0;
      std::copy(u.begin(), u.end(), current.w.begin() + static_cast<std::ptrdiff_t>(m * n));
    }
    double scale = std::abs(s0);
    for (double x : u) scale += std::abs(x);
    const double noise = 1e-13 * std::max(1.0, scale);

    bool converged = false;
    while (report.iterations < options.max_iterations) {
      op.apply(current, s0, u, next);
      ++report.iterations;
      const double d = op.weighted_distance(current, next, result.lambda);
      const double plain = op.weighted_distance(current, next, 0.0);
      if (!std::isfinite(d)) throw NumericalError("picard iterate became non-finite");
      if (!report.distances.empty() && report.distances.back() > noise) {
        report.contraction_ratio = std::max(report.contraction_ratio, d / report.distances.back());
      }
      report.distances.push_back(d);
      std::swap(current, next);
      if (d < options.tolerance && plain < options.tolerance) {
        converged = true;
        break;
      }
    }
    if (!converged) {
      std::ostringstream os;
      os << "picard iteration did not converge in window " << win << " after "
         << report.iterations << " iterations; last distance "
         << (report.distances.empty() ? 0.0 : report.distances.back())
         << ", contraction ratio estimate " << report.contraction_ratio
         << ", lambda " << result.lambda;
      throw ConvergenceError(os.str());
    }

    for (std::size_t m = 1; m < options.nodes; ++m) {
      const double t = m + 1 == options.nodes ? start + length
                                              : start + h * static_cast<double>(m);
      result.trajectory.append(
          t, current.s[m],
          std::span<const double>(current.w).subspan(m * n, n));
    }
    s0 = current.s.back();
    std::copy(current.w.end() - static_cast<std::ptrdiff_t>(n), current.w.end(), u.begin());
    result.windows.push_back(std::move(report));
  }
  if (window_count > 0) {
    result.trajectory.metadata.accepted_steps = window_count * (options.nodes - 1);
  }
  return result;
}

}  // namespace mvdyn
