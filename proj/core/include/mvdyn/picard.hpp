#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "mvdyn/dynamics.hpp"

namespace mvdyn {

struct PicardOptions {
  double horizon = 1.0;
  /// Quadrature nodes per window, endpoints included.
  std::size_t nodes = 512;
  /// Longest window; longer horizons are split into equal chained windows.
  double window = 1.0;
  /// Weight of the exponentially weighted sup norm. Defaults to twice
  /// field_lipschitz_estimate.
  std::optional<double> lambda;
  double tolerance = 1e-10;
  std::size_t max_iterations = 200;
};

struct PicardWindowReport {
  double start = 0.0;
  double length = 0.0;
  std::size_t iterations = 0;
  /// Weighted distances between successive iterates.
  std::vector<double> distances;
  /// Largest ratio of successive distances above the noise floor; 0 when
  /// the iteration converged before two distances were available.
  double contraction_ratio = 0.0;
};

struct PicardResult {
  Trajectory trajectory;
  double lambda = 0.0;
  double lipschitz_estimate = 0.0;
  std::vector<PicardWindowReport> windows;

  std::size_t total_iterations() const noexcept;
  double contraction_ratio() const noexcept;
};

/// Heuristic Lipschitz constant of the truncated field on states whose mass
/// is at most `mass_bound`, built from sampled sup and slope bounds of the
/// rates over [0, N].
double field_lipschitz_estimate(const Model& model, double mass_bound);

/// Fixed-point iteration of the variation-of-constants operator
///
///   (T z)_S(t)  = e^{-D t} S0 + int_0^t e^{-D (t-s)} [Lambda - B(z_S,.) . z_mu [1]] ds
///   (T z)_mu(t) = E(0,t) . mu0 + int_0^t E(s,t) . K . (B(z_S,.) . z_mu)(s) ds
///   E(s,t)      = exp(-int_s^t D_mort(z_S(r), .) dr)
///
/// on a uniform node grid, starting from the constant trajectory. The
/// mortality exponent is accumulated with the trapezoid rule; convolution
/// integrals use product trapezoid weights (the integrand's non-exponential
/// factor is interpolated linearly, the exponential integrated exactly).
/// Iteration stops once sup_t e^{-lambda t} (|dS| + ||dmu||_TV) < tolerance
/// and the same distance without the weight is below tolerance too, so the
/// window end is resolved as well as its start; the total variation bounds
/// the flat norm from above. Contraction ratios use the weighted distance.
///
/// Requires a model prepared with truncation and an initial state in the
/// cone. Throws ConvergenceError after max_iterations.
PicardResult picard_solve(const SystemState& initial, const Model& model,
                          const PicardOptions& options = {});

}  // namespace mvdyn
