#pragma once

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "mvdyn/strategy_space.hpp"

namespace mvdyn {

class MutationKernel;

/// A function on the atoms of a strategy space. On a finite space every
/// such function is bounded and Lipschitz.
struct AtomFunction {
  std::vector<double> values;

  static AtomFunction constant(std::size_t n, double value) {
    return AtomFunction{std::vector<double>(n, value)};
  }
  std::size_t size() const noexcept { return values.size(); }
  double operator[](std::size_t i) const { return values[i]; }
};

/// Signed weights over the atoms of a strategy space. Signed measures are
/// needed for differences; the dynamics keep to the nonnegative cone.
class DiscreteMeasure {
 public:
  DiscreteMeasure(SpacePtr space, std::vector<double> weights);
  static DiscreteMeasure zero(SpacePtr space);
  static DiscreteMeasure dirac(SpacePtr space, std::size_t atom, double mass = 1.0);

  const SpacePtr& space() const noexcept { return space_; }
  std::size_t size() const noexcept { return weights_.size(); }
  std::span<const double> weights() const noexcept { return weights_; }
  std::vector<double>& mutable_weights() noexcept { return weights_; }
  double operator[](std::size_t i) const { return weights_[i]; }

  /// mu[1]
  double total_mass() const noexcept;
  /// Sum of absolute weights; an upper bound for the dual BL norm.
  double total_variation() const noexcept;
  double min_weight() const noexcept;
  bool is_nonnegative() const noexcept { return min_weight() >= 0.0; }

  DiscreteMeasure& operator+=(const DiscreteMeasure& other);
  DiscreteMeasure& operator-=(const DiscreteMeasure& other);
  DiscreteMeasure& operator*=(double factor) noexcept;

  friend DiscreteMeasure operator+(DiscreteMeasure a, const DiscreteMeasure& b) { return a += b; }
  friend DiscreteMeasure operator-(DiscreteMeasure a, const DiscreteMeasure& b) { return a -= b; }
  friend DiscreteMeasure operator*(double k, DiscreteMeasure a) { return a *= k; }

 private:
  SpacePtr space_;
  std::vector<double> weights_;
};

/// Throws DimensionError unless both measures live on the same space.
void require_same_space(const DiscreteMeasure& a, const DiscreteMeasure& b);

/// Duality pairing mu[g] = sum_i g(i) mu(i).
double pair(const DiscreteMeasure& mu, const AtomFunction& g);

/// ||g||_inf + Lipschitz seminorm of g on the atoms.
double bl_norm(const AtomFunction& g, const StrategySpace& space);

/// Maximizer of mu[f] over ||f||_BL <= 1, as returned by the LP.
struct DualNormCertificate {
  double value = 0.0;
  std::vector<double> f;  // witness on every atom, zero off the support
  double sup_bound = 0.0;
  double lipschitz_bound = 0.0;
  std::size_t pivots = 0;
};

/// Dual bounded-Lipschitz norm of a signed measure.
///
/// Solves max sum_i f_i mu_i over (f, s, L) with |f_i| <= s,
/// f_i - f_j <= L d(i,j), s + L <= 1, s, L >= 0, restricted to the support
/// of mu. Any feasible f on the support extends to the whole space with the
/// same sup and Lipschitz bounds (clipped McShane extension), so the
/// restriction is exact. Off-support witness values are reported as zero.
DualNormCertificate solve_bl_dual_norm(const DiscreteMeasure& mu);
double bl_dual_norm(const DiscreteMeasure& mu);

/// Flat metric ||mu - nu||*_BL.
double flat_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu);

/// (f . mu)[g] = mu[f g]: pointwise reweighting.
DiscreteMeasure bullet(const AtomFunction& f, const DiscreteMeasure& mu);

/// (K . mu)[g] = mu[i -> K(i)[g]], i.e. nu_j = sum_i K(i,j) mu_i.
DiscreteMeasure bullet(const MutationKernel& kernel, const DiscreteMeasure& mu);

}  // namespace mvdyn
