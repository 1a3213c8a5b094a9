#include "mvdyn/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "mvdyn/error.hpp"
#include "mvdyn/kernel.hpp"
#include "mvdyn/simplex.hpp"

namespace mvdyn {

namespace {

constexpr double kBetweenSlack = 1e-12;

}  // namespace

DiscreteMeasure::DiscreteMeasure(SpacePtr space, std::vector<double> weights)
    : space_(std::move(space)), weights_(std::move(weights)) {
  if (!space_) throw ConfigError("measure requires a strategy space");
  if (weights_.size() != space_->size()) {
    throw DimensionError("measure has " + std::to_string(weights_.size()) +
                         " weights for a space of " + std::to_string(space_->size()) +
                         " atoms");
  }
}

DiscreteMeasure DiscreteMeasure::zero(SpacePtr space) {
  const std::size_t n = space ? space->size() : 0;
  return DiscreteMeasure(std::move(space), std::vector<double>(n, 0.0));
}

DiscreteMeasure DiscreteMeasure::dirac(SpacePtr space, std::size_t atom, double mass) {
  auto mu = zero(std::move(space));
  if (atom >= mu.size()) throw DimensionError("dirac atom index out of range");
  mu.weights_[atom] = mass;
  return mu;
}

double DiscreteMeasure::total_mass() const noexcept {
  double sum = 0.0;
  for (double w : weights_) sum += w;
  return sum;
}

double DiscreteMeasure::total_variation() const noexcept {
  double sum = 0.0;
  for (double w : weights_) sum += std::abs(w);
  return sum;
}

double DiscreteMeasure::min_weight() const noexcept {
  return weights_.empty() ? 0.0 : *std::min_element(weights_.begin(), weights_.end());
}

DiscreteMeasure& DiscreteMeasure::operator+=(const DiscreteMeasure& other) {
  require_same_space(*this, other);
  for (std::size_t i = 0; i < weights_.size(); ++i) weights_[i] += other.weights_[i];
  return *this;
}

DiscreteMeasure& DiscreteMeasure::operator-=(const DiscreteMeasure& other) {
  require_same_space(*this, other);
  for (std::size_t i = 0; i < weights_.size(); ++i) weights_[i] -= other.weights_[i];
  return *this;
}

DiscreteMeasure& DiscreteMeasure::operator*=(double factor) noexcept {
  for (double& w : weights_) w *= factor;
  return *this;
}

void require_same_space(const DiscreteMeasure& a, const DiscreteMeasure& b) {
  if (!same_space(a.space(), b.space())) {
    throw DimensionError("measures live on different strategy spaces");
  }
}

double pair(const DiscreteMeasure& mu, const AtomFunction& g) {
  if (g.size() != mu.size()) {
    throw DimensionError("pairing: function has " + std::to_string(g.size()) +
                         " values for " + std::to_string(mu.size()) + " atoms");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < mu.size(); ++i) sum += g[i] * mu[i];
  return sum;
}

double bl_norm(const AtomFunction& g, const StrategySpace& space) {
  if (g.size() != space.size()) throw DimensionError("bl_norm: function/space size mismatch");
  double sup = 0.0;
  double lip = 0.0;
  for (std::size_t i = 0; i < g.size(); ++i) {
    sup = std::max(sup, std::abs(g[i]));
    for (std::size_t j = i + 1; j < g.size(); ++j) {
      lip = std::max(lip, std::abs(g[i] - g[j]) / space.distance(i, j));
    }
  }
  return sup + lip;
}

DualNormCertificate solve_bl_dual_norm(const DiscreteMeasure& mu) {
  DualNormCertificate cert;
  cert.f.assign(mu.size(), 0.0);

  std::vector<std::size_t> support;
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (mu[i] != 0.0) support.push_back(i);
  }
  if (support.empty()) return cert;

  // Shift g_i = f_i + s >= 0 so that every variable is sign-constrained and
  // the origin is feasible. Variables: g_0..g_{k-1}, s, L.
  const std::size_t k = support.size();
  const std::size_t s_var = k;
  const std::size_t l_var = k + 1;
  lp::LinearProgram program(k + 2);

  // The norm is homogeneous; solving for mu / |mu|_TV keeps the solver
  // tolerances relative.
  double tv = 0.0;
  for (std::size_t i : support) tv += std::abs(mu[i]);
  std::vector<double> c(k + 2, 0.0);
  double mass = 0.0;
  for (std::size_t a = 0; a < k; ++a) {
    c[a] = mu[support[a]] / tv;
    mass += c[a];
  }
  c[s_var] = -mass;
  program.set_objective(c);

  std::vector<double> row(k + 2, 0.0);
  for (std::size_t a = 0; a < k; ++a) {  // f_a <= s
    std::fill(row.begin(), row.end(), 0.0);
    row[a] = 1.0;
    row[s_var] = -2.0;
    program.add_row(row, 0.0);
  }
  const StrategySpace& space = *mu.space();
  auto dist = [&](std::size_t a, std::size_t b) { return space.distance(support[a], support[b]); };
  // f_a - f_b <= L d(a,b) follows from the rows through c when c lies between
  // a and b, so only pairs without an intermediate support atom are kept.
  auto implied = [&](std::size_t a, std::size_t b) {
    const double d = dist(a, b);
    for (std::size_t c = 0; c < k; ++c) {
      if (c != a && c != b && dist(a, c) + dist(c, b) <= d * (1.0 + kBetweenSlack)) return true;
    }
    return false;
  };
  for (std::size_t a = 0; a < k; ++a) {  // f_a - f_b <= L d(a,b)
    for (std::size_t b = 0; b < k; ++b) {
      if (a == b || implied(a, b)) continue;
      std::fill(row.begin(), row.end(), 0.0);
      row[a] = 1.0;
      row[b] = -1.0;
      row[l_var] = -dist(a, b);
      program.add_row(row, 0.0);
    }
  }
  std::fill(row.begin(), row.end(), 0.0);
  row[s_var] = 1.0;
  row[l_var] = 1.0;
  program.add_row(row, 1.0);

  const auto result = lp::maximize(program);
  if (result.status != lp::Status::kOptimal) {
    throw NumericalError("dual BL norm LP did not reach optimality after " +
                         std::to_string(result.iterations) + " pivots (" +
                         std::to_string(result.degenerate_pivots) + " degenerate, " +
                         std::to_string(k) + " support atoms)");
  }
  cert.value = result.objective * tv;
  cert.sup_bound = result.x[s_var];
  cert.lipschitz_bound = result.x[l_var];
  cert.pivots = result.iterations;
  for (std::size_t a = 0; a < k; ++a) cert.f[support[a]] = result.x[a] - cert.sup_bound;
  return cert;
}

double bl_dual_norm(const DiscreteMeasure& mu) { return solve_bl_dual_norm(mu).value; }

double flat_distance(const DiscreteMeasure& mu, const DiscreteMeasure& nu) {
  require_same_space(mu, nu);
  return bl_dual_norm(mu - nu);
}

DiscreteMeasure bullet(const AtomFunction& f, const DiscreteMeasure& mu) {
  if (f.size() != mu.size()) throw DimensionError("bullet: function/measure size mismatch");
  std::vector<double> w(mu.size());
  for (std::size_t i = 0; i < mu.size(); ++i) w[i] = f[i] * mu[i];
  return DiscreteMeasure(mu.space(), std::move(w));
}

DiscreteMeasure bullet(const MutationKernel& kernel, const DiscreteMeasure& mu) {
  if (!same_space(kernel.space(), mu.space())) {
    throw DimensionError("bullet: kernel and measure live on different spaces");
  }
  const std::size_t n = mu.size();
  std::vector<double> w(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    const double mi = mu[i];
    if (mi == 0.0) continue;
    const auto row = kernel.row(i);
    for (std::size_t j = 0; j < n; ++j) w[j] += row[j] * mi;
  }
  return DiscreteMeasure(mu.space(), std::move(w));
}

}  // namespace mvdyn
