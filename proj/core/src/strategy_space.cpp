#include "mvdyn/strategy_space.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mvdyn/error.hpp"

namespace mvdyn {

const char* to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::kConfig: return "config";
    case ErrorKind::kDimension: return "dimension";
    case ErrorKind::kAssumption: return "assumption";
    case ErrorKind::kNumerical: return "numerical";
    case ErrorKind::kConvergence: return "convergence";
    case ErrorKind::kPositivity: return "positivity";
    case ErrorKind::kIo: return "io";
  }
  return "unknown";
}

namespace {

// Slack for the triangle inequality; Euclidean lattices accumulate rounding.
constexpr double kTriangleSlack = 1e-12;

}  // namespace

StrategySpace::StrategySpace(std::size_t n, std::vector<double> dist,
                             std::vector<std::vector<double>> points)
    : n_(n), dist_(std::move(dist)), points_(std::move(points)) {
  check_metric();
}

StrategySpace StrategySpace::grid(std::span<const Interval> bounds,
                                  std::span<const std::size_t> counts) {
  if (bounds.empty()) throw ConfigError("grid: dimension must be positive");
  if (bounds.size() != counts.size()) {
    throw ConfigError("grid: bounds and counts differ in dimension");
  }
  std::size_t n = 1;
  for (std::size_t k = 0; k < bounds.size(); ++k) {
    if (counts[k] == 0) throw ConfigError("grid: zero point count on axis " + std::to_string(k));
    if (!(bounds[k].lo <= bounds[k].hi) || !std::isfinite(bounds[k].lo) ||
        !std::isfinite(bounds[k].hi)) {
      throw ConfigError("grid: inverted or non-finite bounds on axis " + std::to_string(k));
    }
    n *= counts[k];
  }

  const std::size_t dim = bounds.size();
  std::vector<std::vector<double>> points(n, std::vector<double>(dim));
  for (std::size_t idx = 0; idx < n; ++idx) {
    std::size_t rem = idx;
    for (std::size_t k = dim; k-- > 0;) {
      const std::size_t c = rem % counts[k];
      rem /= counts[k];
      const double lo = bounds[k].lo;
      const double hi = bounds[k].hi;
      points[idx][k] = counts[k] == 1
                           ? lo
                           : lo + (hi - lo) * static_cast<double>(c) /
                                      static_cast<double>(counts[k] - 1);
    }
  }

  std::vector<double> dist(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      double sq = 0.0;
      for (std::size_t k = 0; k < dim; ++k) {
        const double diff = points[i][k] - points[j][k];
        sq += diff * diff;
      }
      dist[i * n + j] = dist[j * n + i] = std::sqrt(sq);
    }
  }
  return StrategySpace(n, std::move(dist), std::move(points));
}

StrategySpace StrategySpace::from_distances(std::vector<std::vector<double>> distances,
                                            std::vector<std::vector<double>> points) {
  const std::size_t n = distances.size();
  if (n == 0) throw ConfigError("strategy space needs at least one atom");
  std::vector<double> dist;
  dist.reserve(n * n);
  for (const auto& row : distances) {
    if (row.size() != n) throw ConfigError("distance matrix is not square");
    dist.insert(dist.end(), row.begin(), row.end());
  }
  if (!points.empty() && points.size() != n) {
    throw ConfigError("point count does not match distance matrix");
  }
  return StrategySpace(n, std::move(dist), std::move(points));
}

void StrategySpace::check_metric() const {
  if (n_ == 0) throw ConfigError("strategy space needs at least one atom");
  if (dist_.size() != n_ * n_) throw ConfigError("distance matrix has wrong size");
  for (std::size_t i = 0; i < n_; ++i) {
    if (distance(i, i) != 0.0) throw ConfigError("metric: d(i,i) must be 0");
    for (std::size_t j = 0; j < n_; ++j) {
      const double dij = distance(i, j);
      if (!std::isfinite(dij)) throw ConfigError("metric: non-finite distance");
      if (dij != distance(j, i)) throw ConfigError("metric: distance matrix is not symmetric");
      if (i != j && !(dij > 0.0)) {
        throw ConfigError("metric: distinct atoms " + std::to_string(i) + ", " +
                          std::to_string(j) + " at distance <= 0");
      }
    }
  }
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      for (std::size_t k = 0; k < n_; ++k) {
        const double lhs = distance(i, k);
        const double rhs = distance(i, j) + distance(j, k);
        if (lhs > rhs + kTriangleSlack * std::max(1.0, rhs)) {
          throw ConfigError("metric: triangle inequality fails for (" + std::to_string(i) +
                            ", " + std::to_string(j) + ", " + std::to_string(k) + ")");
        }
      }
    }
  }
}

double StrategySpace::diameter() const noexcept {
  return dist_.empty() ? 0.0 : *std::max_element(dist_.begin(), dist_.end());
}

bool StrategySpace::same_as(const StrategySpace& other) const noexcept {
  return n_ == other.n_ && dist_ == other.dist_;
}

bool same_space(const SpacePtr& a, const SpacePtr& b) noexcept {
  if (a == b) return true;
  if (!a || !b) return false;
  return a->same_as(*b);
}

}  // namespace mvdyn
