#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <utility>
#include <vector>

namespace mvdyn {

/// Closed interval [lo, hi] on one strategy axis.
struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// A finite metric space of strategies: the atoms every measure and kernel
/// is indexed by.
///
/// Points are optional coordinate vectors (used by coordinate-based rate
/// coefficients); the distance matrix is authoritative. Construction checks
/// the metric axioms, so a StrategySpace that exists is a valid metric space.
class StrategySpace {
 public:
  /// Regular lattice over the box `bounds` with `counts[k]` points on axis k
  /// and the Euclidean metric. Atoms are ordered with the last axis varying
  /// fastest.
  static StrategySpace grid(std::span<const Interval> bounds,
                            std::span<const std::size_t> counts);

  /// Arbitrary metric given as a dense row-major matrix. `points` may be
  /// empty or hold one coordinate vector per atom.
  static StrategySpace from_distances(std::vector<std::vector<double>> distances,
                                      std::vector<std::vector<double>> points = {});

  std::size_t size() const noexcept { return n_; }
  double distance(std::size_t i, std::size_t j) const { return dist_[i * n_ + j]; }
  const std::vector<std::vector<double>>& points() const noexcept { return points_; }
  bool has_points() const noexcept { return !points_.empty(); }

  /// Largest pairwise distance; 0 for a singleton.
  double diameter() const noexcept;

  /// Same atom count and bitwise-identical distance matrix.
  bool same_as(const StrategySpace& other) const noexcept;

  friend bool operator==(const StrategySpace& a, const StrategySpace& b) noexcept {
    return a.same_as(b);
  }

 private:
  StrategySpace(std::size_t n, std::vector<double> dist,
                std::vector<std::vector<double>> points);
  void check_metric() const;

  std::size_t n_ = 0;
  std::vector<double> dist_;
  std::vector<std::vector<double>> points_;
};

using SpacePtr = std::shared_ptr<const StrategySpace>;

inline SpacePtr share(StrategySpace space) {
  return std::make_shared<const StrategySpace>(std::move(space));
}

/// Free-function spelling of StrategySpace::diameter.
inline double diameter(const StrategySpace& space) noexcept { return space.diameter(); }

/// True when both pointers refer to the same or structurally equal spaces.
bool same_space(const SpacePtr& a, const SpacePtr& b) noexcept;

}  // namespace mvdyn
