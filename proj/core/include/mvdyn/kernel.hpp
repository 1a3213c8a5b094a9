#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "mvdyn/measure.hpp"
#include "mvdyn/strategy_space.hpp"

namespace mvdyn {

/// Row-stochastic offspring distribution: row i is the distribution of
/// offspring strategies of parents at atom i.
class MutationKernel {
 public:
  /// Tolerance on |row sum - 1|.
  static constexpr double kRowSumTolerance = 1e-12;

  /// Validates nonnegativity and row sums. With `renormalize` set, rows are
  /// divided by their sums first (entries must still be nonnegative and
  /// every row must have positive mass).
  MutationKernel(SpacePtr space, std::vector<std::vector<double>> rows,
                 bool renormalize = false);

  const SpacePtr& space() const noexcept { return space_; }
  std::size_t size() const noexcept { return n_; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }
  std::span<const double> row(std::size_t i) const {
    return std::span<const double>(data_).subspan(i * n_, n_);
  }
  DiscreteMeasure row_measure(std::size_t i) const;
  bool is_identity() const noexcept;

 private:
  struct Unchecked {};
  MutationKernel(Unchecked, SpacePtr space, std::vector<double> data);
  friend MutationKernel make_unchecked_kernel(SpacePtr, std::vector<std::vector<double>>);

  SpacePtr space_;
  std::size_t n_ = 0;
  std::vector<double> data_;
};

/// q -> delta_q: offspring inherit the parent strategy exactly.
MutationKernel pure_selection_kernel(SpacePtr space);

/// Row i proportional to exp(-d(i,j)^2 / (2 width^2)), normalized.
MutationKernel local_mutation_kernel(SpacePtr space, double width);

/// max_{i != j} ||K(i) - K(j)||*_BL / d(i,j); 0 on a singleton.
double kernel_lipschitz_bound(const MutationKernel& kernel);

struct StochasticIssue {
  std::size_t row = 0;
  std::string message;
};

struct StochasticReport {
  bool ok = true;
  std::vector<StochasticIssue> issues;
  double max_row_sum_deviation = 0.0;
  double min_entry = 0.0;
};

/// Checks a raw matrix for negative entries and row sums off by more than
/// kRowSumTolerance. Never throws for content problems.
StochasticReport validate_stochastic(const std::vector<std::vector<double>>& rows);
StochasticReport validate_stochastic(const MutationKernel& kernel);

}  // namespace mvdyn
