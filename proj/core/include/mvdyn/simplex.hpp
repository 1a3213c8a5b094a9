#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mvdyn::lp {

/// maximize c'x subject to A x <= b, x >= 0, with b >= 0 so that the origin
/// is feasible and no phase-one is needed. Rows are appended one at a time.
class LinearProgram {
 public:
  explicit LinearProgram(std::size_t num_vars);

  std::size_t num_vars() const noexcept { return num_vars_; }
  std::size_t num_rows() const noexcept { return rhs_.size(); }

  void set_objective(std::span<const double> c);
  /// Throws ConfigError if `coeffs` has the wrong length or `rhs` < 0.
  void add_row(std::span<const double> coeffs, double rhs);

  const std::vector<double>& objective() const noexcept { return objective_; }
  const std::vector<double>& rhs() const noexcept { return rhs_; }
  double coeff(std::size_t row, std::size_t var) const { return rows_[row * num_vars_ + var]; }

 private:
  std::size_t num_vars_;
  std::vector<double> rows_;
  std::vector<double> rhs_;
  std::vector<double> objective_;
};

enum class Status { kOptimal, kUnbounded, kIterationLimit, kNumericalFailure };

struct Options {
  /// Reduced costs above -tolerance count as optimal.
  double tolerance = 1e-11;
  /// 0 selects 50 * (rows + vars).
  std::size_t max_iterations = 0;
  /// Right-hand sides are shifted by distinct amounts of this relative size
  /// before pivoting; the final basis is re-solved against the exact data.
  double perturbation = 1e-7;
  /// Largest primal or dual violation accepted for the re-solved basis.
  double feasibility_tolerance = 1e-9;
};

struct Result {
  Status status = Status::kIterationLimit;
  double objective = 0.0;
  std::vector<double> x;
  std::size_t iterations = 0;
  std::size_t degenerate_pivots = 0;
  /// Largest constraint violation of `x` against the unperturbed program.
  double primal_residual = 0.0;
  /// Largest dual violation of the final basis.
  double dual_residual = 0.0;
  /// Number of perturbation levels tried.
  std::size_t attempts = 0;
};

/// Dense tableau simplex. Entering columns follow Dantzig's rule until a
/// degenerate pivot occurs; from then on Bland's rule is used, which rules
/// out cycling. The optimal basis is re-solved from the original data and
/// verified; if verification fails the solve is repeated with a smaller
/// perturbation and finally none, and kNumericalFailure is returned when no
/// attempt verifies.
Result maximize(const LinearProgram& program, const Options& options = {});

}  // namespace mvdyn::lp
