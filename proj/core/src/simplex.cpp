#include "mvdyn/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <utility>

#include "mvdyn/error.hpp"

namespace mvdyn::lp {

LinearProgram::LinearProgram(std::size_t num_vars)
    : num_vars_(num_vars), objective_(num_vars, 0.0) {}

void LinearProgram::set_objective(std::span<const double> c) {
  if (c.size() != num_vars_) throw ConfigError("objective has wrong length");
  objective_.assign(c.begin(), c.end());
}

void LinearProgram::add_row(std::span<const double> coeffs, double rhs) {
  if (coeffs.size() != num_vars_) throw ConfigError("constraint row has wrong length");
  if (!(rhs >= 0.0)) throw ConfigError("constraint right-hand side must be >= 0");
  rows_.insert(rows_.end(), coeffs.begin(), coeffs.end());
  rhs_.push_back(rhs);
}

namespace {

constexpr double kPivotEps = 1e-12;
constexpr double kSingularEps = 1e-13;

// Exchange tableau: rows 0..m-1 are constraints, row m the negated objective;
// column n holds the right-hand side. basis_[i] / nonbasis_[j] carry variable
// ids, slack ids are offset by n.
class Tableau {
 public:
  Tableau(const LinearProgram& p, double perturbation)
      : m_(p.num_rows()), n_(p.num_vars()), width_(n_ + 1),
        data_((m_ + 1) * width_, 0.0), basis_(m_), nonbasis_(n_) {
    double scale = 1.0;
    for (double b : p.rhs()) scale = std::max(scale, std::abs(b));
    for (std::size_t i = 0; i < m_; ++i) {
      for (std::size_t j = 0; j < n_; ++j) at(i, j) = p.coeff(i, j);
      // Distinct shifts in [1, 2) * perturbation * scale break ratio ties.
      const double golden = static_cast<double>(i + 1) * 0.6180339887498949;
      const double shift = 1.0 + (golden - std::floor(golden));
      at(i, n_) = p.rhs()[i] + perturbation * scale * shift;
      basis_[i] = n_ + i;
    }
    for (std::size_t j = 0; j < n_; ++j) {
      at(m_, j) = -p.objective()[j];
      nonbasis_[j] = j;
    }
  }

  Result run(const Options& options) {
    Result result;
    const std::size_t limit =
        options.max_iterations ? options.max_iterations : 50 * (m_ + n_ + 1);
    bool bland = false;
    while (result.iterations < limit) {
      const auto entering = choose_entering(options.tolerance, bland);
      if (!entering) {
        result.status = Status::kOptimal;
        extract(result);
        return result;
      }
      const auto leaving = choose_leaving(*entering);
      if (!leaving) {
        result.status = Status::kUnbounded;
        extract(result);
        return result;
      }
      if (at(*leaving, n_) <= 0.0) {
        ++result.degenerate_pivots;
        bland = true;
      }
      pivot(*leaving, *entering);
      ++result.iterations;
    }
    result.status = Status::kIterationLimit;
    extract(result);
    return result;
  }

  const std::vector<std::size_t>& basis() const noexcept { return basis_; }

 private:
  double& at(std::size_t i, std::size_t j) { return data_[i * width_ + j]; }

  std::optional<std::size_t> choose_entering(double tol, bool bland) {
    std::optional<std::size_t> best;
    for (std::size_t j = 0; j < n_; ++j) {
      const double rc = at(m_, j);
      if (rc >= -tol) continue;
      if (!best) {
        best = j;
      } else if (bland ? nonbasis_[j] < nonbasis_[*best] : rc < at(m_, *best)) {
        best = j;
      }
    }
    return best;
  }

  std::optional<std::size_t> choose_leaving(std::size_t s) {
    std::optional<std::size_t> best;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < m_; ++i) {
      const double a = at(i, s);
      if (a <= kPivotEps) continue;
      const double ratio = std::max(at(i, n_), 0.0) / a;
      if (!best || ratio < best_ratio || (ratio == best_ratio && basis_[i] < basis_[*best])) {
        best = i;
        best_ratio = ratio;
      }
    }
    return best;
  }

  void pivot(std::size_t r, std::size_t s) {
    const double inv = 1.0 / at(r, s);
    for (std::size_t i = 0; i <= m_; ++i) {
      if (i == r) continue;
      const double factor = at(i, s) * inv;
      if (factor == 0.0) continue;
      for (std::size_t j = 0; j < width_; ++j) {
        if (j != s) at(i, j) -= factor * at(r, j);
      }
      at(i, s) = -factor;
    }
    for (std::size_t j = 0; j < width_; ++j) {
      if (j != s) at(r, j) *= inv;
    }
    at(r, s) = inv;
    std::swap(basis_[r], nonbasis_[s]);
  }

  void extract(Result& result) {
    result.x.assign(n_, 0.0);
    for (std::size_t i = 0; i < m_; ++i) {
      if (basis_[i] < n_) result.x[basis_[i]] = at(i, n_);
    }
    result.objective = at(m_, n_);
  }

  std::size_t m_;
  std::size_t n_;
  std::size_t width_;
  std::vector<double> data_;
  std::vector<std::size_t> basis_;
  std::vector<std::size_t> nonbasis_;
};

// Solves M z = rhs in place (M is k x k, row-major) with partial pivoting.
bool solve_dense(std::vector<double> M, std::vector<double>& rhs, std::size_t k) {
  double scale = 0.0;
  for (double v : M) scale = std::max(scale, std::abs(v));
  for (std::size_t col = 0; col < k; ++col) {
    std::size_t piv = col;
    for (std::size_t r = col + 1; r < k; ++r) {
      if (std::abs(M[r * k + col]) > std::abs(M[piv * k + col])) piv = r;
    }
    if (std::abs(M[piv * k + col]) <= kSingularEps * scale) return false;
    if (piv != col) {
      for (std::size_t j = 0; j < k; ++j) std::swap(M[piv * k + j], M[col * k + j]);
      std::swap(rhs[piv], rhs[col]);
    }
    for (std::size_t r = col + 1; r < k; ++r) {
      const double factor = M[r * k + col] / M[col * k + col];
      if (factor == 0.0) continue;
      for (std::size_t j = col; j < k; ++j) M[r * k + j] -= factor * M[col * k + j];
      rhs[r] -= factor * rhs[col];
    }
  }
  for (std::size_t col = k; col-- > 0;) {
    double v = rhs[col];
    for (std::size_t j = col + 1; j < k; ++j) v -= M[col * k + j] * rhs[j];
    rhs[col] = v / M[col * k + col];
  }
  return true;
}

// Recomputes primal and dual solutions of `basis` from the unperturbed data
// and records their violations. Only the structural columns and the rows
// whose slacks left the basis enter the square system.
bool resolve_basis(const LinearProgram& p, const std::vector<std::size_t>& basis,
                   Result& result) {
  const std::size_t m = p.num_rows();
  const std::size_t n = p.num_vars();
  std::vector<std::size_t> cols;
  std::vector<bool> slack_basic(m, false);
  for (std::size_t id : basis) {
    if (id < n) {
      cols.push_back(id);
    } else {
      slack_basic[id - n] = true;
    }
  }
  std::vector<std::size_t> rows;
  for (std::size_t i = 0; i < m; ++i) {
    if (!slack_basic[i]) rows.push_back(i);
  }
  const std::size_t k = cols.size();
  if (rows.size() != k) return false;

  std::vector<double> M(k * k);
  std::vector<double> Mt(k * k);
  std::vector<double> xb(k);
  std::vector<double> y(k);
  for (std::size_t r = 0; r < k; ++r) {
    for (std::size_t c = 0; c < k; ++c) {
      M[r * k + c] = p.coeff(rows[r], cols[c]);
      Mt[c * k + r] = M[r * k + c];
    }
    xb[r] = p.rhs()[rows[r]];
    y[r] = p.objective()[cols[r]];
  }
  if (!solve_dense(std::move(M), xb, k) || !solve_dense(std::move(Mt), y, k)) return false;

  result.x.assign(n, 0.0);
  for (std::size_t c = 0; c < k; ++c) result.x[cols[c]] = xb[c];

  double primal = 0.0;
  for (double v : result.x) primal = std::max(primal, -v);
  for (std::size_t i = 0; i < m; ++i) {
    double lhs = 0.0;
    for (std::size_t j = 0; j < n; ++j) lhs += p.coeff(i, j) * result.x[j];
    primal = std::max(primal, lhs - p.rhs()[i]);
  }

  std::vector<double> dual_full(m, 0.0);
  double dual = 0.0;
  for (std::size_t r = 0; r < k; ++r) {
    dual_full[rows[r]] = y[r];
    dual = std::max(dual, -y[r]);
  }
  for (std::size_t j = 0; j < n; ++j) {
    double reduced = p.objective()[j];
    for (std::size_t r = 0; r < k; ++r) reduced -= dual_full[rows[r]] * p.coeff(rows[r], j);
    dual = std::max(dual, reduced);
  }

  double objective = 0.0;
  for (std::size_t j = 0; j < n; ++j) objective += p.objective()[j] * result.x[j];
  result.objective = objective;
  result.primal_residual = primal;
  result.dual_residual = dual;
  return true;
}

}  // namespace

Result maximize(const LinearProgram& program, const Options& options) {
  double rhs_scale = 1.0;
  for (double b : program.rhs()) rhs_scale = std::max(rhs_scale, std::abs(b));
  double obj_scale = 1.0;
  for (double c : program.objective()) obj_scale = std::max(obj_scale, std::abs(c));

  const double levels[] = {options.perturbation, options.perturbation * 1e-2,
                           options.perturbation * 1e-4, 0.0};
  Result last;
  std::size_t attempts = 0;
  double previous = -1.0;
  for (double level : levels) {
    if (level == previous) continue;
    previous = level;
    ++attempts;
    Tableau tableau(program, level);
    Result result = tableau.run(options);
    result.attempts = attempts;
    if (result.status != Status::kOptimal) {
      if (result.status == Status::kUnbounded) return result;
      last = std::move(result);
      continue;
    }
    Result exact = result;
    if (resolve_basis(program, tableau.basis(), exact) &&
        exact.primal_residual <= options.feasibility_tolerance * rhs_scale &&
        exact.dual_residual <= options.feasibility_tolerance * obj_scale) {
      return exact;
    }
    exact.status = Status::kNumericalFailure;
    last = std::move(exact);
  }
  return last;
}

}  // namespace mvdyn::lp
