#include "mvdyn/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "mvdyn/error.hpp"

namespace mvdyn {

namespace {

std::string describe(const StochasticReport& report) {
  std::ostringstream os;
  os << "kernel is not row-stochastic:";
  for (const auto& issue : report.issues) os << " [row " << issue.row << ": " << issue.message << "]";
  return os.str();
}

}  // namespace

MutationKernel::MutationKernel(SpacePtr space, std::vector<std::vector<double>> rows,
                               bool renormalize)
    : space_(std::move(space)) {
  if (!space_) throw ConfigError("kernel requires a strategy space");
  n_ = space_->size();
  if (rows.size() != n_) throw DimensionError("kernel row count does not match the space");
  for (auto& r : rows) {
    if (r.size() != n_) throw DimensionError("kernel is not square");
    if (renormalize) {
      double sum = 0.0;
      for (double v : r) {
        if (!(v >= 0.0)) throw ConfigError("kernel: negative entry cannot be renormalized");
        sum += v;
      }
      if (!(sum > 0.0)) throw ConfigError("kernel: zero row cannot be renormalized");
      for (double& v : r) v /= sum;
    }
  }
  const auto report = validate_stochastic(rows);
  if (!report.ok) throw ConfigError(describe(report));
  data_.reserve(n_ * n_);
  for (const auto& r : rows) data_.insert(data_.end(), r.begin(), r.end());
}

MutationKernel::MutationKernel(Unchecked, SpacePtr space, std::vector<double> data)
    : space_(std::move(space)), n_(space_->size()), data_(std::move(data)) {}

DiscreteMeasure MutationKernel::row_measure(std::size_t i) const {
  const auto r = row(i);
  return DiscreteMeasure(space_, std::vector<double>(r.begin(), r.end()));
}

bool MutationKernel::is_identity() const noexcept {
  for (std::size_t i = 0; i < n_; ++i) {
    for (std::size_t j = 0; j < n_; ++j) {
      if ((*this)(i, j) != (i == j ? 1.0 : 0.0)) return false;
    }
  }
  return true;
}

MutationKernel make_unchecked_kernel(SpacePtr space, std::vector<std::vector<double>> rows) {
  std::vector<double> data;
  for (const auto& r : rows) data.insert(data.end(), r.begin(), r.end());
  return MutationKernel(MutationKernel::Unchecked{}, std::move(space), std::move(data));
}

MutationKernel pure_selection_kernel(SpacePtr space) {
  if (!space) throw ConfigError("kernel requires a strategy space");
  const std::size_t n = space->size();
  std::vector<std::vector<double>> rows(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i) rows[i][i] = 1.0;
  return make_unchecked_kernel(std::move(space), std::move(rows));
}

MutationKernel local_mutation_kernel(SpacePtr space, double width) {
  if (!space) throw ConfigError("kernel requires a strategy space");
  if (!(width > 0.0) || !std::isfinite(width)) {
    throw ConfigError("gaussian kernel width must be positive and finite");
  }
  const std::size_t n = space->size();
  std::vector<std::vector<double>> rows(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    // exp(0) = 1 on the diagonal keeps the row sum >= 1, so no underflow to 0.
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double d = space->distance(i, j);
      rows[i][j] = std::exp(-d * d / (2.0 * width * width));
      sum += rows[i][j];
    }
    for (double& v : rows[i]) v /= sum;
  }
  return MutationKernel(std::move(space), std::move(rows));
}

double kernel_lipschitz_bound(const MutationKernel& kernel) {
  const std::size_t n = kernel.size();
  double bound = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const auto ri = kernel.row_measure(i);
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dist = flat_distance(ri, kernel.row_measure(j));
      bound = std::max(bound, dist / kernel.space()->distance(i, j));
    }
  }
  return bound;
}

StochasticReport validate_stochastic(const std::vector<std::vector<double>>& rows) {
  StochasticReport report;
  report.min_entry = rows.empty() || rows.front().empty() ? 0.0 : rows.front().front();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    double sum = 0.0;
    bool negative = false;
    for (double v : rows[i]) {
      if (!std::isfinite(v)) {
        report.ok = false;
        report.issues.push_back({i, "non-finite entry"});
      }
      report.min_entry = std::min(report.min_entry, v);
      if (v < 0.0) negative = true;
      sum += v;
    }
    if (negative) {
      report.ok = false;
      report.issues.push_back({i, "negative entry"});
    }
    const double dev = std::abs(sum - 1.0);
    report.max_row_sum_deviation = std::max(report.max_row_sum_deviation, dev);
    if (dev > MutationKernel::kRowSumTolerance) {
      report.ok = false;
      std::ostringstream os;
      os.precision(17);
      os << "row-sum " << sum;
      report.issues.push_back({i, os.str()});
    }
  }
  return report;
}

StochasticReport validate_stochastic(const MutationKernel& kernel) {
  std::vector<std::vector<double>> rows;
  rows.reserve(kernel.size());
  for (std::size_t i = 0; i < kernel.size(); ++i) {
    const auto r = kernel.row(i);
    rows.emplace_back(r.begin(), r.end());
  }
  return validate_stochastic(rows);
}

}  // namespace mvdyn
