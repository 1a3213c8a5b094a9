#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mvdyn/error.hpp"
#include "mvdyn/kernel.hpp"
#include "oracles.hpp"

using namespace mvdyn;

namespace {

SpacePtr line(std::size_t n, double hi = 1.0) {
  const Interval b[] = {{0.0, hi}};
  const std::size_t c[] = {n};
  return share(StrategySpace::grid(b, c));
}

}  // namespace

TEST(Kernel, PureSelectionIsIdentity) {
  const auto one = pure_selection_kernel(line(1));
  EXPECT_EQ(one(0, 0), 1.0);
  const auto k = pure_selection_kernel(line(3));
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j) EXPECT_EQ(k(i, j), i == j ? 1.0 : 0.0);
  EXPECT_TRUE(k.is_identity());
}

TEST(Kernel, GaussianNarrowWidthApproachesIdentity) {
  const auto s = line(11);
  const auto k = local_mutation_kernel(s, s->diameter() / 1000.0);
  double off = 0.0;
  for (std::size_t i = 0; i < k.size(); ++i)
    for (std::size_t j = 0; j < k.size(); ++j)
      if (i != j) off = std::max(off, k(i, j));
  EXPECT_LT(off, 1e-6);
}

TEST(Kernel, GaussianEntriesMatchDirectEvaluation) {
  const auto s = line(4);
  const double w = 0.4;
  const auto k = local_mutation_kernel(s, w);
  for (std::size_t i = 0; i < 4; ++i) {
    double z = 0.0;
    for (std::size_t j = 0; j < 4; ++j) z += std::exp(-std::pow(s->distance(i, j), 2) / (2 * w * w));
    double sum = 0.0;
    for (std::size_t j = 0; j < 4; ++j) {
      EXPECT_NEAR(k(i, j), std::exp(-std::pow(s->distance(i, j), 2) / (2 * w * w)) / z, 1e-15);
      sum += k(i, j);
    }
    EXPECT_NEAR(sum, 1.0, 1e-12);
  }
  const auto single = local_mutation_kernel(line(1), 3.0);
  EXPECT_EQ(single(0, 0), 1.0);
  EXPECT_THROW(local_mutation_kernel(s, 0.0), ConfigError);
  EXPECT_THROW(local_mutation_kernel(s, -1.0), ConfigError);
}

TEST(Kernel, LipschitzBound) {
  const auto s = line(3);
  const MutationKernel constant(s, {{0.2, 0.3, 0.5}, {0.2, 0.3, 0.5}, {0.2, 0.3, 0.5}});
  EXPECT_NEAR(kernel_lipschitz_bound(constant), 0.0, 1e-15);

  // Pure selection: max over pairs of (2d/(2+d))/d = 2/(2+d_min).
  EXPECT_NEAR(kernel_lipschitz_bound(pure_selection_kernel(s)), 2.0 / 2.5, 1e-12);

  // Rows (1,0), (0.5,0.5) at d = 1: the difference is 0.5(delta_0 - delta_1).
  const auto p = share(StrategySpace::from_distances({{0, 1}, {1, 0}}));
  const MutationKernel k(p, {{1, 0}, {0.5, 0.5}});
  EXPECT_NEAR(kernel_lipschitz_bound(k), 0.5 * oracle::dirac_pair_flat(1.0), 1e-12);
  EXPECT_EQ(kernel_lipschitz_bound(pure_selection_kernel(line(1))), 0.0);
}

TEST(Kernel, ValidateStochastic) {
  EXPECT_TRUE(validate_stochastic({{1, 0}, {0, 1}}).ok);

  const auto sum = validate_stochastic({{0.6, 0.5}, {0, 1}});
  EXPECT_FALSE(sum.ok);
  ASSERT_EQ(sum.issues.size(), 1u);
  EXPECT_EQ(sum.issues[0].row, 0u);
  EXPECT_NE(sum.issues[0].message.find("row-sum"), std::string::npos);
  EXPECT_NE(sum.issues[0].message.find("1.1"), std::string::npos);
  EXPECT_NEAR(sum.max_row_sum_deviation, 0.1, 1e-12);

  const auto neg = validate_stochastic({{-0.1, 1.1}, {0, 1}});
  EXPECT_FALSE(neg.ok);
  ASSERT_FALSE(neg.issues.empty());
  EXPECT_NE(neg.issues[0].message.find("negative entry"), std::string::npos);
  EXPECT_EQ(neg.min_entry, -0.1);
}

TEST(Kernel, ConstructorValidates) {
  const auto p = share(StrategySpace::from_distances({{0, 1}, {1, 0}}));
  EXPECT_THROW(MutationKernel(p, {{0.6, 0.5}, {0, 1}}), ConfigError);
  EXPECT_THROW(MutationKernel(p, {{-0.1, 1.1}, {0, 1}}), ConfigError);
  EXPECT_THROW(MutationKernel(p, {{1, 0}}), DimensionError);
  const MutationKernel r(p, {{2, 2}, {0, 3}}, true);
  EXPECT_EQ(r(0, 0), 0.5);
  EXPECT_EQ(r(1, 1), 1.0);
  EXPECT_THROW(MutationKernel(p, {{0, 0}, {0, 3}}, true), ConfigError);
}

TEST(Kernel, PropertyRenormalizedRowsAreStochastic) {
  oracle::Gen g(21);
  for (int k = 0; k < 100; ++k) {
    const std::size_t n = g.index(1, 15);
    const auto s = line(n);
    auto rows = g.stochastic(n);
    for (auto& r : rows)
      for (double& v : r) v *= g.uniform(0.5, 2.0);
    const MutationKernel ker(s, rows, true);
    const auto rep = validate_stochastic(ker);
    EXPECT_TRUE(rep.ok);
    EXPECT_LE(rep.max_row_sum_deviation, MutationKernel::kRowSumTolerance);
    for (std::size_t i = 0; i < n; ++i) EXPECT_NEAR(ker.row_measure(i).total_mass(), 1.0, 1e-12);
  }
}
