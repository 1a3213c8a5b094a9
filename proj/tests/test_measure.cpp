#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "mvdyn/error.hpp"
#include "mvdyn/kernel.hpp"
#include "mvdyn/measure.hpp"
#include "oracles.hpp"

using namespace mvdyn;

namespace {

SpacePtr pair_space(double d) { return share(StrategySpace::from_distances({{0, d}, {d, 0}})); }

SpacePtr line(std::size_t n, double hi = 1.0) {
  const Interval b[] = {{0.0, hi}};
  const std::size_t c[] = {n};
  return share(StrategySpace::grid(b, c));
}

std::vector<std::vector<double>> matrix(const StrategySpace& s) {
  std::vector<std::vector<double>> m(s.size(), std::vector<double>(s.size()));
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = 0; j < s.size(); ++j) m[i][j] = s.distance(i, j);
  return m;
}

// Random metric on n points: distances between random points in the plane.
SpacePtr random_space(oracle::Gen& g, std::size_t n) {
  std::vector<std::vector<double>> pts(n);
  for (auto& p : pts) p = g.vec(2, 0.0, g.uniform(0.1, 4.0));
  std::vector<std::vector<double>> d(n, std::vector<double>(n, 0.0));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) d[i][j] = std::hypot(pts[i][0] - pts[j][0], pts[i][1] - pts[j][1]);
  return share(StrategySpace::from_distances(d, pts));
}

}  // namespace

TEST(Pairing, Examples) {
  const DiscreteMeasure mu(line(2), {2, 3});
  EXPECT_EQ(pair(mu, AtomFunction::constant(2, 1.0)), 5.0);
  EXPECT_EQ(pair(mu, AtomFunction::constant(2, 0.0)), 0.0);
  EXPECT_EQ(pair(mu, AtomFunction{{0.5, 1.0}}), 4.0);
  EXPECT_THROW(pair(mu, AtomFunction{{1.0}}), DimensionError);
}

TEST(BlNorm, Examples) {
  const auto s = pair_space(1.0);
  EXPECT_EQ(bl_norm(AtomFunction::constant(2, 1.0), *s), 1.0);
  EXPECT_EQ(bl_norm(AtomFunction{{0.0, 1.0}}, *s), 2.0);
  EXPECT_EQ(bl_norm(AtomFunction::constant(2, 0.0), *s), 0.0);
}

TEST(DualNorm, Examples) {
  const auto s = line(3);
  EXPECT_NEAR(bl_dual_norm(DiscreteMeasure::dirac(s, 1)), 1.0, 1e-12);
  EXPECT_EQ(bl_dual_norm(DiscreteMeasure::zero(s)), 0.0);
  const auto p = pair_space(1.0);
  EXPECT_NEAR(bl_dual_norm(DiscreteMeasure(p, {1, -1})), 2.0 / 3.0, 1e-12);
}

TEST(DualNorm, DiracPairClosedForm) {
  for (double d : {0.01, 0.1, 0.5, 1.0, 2.0, 3.7, 10.0, 100.0}) {
    const auto p = pair_space(d);
    EXPECT_NEAR(bl_dual_norm(DiscreteMeasure(p, {1, -1})), oracle::dirac_pair_flat(d), 1e-12) << d;
  }
}

TEST(DualNorm, CertificateIsFeasibleAndTight) {
  const auto s = share(StrategySpace::from_distances({{0, 1, 3}, {1, 0, 2.5}, {3, 2.5, 0}}));
  const DiscreteMeasure mu(s, {1, -2, 0.5});
  const auto cert = solve_bl_dual_norm(mu);
  // Frozen from an independent LP solver on the same program.
  EXPECT_NEAR(cert.value, 1.2777777777777777, 1e-12);
  EXPECT_LE(cert.sup_bound + cert.lipschitz_bound, 1.0 + 1e-12);
  EXPECT_NEAR(pair(mu, AtomFunction{cert.f}), cert.value, 1e-12);
  EXPECT_LE(bl_norm(AtomFunction{cert.f}, *s), 1.0 + 1e-12);
}

TEST(DualNorm, NonnegativeIsTotalMass) {
  oracle::Gen g(11);
  for (int k = 0; k < 30; ++k) {
    const auto s = random_space(g, g.index(1, 12));
    const DiscreteMeasure mu(s, g.vec(s->size(), 0.0, 3.0));
    EXPECT_NEAR(bl_dual_norm(mu), mu.total_mass(), 1e-10);
  }
}

TEST(DualNorm, MatchesVertexEnumerationOracle) {
  oracle::Gen g(12);
  for (int k = 0; k < 60; ++k) {
    const auto s = random_space(g, g.index(2, 3));
    const DiscreteMeasure mu(s, g.vec(s->size(), -2.0, 2.0));
    EXPECT_NEAR(bl_dual_norm(mu), oracle::vertex_enumeration_dual_norm(
                                      std::vector<double>(mu.weights().begin(), mu.weights().end()),
                                      matrix(*s)),
                1e-9);
  }
}

// Collinear atoms: the middle atom makes the outer Lipschitz row redundant.
TEST(DualNorm, CollinearAtomsMatchVertexEnumeration) {
  oracle::Gen g(15);
  for (int k = 0; k < 40; ++k) {
    const auto s = line(3, g.uniform(0.2, 8.0));
    const DiscreteMeasure mu(s, g.vec(3, -2.0, 2.0));
    EXPECT_NEAR(bl_dual_norm(mu), oracle::vertex_enumeration_dual_norm(
                                      std::vector<double>(mu.weights().begin(), mu.weights().end()),
                                      matrix(*s)),
                1e-9);
  }
}

TEST(DualNorm, MatchesGridSearchOracle) {
  oracle::Gen g(13);
  for (int k = 0; k < 6; ++k) {
    const auto s = random_space(g, g.index(2, 3));
    const DiscreteMeasure mu(s, g.vec(s->size(), -1.0, 1.0));
    const std::vector<double> w(mu.weights().begin(), mu.weights().end());
    const double lp = bl_dual_norm(mu);
    const double grid = oracle::grid_search_dual_norm(w, matrix(*s));
    EXPECT_LE(grid, lp + 1e-12);  // grid points are feasible
    EXPECT_NEAR(grid, lp, 1e-4);
  }
}

TEST(DualNorm, PropertyNormAxioms) {
  oracle::Gen g(14);
  for (int k = 0; k < 100; ++k) {
    const auto s = random_space(g, g.index(1, 8));
    const DiscreteMeasure a(s, g.vec(s->size(), -2.0, 2.0));
    const DiscreteMeasure b(s, g.vec(s->size(), -2.0, 2.0));
    const double c = g.uniform(-3.0, 3.0);
    const double na = bl_dual_norm(a);
    EXPECT_NEAR(bl_dual_norm(c * a), std::abs(c) * na, 1e-9 * (1 + na));
    EXPECT_LE(bl_dual_norm(a + b), na + bl_dual_norm(b) + 1e-9);
    EXPECT_LE(na, a.total_variation() + 1e-12);
    EXPECT_NEAR(flat_distance(a, b), flat_distance(b, a), 1e-12);
    // Duality: |mu[g]| <= ||g||_BL ||mu||*
    const AtomFunction f{g.vec(s->size(), -1.0, 1.0)};
    EXPECT_LE(std::abs(pair(a, f)), bl_norm(f, *s) * na + 1e-9);
  }
}

TEST(FlatDistance, Examples) {
  const auto s = line(4);
  const DiscreteMeasure mu(s, {0.1, 0.2, 0.3, 0.4});
  EXPECT_EQ(flat_distance(mu, mu), 0.0);
  const auto p = pair_space(2.0);
  EXPECT_NEAR(flat_distance(DiscreteMeasure::dirac(p, 0), DiscreteMeasure::dirac(p, 1)), 1.0, 1e-12);
  EXPECT_THROW(flat_distance(mu, DiscreteMeasure::zero(line(3))), DimensionError);
  EXPECT_THROW(flat_distance(mu, DiscreteMeasure::zero(line(4, 2.0))), DimensionError);
}

TEST(Measure, Arithmetic) {
  const auto s = line(3);
  DiscreteMeasure a(s, {1, -2, 3});
  EXPECT_EQ(a.total_mass(), 2.0);
  EXPECT_EQ(a.total_variation(), 6.0);
  EXPECT_EQ(a.min_weight(), -2.0);
  EXPECT_FALSE(a.is_nonnegative());
  const auto b = 2.0 * a - a;
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(b[i], a[i]);
  EXPECT_THROW(DiscreteMeasure(s, {1, 2}), DimensionError);
  EXPECT_THROW(DiscreteMeasure::dirac(s, 3), DimensionError);
}

TEST(Bullet, FunctionExamples) {
  const auto s = line(2);
  const DiscreteMeasure mu(s, {2, 3});
  const auto one = bullet(AtomFunction::constant(2, 1.0), mu);
  EXPECT_EQ(one[0], 2.0);
  EXPECT_EQ(one[1], 3.0);
  EXPECT_EQ(bullet(AtomFunction::constant(2, 0.0), mu).total_variation(), 0.0);
  const auto r = bullet(AtomFunction{{0.5, 1.0}}, mu);
  EXPECT_EQ(r[0], 1.0);
  EXPECT_EQ(r[1], 3.0);
  EXPECT_EQ(r.total_mass(), 4.0);
}

TEST(Bullet, KernelExamples) {
  const auto s = pair_space(1.0);
  const MutationKernel k(s, {{0.5, 0.5}, {0.0, 1.0}});
  const auto nu = bullet(k, DiscreteMeasure(s, {1, 0}));
  EXPECT_EQ(nu[0], 0.5);
  EXPECT_EQ(nu[1], 0.5);
  const DiscreteMeasure mu(s, {0.3, 0.9});
  const auto same = bullet(pure_selection_kernel(s), mu);
  EXPECT_EQ(same[0], 0.3);
  EXPECT_EQ(same[1], 0.9);
}

TEST(Bullet, PropertyKernelPreservesMass) {
  oracle::Gen g(15);
  for (int k = 0; k < 50; ++k) {
    const auto s = random_space(g, g.index(1, 10));
    const MutationKernel ker(s, g.stochastic(s->size()), true);
    const DiscreteMeasure mu(s, g.vec(s->size(), 0.0, 2.0));
    EXPECT_NEAR(bullet(ker, mu).total_mass(), mu.total_mass(), 1e-12);
  }
}

TEST(Bullet, PropertyNormProductBounds) {
  oracle::Gen g(16);
  for (int k = 0; k < 100; ++k) {
    const auto s = random_space(g, g.index(1, 8));
    const AtomFunction f{g.vec(s->size(), -2.0, 2.0)};
    const DiscreteMeasure mu(s, g.vec(s->size(), -1.0, 1.0));
    EXPECT_LE(bl_dual_norm(bullet(f, mu)), bl_norm(f, *s) * bl_dual_norm(mu) + 1e-9);

    const MutationKernel ker(s, g.stochastic(s->size()), true);
    const DiscreteMeasure pos(s, g.vec(s->size(), 0.0, 1.0));
    double sup_row = 0.0;
    for (std::size_t i = 0; i < s->size(); ++i) sup_row = std::max(sup_row, bl_dual_norm(ker.row_measure(i)));
    EXPECT_LE(bl_dual_norm(bullet(ker, pos)), sup_row * bl_dual_norm(pos) + 1e-9);
  }
}

TEST(Bullet, PropertyBilinear) {
  oracle::Gen g(17);
  for (int k = 0; k < 50; ++k) {
    const auto s = random_space(g, g.index(1, 8));
    const AtomFunction f{g.vec(s->size(), -2.0, 2.0)};
    const DiscreteMeasure a(s, g.vec(s->size(), -1.0, 1.0));
    const DiscreteMeasure b(s, g.vec(s->size(), -1.0, 1.0));
    const double c = g.uniform(-2.0, 2.0);
    const auto lhs = bullet(f, a + c * b);
    const auto rhs = bullet(f, a) + c * bullet(f, b);
    for (std::size_t i = 0; i < s->size(); ++i) EXPECT_NEAR(lhs[i], rhs[i], 1e-12);
    // (f . mu)[g] = mu[f g]
    const AtomFunction h{g.vec(s->size(), -1.0, 1.0)};
    AtomFunction fh{f.values};
    for (std::size_t i = 0; i < s->size(); ++i) fh.values[i] *= h[i];
    EXPECT_NEAR(pair(bullet(f, a), h), pair(a, fh), 1e-12);
  }
}
