#include "evi/diagnostics.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <numeric>

namespace evi {
namespace {

using Eigen::Vector2d;

TEST(Mmd2, HandValue) {
  ParticleSet x(1, 1), y(1, 1);
  x << 0.0;
  y << 1.0;
  EXPECT_NEAR(mmd2(x, y), 1.37037037037037037, 1e-15);
}

TEST(Mmd2, IdenticalSetsGiveExactZero) {
  Rng rng(1);
  const auto x = testing::random_particles(rng, 40, 3);
  EXPECT_EQ(mmd2(x, x), 0.0);
}

TEST(Mmd2, ExactlySymmetric) {
  Rng rng(2);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = testing::random_particles(rng, 15, 2);
    const auto y = testing::random_particles(rng, 23, 2, 1.5);
    EXPECT_EQ(mmd2(x, y), mmd2(y, x));
  }
}

TEST(Mmd2, MatchesNaiveOracleAndIsNonNegative) {
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = testing::random_particles(rng, 30, 2);
    const auto y = testing::random_particles(rng, 45, 2, 0.8);
    const double value = mmd2(x, y);
    EXPECT_NEAR(value, testing::naive_mmd2(x, y), 1e-12);
    EXPECT_GE(value, 0.0);
  }
}

TEST(Mmd2, Errors) {
  EXPECT_THROW(mmd2(ParticleSet(0, 2), ParticleSet::Zero(3, 2)), Error);
  try {
    mmd2(ParticleSet::Zero(2, 2), ParticleSet::Zero(3, 3));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
}

TEST(KdeDensity, SingleParticleAtQuery) {
  ParticleSet x(1, 1);
  x << 0.0;
  EXPECT_NEAR(kde_density(x, 1.0, Eigen::VectorXd::Zero(1)), 0.398942280401432678, 1e-15);
}

TEST(KdeDensity, SymmetricAboutSymmetricPair) {
  ParticleSet x(2, 2);
  x << -1, 0, 1, 0;
  EXPECT_EQ(kde_density(x, 0.7, Vector2d(0.3, 0.2)), kde_density(x, 0.7, Vector2d(-0.3, 0.2)));
}

TEST(KdeDensity, FarFieldVanishes) {
  ParticleSet x(3, 2);
  x << 0, 0, 0.5, 0.1, -0.2, 0.3;
  EXPECT_LE(kde_density(x, 0.5, Vector2d(20, 20)), 1e-80);
}

TEST(KdeDensity, TotalMassInOneDimension) {
  ParticleSet x(3, 1);
  x << -0.5, 0.2, 1.0;
  const double h = 0.6;
  const double lo = -8.0, hi = 8.0;
  const int steps = 16000;
  const double dx = (hi - lo) / steps;
  double integral = 0.0;
  for (int i = 0; i <= steps; ++i) {
    const double w = (i == 0 || i == steps) ? 0.5 : 1.0;
    integral += w * kde_density(x, h, Eigen::VectorXd::Constant(1, lo + i * dx));
  }
  EXPECT_NEAR(integral * dx, std::sqrt(h / 2.0), 1e-10);
}

TEST(KdeDensity, Errors) {
  EXPECT_THROW(kde_density(ParticleSet(0, 1), 1.0, Eigen::VectorXd::Zero(1)), Error);
  EXPECT_THROW(kde_density(ParticleSet::Zero(1, 1), 0.0, Eigen::VectorXd::Zero(1)), Error);
}

TEST(ParticleMoments, TwoPoints) {
  ParticleSet x(2, 1);
  x << -1, 1;
  const auto m = particle_moments(x);
  EXPECT_EQ(m.mean(0), 0.0);
  EXPECT_EQ(m.cov(0, 0), 2.0);
}

TEST(ParticleMoments, IdenticalParticles) {
  const auto m = particle_moments(ParticleSet::Constant(5, 2, 1.25));
  EXPECT_EQ(m.mean, Vector2d(1.25, 1.25));
  EXPECT_EQ(m.cov.norm(), 0.0);
}

TEST(ParticleMoments, PermutationInvariant) {
  Rng rng(4);
  const auto x = testing::random_particles(rng, 11, 3);
  const ParticleSet y = x.colwise().reverse();
  const auto a = particle_moments(x), b = particle_moments(y);
  EXPECT_LE((a.mean - b.mean).norm(), 1e-14);
  EXPECT_LE((a.cov - b.cov).norm(), 1e-14);
}

TEST(ParticleMoments, LargeGaussianSample) {
  Rng rng(5);
  const auto x = testing::random_particles(rng, 10000, 2);
  const auto m = particle_moments(x);
  EXPECT_LE(m.mean.cwiseAbs().maxCoeff(), 0.05);
  EXPECT_LE((m.cov - Eigen::Matrix2d::Identity()).cwiseAbs().maxCoeff(), 0.1);
}

TEST(ParticleMoments, NeedsTwoParticles) {
  try {
    particle_moments(ParticleSet::Zero(1, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientParticles);
  }
}

ParticleSet cluster(Rng& rng, Index n, const Vector2d& center, double scale) {
  ParticleSet x = testing::random_particles(rng, n, 2, scale);
  x.rowwise() += center.transpose();
  return x;
}

TEST(FindModes, SingleCluster) {
  Rng rng(6);
  const auto x = cluster(rng, 60, Vector2d(1.0, -0.5), 0.2);
  const auto modes = find_modes(x, 0.5, default_mode_grid(x, 0.5));
  ASSERT_EQ(modes.size(), 1u);
  EXPECT_LE((modes[0] - Vector2d(1.0, -0.5)).norm(), 0.15);
}

TEST(FindModes, TwoClustersSortedByDensity) {
  Rng rng(7);
  ParticleSet x(90, 2);
  x << cluster(rng, 60, Vector2d(2, 2), 0.2), cluster(rng, 30, Vector2d(-2, -1), 0.2);
  const auto modes = find_modes(x, 0.4, default_mode_grid(x, 0.4));
  ASSERT_EQ(modes.size(), 2u);
  EXPECT_LE((modes[0] - Vector2d(2, 2)).norm(), 0.15);
  EXPECT_LE((modes[1] - Vector2d(-2, -1)).norm(), 0.15);
}

TEST(FindModes, PermutationInvariant) {
  Rng rng(8);
  ParticleSet x(40, 2);
  x << cluster(rng, 20, Vector2d(1, 1), 0.3), cluster(rng, 20, Vector2d(-1, -1), 0.3);
  const ParticleSet y = x.colwise().reverse();
  const GridSpec grid{Vector2d(-3, -3), Vector2d(3, 3), 121, 121};
  const auto a = find_modes(x, 0.4, grid), b = find_modes(y, 0.4, grid);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_LE((a[i] - b[i]).norm(), 1e-12);
}

TEST(FindModes, InvalidGrid) {
  const ParticleSet x = ParticleSet::Zero(3, 2);
  try {
    find_modes(x, 1.0, {Vector2d(-1, -1), Vector2d(1, 1), 2, 50});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidGrid);
  }
  EXPECT_THROW(find_modes(x, 1.0, {Vector2d(1, -1), Vector2d(1, 1), 5, 5}), Error);
  EXPECT_THROW(find_modes(ParticleSet::Zero(3, 3), 1.0, {Vector2d(-1, -1), Vector2d(1, 1)}),
               Error);
}

}  // namespace
}  // namespace evi
