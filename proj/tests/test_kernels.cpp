#include "evi/kernels.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <Eigen/Geometry>

#include <algorithm>
#include <numeric>

namespace evi {
namespace {

using Eigen::Vector2d;
using Eigen::VectorXd;

VectorXd vec(std::initializer_list<double> v) {
  VectorXd out(static_cast<Index>(v.size()));
  std::copy(v.begin(), v.end(), out.data());
  return out;
}

TEST(GaussianKernel, ZeroDistanceIsPeak) {
  EXPECT_NEAR(gaussian_kernel(vec({0}), vec({0}), 1.0), 0.398942280401432678, 1e-15);
}

TEST(GaussianKernel, ClosedFormValues) {
  EXPECT_NEAR(gaussian_kernel(vec({0, 0}), vec({1, 0}), 0.5), 0.00583004893005638718, 1e-16);
  EXPECT_NEAR(gaussian_kernel(vec({-1}), vec({1}), 1.0), 0.00730688274528077617, 1e-16);
}

TEST(GaussianKernel, Errors) {
  try {
    gaussian_kernel(vec({0}), vec({0}), 0.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidBandwidth);
  }
  try {
    gaussian_kernel(vec({0}), vec({0, 1}), 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DimensionMismatch);
  }
  EXPECT_THROW(gaussian_kernel(vec({0}), vec({0}), -1.0), Error);
}

TEST(GaussianKernel, SymmetricAndBounded) {
  Rng rng(1);
  std::uniform_real_distribution<double> bw(0.05, 3.0);
  std::uniform_int_distribution<int> dims(1, 5);
  for (int trial = 0; trial < 200; ++trial) {
    const int d = dims(rng);
    const double h = bw(rng);
    const auto x = testing::random_particles(rng, 2, d);
    const double kxy = gaussian_kernel(x.row(0), x.row(1), h);
    EXPECT_EQ(kxy, gaussian_kernel(x.row(1), x.row(0), h));
    EXPECT_GE(kxy, 0.0);
    EXPECT_LT(kxy, kernel_peak(h, d));
    EXPECT_EQ(gaussian_kernel(x.row(0), x.row(0), h), kernel_peak(h, d));
  }
}

TEST(GaussianKernel, RotationInvariance) {
  Rng rng(2);
  std::uniform_real_distribution<double> angle(0.0, 6.28);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = testing::random_particles(rng, 2, 2);
    const Eigen::Matrix2d rot = Eigen::Rotation2Dd(angle(rng)).toRotationMatrix();
    const Vector2d a = x.row(0).transpose(), b = x.row(1).transpose();
    EXPECT_NEAR(gaussian_kernel(rot * a, rot * b, 0.7), gaussian_kernel(a, b, 0.7), 1e-14);
  }
}

TEST(GaussianKernelGrad, VanishesAtCoincidence) {
  const auto g = gaussian_kernel_grad(vec({0.3, -1.2, 2.0}), vec({0.3, -1.2, 2.0}), 0.4);
  EXPECT_EQ(g.norm(), 0.0);
}

TEST(GaussianKernelGrad, ClosedForm) {
  EXPECT_NEAR(gaussian_kernel_grad(vec({1}), vec({0}), 1.0)(0), -0.29352532634747980, 1e-15);
}

TEST(GaussianKernelGrad, Antisymmetric) {
  Rng rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = testing::random_particles(rng, 2, 3);
    const VectorXd g12 = gaussian_kernel_grad(x.row(0), x.row(1), 0.9);
    const VectorXd g21 = gaussian_kernel_grad(x.row(1), x.row(0), 0.9);
    EXPECT_LT((g12 + g21).norm(), 1e-15);
  }
}

TEST(GaussianKernelGrad, MatchesFiniteDifferences) {
  Rng rng(4);
  std::uniform_real_distribution<double> bw(0.3, 3.0);
  std::uniform_int_distribution<int> dims(1, 5);
  for (int trial = 0; trial < 100; ++trial) {
    const int d = dims(rng);
    const double h = bw(rng);
    const auto pair = testing::random_particles(rng, 2, d, 0.5 * h);
    const VectorXd x1 = pair.row(0).transpose(), x2 = pair.row(1).transpose();
    const VectorXd fd = testing::fd_gradient(
        [&](const VectorXd& y) { return gaussian_kernel(y, x2, h); }, x1, 1e-6);
    EXPECT_LE(testing::relative_error(gaussian_kernel_grad(x1, x2, h), fd), 1e-6)
        << "trial " << trial;
  }
}

TEST(KernelMatrix, SingleParticle) {
  ParticleSet x(1, 3);
  x << 0.1, 0.2, 0.3;
  const auto km = kernel_matrix(x, 0.8);
  ASSERT_EQ(km.values.rows(), 1);
  EXPECT_EQ(km.values(0, 0), kernel_peak(0.8, 3));
  EXPECT_EQ(km.row_sums(0), kernel_peak(0.8, 3));
}

TEST(KernelMatrix, TwoParticles) {
  ParticleSet x(2, 1);
  x << -1, 1;
  const auto km = kernel_matrix(x, 1.0);
  EXPECT_NEAR(km.values(0, 0), 0.398942280401432678, 1e-15);
  EXPECT_NEAR(km.values(0, 1), 0.00730688274528077617, 1e-16);
  EXPECT_EQ(km.values(0, 1), km.values(1, 0));
}

TEST(KernelMatrix, Invariants) {
  Rng rng(5);
  for (Index n : {2, 7, 40, 300}) {
    const auto x = testing::random_particles(rng, n, 3);
    const double h = 0.6;
    const auto km = kernel_matrix(x, h);
    EXPECT_TRUE(km.values == km.values.transpose());
    EXPECT_GT(km.values.minCoeff(), 0.0);
    EXPECT_LE(km.values.maxCoeff(), kernel_peak(h, 3));
    for (Index i = 0; i < n; ++i) {
      EXPECT_EQ(km.values(i, i), kernel_peak(h, 3));
      EXPECT_NEAR(km.row_sums(i), km.values.row(i).sum(), 1e-12 * km.row_sums(i));
    }
  }
}

TEST(KernelMatrix, EmptyInput) {
  try {
    kernel_matrix(ParticleSet(0, 2), 1.0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyInput);
  }
}

TEST(MedianBandwidth, HandEnumeratedValues) {
  ParticleSet three(3, 1);
  three << 0, 1, 2;
  EXPECT_NEAR(median_bandwidth(three), 0.910239226626837394, 1e-15);
  ParticleSet two(2, 1);
  two << 0, 2;
  EXPECT_NEAR(median_bandwidth(two), 5.77078016355585363, 1e-14);
}

TEST(MedianBandwidth, EvenCountAveragesCentralPair) {
  // distances {1, 3, 4, 2, 3, 1}: sorted 1 1 2 3 3 4, median 2.5
  ParticleSet x(4, 1);
  x << 0, 1, 4, 3;
  EXPECT_NEAR(median_bandwidth(x), 2.5 * 2.5 / std::log(4.0), 1e-14);
}

TEST(MedianBandwidth, Errors) {
  try {
    median_bandwidth(ParticleSet::Zero(1, 2));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientParticles);
  }
  try {
    median_bandwidth(ParticleSet::Constant(5, 2, 1.5));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::DegenerateConfiguration);
  }
}

TEST(MedianBandwidth, PermutationInvariant) {
  Rng rng(6);
  for (int trial = 0; trial < 20; ++trial) {
    const auto x = testing::random_particles(rng, 12, 2);
    std::vector<int> perm(12);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    ParticleSet y(12, 2);
    for (int i = 0; i < 12; ++i) y.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
    EXPECT_EQ(median_bandwidth(x), median_bandwidth(y));
  }
}

TEST(ResolveBandwidth, PolicyAndFloor) {
  const ParticleSet coincident = ParticleSet::Zero(4, 2);
  EXPECT_EQ(resolve_bandwidth(KernelConfig::fixed(0.3, 2), coincident), 0.3);
  EXPECT_THROW(resolve_bandwidth(KernelConfig::median(2), coincident), Error);
  EXPECT_EQ(resolve_bandwidth(KernelConfig::median(2, 1e-3), coincident), 1e-3);
  EXPECT_THROW(KernelConfig::fixed(0.0, 2), Error);
  EXPECT_THROW(KernelConfig::fixed(1.0, 0), Error);
}

TEST(KernelTemplates, LongDoubleInstantiation) {
  Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> x(2, 1);
  x << -1, 1;
  const auto km = kernel_matrix(x, 1.0L);
  EXPECT_NEAR(static_cast<double>(km.values(0, 1)), 0.00730688274528077617, 1e-17);
}

}  // namespace
}  // namespace evi
