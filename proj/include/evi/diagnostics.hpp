#pragma once

#include "evi/core.hpp"
#include "evi/kernels.hpp"

#include <Eigen/Core>

#include <algorithm>
#include <optional>
#include <vector>

namespace evi {

struct MetricsRecord {
  long iter = 0;
  double energy = 0.0;
  double grad_norm = 0.0;
  std::optional<double> mmd2;
  double wall_time_s = 0.0;
};

/// (x . y / 3 + 1)^3
template <typename D1, typename D2>
typename D1::Scalar polynomial_kernel(const Eigen::MatrixBase<D1>& x,
                                      const Eigen::MatrixBase<D2>& y) {
  using Scalar = typename D1::Scalar;
  Scalar dot(0);
  for (Index k = 0; k < x.size(); ++k) dot += x(k) * y(k);
  const Scalar b = dot / Scalar(3) + Scalar(1);
  return b * b * b;
}

namespace detail {

template <typename DA, typename DB>
typename DA::Scalar polynomial_kernel_sum(const Eigen::MatrixBase<DA>& a,
                                          const Eigen::MatrixBase<DB>& b) {
  using Scalar = typename DA::Scalar;
  std::vector<Scalar> row(static_cast<std::size_t>(b.rows()));
  std::vector<Scalar> totals(static_cast<std::size_t>(a.rows()));
  for (Index i = 0; i < a.rows(); ++i) {
    for (Index j = 0; j < b.rows(); ++j)
      row[static_cast<std::size_t>(j)] = polynomial_kernel(a.row(i), b.row(j));
    totals[static_cast<std::size_t>(i)] = pairwise_sum(row.data(), b.rows());
  }
  return pairwise_sum(totals.data(), a.rows());
}

// Strict lexicographic order on (rows, values) used to fix argument order.
template <typename DA, typename DB>
bool precedes(const Eigen::MatrixBase<DA>& a, const Eigen::MatrixBase<DB>& b) {
  if (a.rows() != b.rows()) return a.rows() < b.rows();
  for (Index i = 0; i < a.rows(); ++i)
    for (Index k = 0; k < a.cols(); ++k)
      if (a(i, k) != b(i, k)) return a(i, k) < b(i, k);
  return false;
}

}  // namespace detail

/// Biased (V-statistic) squared MMD with the cubic polynomial kernel.
///
/// Arguments are put in a canonical order before summation, so the result is
/// bitwise symmetric and mmd2(X, X) is exactly zero.
template <typename DX, typename DY>
typename DX::Scalar mmd2(const Eigen::MatrixBase<DX>& xs, const Eigen::MatrixBase<DY>& ys) {
  using Scalar = typename DX::Scalar;
  if (xs.rows() == 0 || ys.rows() == 0)
    throw Error(ErrorCode::EmptyInput, "mmd2 needs non-empty sample sets");
  if (xs.cols() != ys.cols())
    throw Error(ErrorCode::DimensionMismatch, "mmd2: sample sets differ in dimension");
  if (detail::precedes(ys, xs)) return mmd2(ys, xs);

  const Scalar n = Scalar(xs.rows());
  const Scalar m = Scalar(ys.rows());
  const Scalar txx = detail::polynomial_kernel_sum(xs, xs) / (n * n);
  const Scalar tyy = detail::polynomial_kernel_sum(ys, ys) / (m * m);
  const Scalar txy = detail::polynomial_kernel_sum(xs, ys) / (n * m);
  return txx + tyy - Scalar(2) * txy;
}

/// Kernel density estimate 1/N sum_j K_h(query, x_j) with the unnormalized
/// Gaussian kernel of kernels.hpp. Its total mass is (h / 2)^(d/2), not one.
template <typename DP, typename DQ>
typename DP::Scalar kde_density(const Eigen::MatrixBase<DP>& particles,
                                typename DP::Scalar h, const Eigen::MatrixBase<DQ>& query) {
  using Scalar = typename DP::Scalar;
  detail::check_bandwidth(h);
  if (particles.rows() == 0) throw Error(ErrorCode::EmptyInput, "kde of an empty particle set");
  Scalar s(0);
  for (Index j = 0; j < particles.rows(); ++j) s += gaussian_kernel(query, particles.row(j), h);
  return s / Scalar(particles.rows());
}

template <typename Scalar>
struct Moments {
  Vector<Scalar> mean;
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> cov;
};

/// Sample mean and unbiased (N - 1) covariance.
template <typename Derived>
Moments<typename Derived::Scalar> particle_moments(const Eigen::MatrixBase<Derived>& particles) {
  using Scalar = typename Derived::Scalar;
  const Index n = particles.rows();
  if (n < 2)
    throw Error(ErrorCode::InsufficientParticles, "covariance needs at least 2 particles");
  Moments<Scalar> m;
  m.mean = particles.colwise().mean().transpose();
  const auto centered = (particles.rowwise() - m.mean.transpose()).eval();
  m.cov = (centered.transpose() * centered) / Scalar(n - 1);
  return m;
}

struct GridSpec {
  Eigen::Vector2d lower;
  Eigen::Vector2d upper;
  int nx = 201;
  int ny = 201;
};

/// 201 x 201 grid over the particle bounding box padded by 3h.
GridSpec default_mode_grid(const ParticleSet& particles, double h);

/// Interior grid points whose KDE value strictly exceeds all 8 neighbours,
/// sorted by density, highest first. Two-dimensional particles only.
std::vector<Eigen::Vector2d> find_modes(const ParticleSet& particles, double h,
                                        const GridSpec& grid);

}  // namespace evi
