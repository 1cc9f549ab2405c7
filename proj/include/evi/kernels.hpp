#pragma once

// Gaussian kernel K_h(x1, x2) = (2*pi*h)^(-d/2) * exp(-|x1 - x2|^2 / h^2).
//
// Note the unusual parameterization: h appears linearly in the normalizer and
// squared in the exponent, so h is not a standard deviation and K_h does not
// integrate to one. The normalizer is kept anyway so that energies are
// comparable across runs.

#include "evi/core.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace evi {

struct FixedBandwidth {
  double h;
};

/// h = med^2 / ln N over the pairwise distances of the current particles.
struct MedianRule {};

struct KernelConfig {
  std::variant<FixedBandwidth, MedianRule> policy = MedianRule{};
  int dim = 1;
  /// Substituted for a degenerate median bandwidth when set; otherwise the
  /// degenerate case is an error.
  std::optional<double> degenerate_floor;

  static KernelConfig fixed(double h, int dim) {
    KernelConfig c{FixedBandwidth{h}, dim, std::nullopt};
    c.validate();
    return c;
  }
  static KernelConfig median(int dim, std::optional<double> floor = std::nullopt) {
    KernelConfig c{MedianRule{}, dim, floor};
    c.validate();
    return c;
  }

  bool is_median() const { return std::holds_alternative<MedianRule>(policy); }

  void validate() const {
    if (dim < 1) throw Error(ErrorCode::DimensionMismatch, "kernel dimension must be >= 1");
    if (auto* f = std::get_if<FixedBandwidth>(&policy); f && !(f->h > 0.0))
      throw Error(ErrorCode::InvalidBandwidth,
                  "bandwidth must be positive, got " + std::to_string(f->h));
    if (degenerate_floor && !(*degenerate_floor > 0.0))
      throw Error(ErrorCode::InvalidBandwidth, "bandwidth floor must be positive");
  }
};

template <typename Scalar>
struct KernelMatrix {
  ParticleMatrix<Scalar> values;
  Vector<Scalar> row_sums;
};

namespace detail {

template <typename Scalar>
void check_bandwidth(Scalar h) {
  if (!(h > Scalar(0)))
    throw Error(ErrorCode::InvalidBandwidth,
                "bandwidth must be positive, got " + std::to_string(static_cast<double>(h)));
}

template <typename D1, typename D2>
void check_same_size(const Eigen::MatrixBase<D1>& a, const Eigen::MatrixBase<D2>& b) {
  if (a.size() != b.size())
    throw Error(ErrorCode::DimensionMismatch, "kernel arguments differ in dimension: " +
                                                  std::to_string(a.size()) + " vs " +
                                                  std::to_string(b.size()));
}

/// Pairwise (cascade) summation; error grows as O(log n) rather than O(n).
template <typename Scalar>
Scalar pairwise_sum(const Scalar* data, Index n) {
  if (n <= 8) {
    Scalar s(0);
    for (Index i = 0; i < n; ++i) s += data[i];
    return s;
  }
  const Index half = n / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

template <typename D1, typename D2>
typename D1::Scalar squared_distance(const Eigen::MatrixBase<D1>& x1,
                                     const Eigen::MatrixBase<D2>& x2) {
  using Scalar = typename D1::Scalar;
  Scalar s(0);
  for (Index k = 0; k < x1.size(); ++k) {
    const Scalar diff = x1(k) - x2(k);
    s += diff * diff;
  }
  return s;
}

}  // namespace detail

/// Peak value of the kernel, attained at x1 == x2.
template <typename Scalar>
Scalar kernel_peak(Scalar h, Index dim) {
  using std::pow;
  return pow(Scalar(2) * std::numbers::pi_v<Scalar> * h, -Scalar(dim) / Scalar(2));
}

template <typename D1, typename D2>
typename D1::Scalar gaussian_kernel(const Eigen::MatrixBase<D1>& x1,
                                    const Eigen::MatrixBase<D2>& x2,
                                    typename D1::Scalar h) {
  using std::exp;
  detail::check_bandwidth(h);
  detail::check_same_size(x1, x2);
  return kernel_peak(h, x1.size()) * exp(-detail::squared_distance(x1, x2) / (h * h));
}

/// Gradient with respect to the first argument: -(2/h^2)(x1 - x2) K_h(x1, x2).
template <typename D1, typename D2>
Vector<typename D1::Scalar> gaussian_kernel_grad(const Eigen::MatrixBase<D1>& x1,
                                                 const Eigen::MatrixBase<D2>& x2,
                                                 typename D1::Scalar h) {
  using Scalar = typename D1::Scalar;
  const Scalar k = gaussian_kernel(x1, x2, h);
  Vector<Scalar> g(x1.size());
  for (Index i = 0; i < x1.size(); ++i) g(i) = -Scalar(2) / (h * h) * (x1(i) - x2(i)) * k;
  return g;
}

/// Each unordered pair is evaluated once and mirrored, so the result is
/// exactly symmetric.
template <typename Derived>
KernelMatrix<typename Derived::Scalar> kernel_matrix(const Eigen::MatrixBase<Derived>& particles,
                                                     typename Derived::Scalar h) {
  using Scalar = typename Derived::Scalar;
  detail::check_bandwidth(h);
  const Index n = particles.rows();
  if (n == 0) throw Error(ErrorCode::EmptyInput, "kernel_matrix: empty particle set");

  const Scalar peak = kernel_peak(h, particles.cols());
  const Scalar inv_h2 = Scalar(1) / (h * h);
  KernelMatrix<Scalar> km;
  km.values.resize(n, n);
  km.row_sums.resize(n);

#pragma omp parallel for schedule(dynamic, 8) num_threads(thread_count()) if (n >= 256)
  for (Index i = 0; i < n; ++i) {
    km.values(i, i) = peak;
    for (Index j = i + 1; j < n; ++j) {
      using std::exp;
      const Scalar v =
          peak * exp(-detail::squared_distance(particles.row(i), particles.row(j)) * inv_h2);
      km.values(i, j) = v;
      km.values(j, i) = v;
    }
  }
  for (Index i = 0; i < n; ++i)
    km.row_sums(i) = detail::pairwise_sum(km.values.row(i).data(), n);
  return km;
}

/// Median of the N(N-1)/2 pairwise Euclidean distances (mean of the two central
/// order statistics for an even count), squared and divided by ln N.
template <typename Derived>
typename Derived::Scalar median_bandwidth(const Eigen::MatrixBase<Derived>& particles) {
  using Scalar = typename Derived::Scalar;
  using std::log;
  using std::sqrt;
  const Index n = particles.rows();
  if (n < 2)
    throw Error(ErrorCode::InsufficientParticles,
                "median bandwidth needs at least 2 particles, got " + std::to_string(n));

  std::vector<Scalar> dist;
  dist.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      dist.push_back(sqrt(detail::squared_distance(particles.row(i), particles.row(j))));

  const std::size_t m = dist.size();
  const std::size_t mid = m / 2;
  std::nth_element(dist.begin(), dist.begin() + mid, dist.end());
  Scalar med = dist[mid];
  if (m % 2 == 0) {
    const Scalar lower = *std::max_element(dist.begin(), dist.begin() + mid);
    med = (lower + med) / Scalar(2);
  }
  if (!(med > Scalar(0)))
    throw Error(ErrorCode::DegenerateConfiguration,
                "median pairwise distance is zero; particles are coincident");
  return med * med / log(Scalar(n));
}

/// Bandwidth for the current particle positions under the configured policy.
template <typename Derived>
typename Derived::Scalar resolve_bandwidth(const KernelConfig& config,
                                           const Eigen::MatrixBase<Derived>& particles) {
  using Scalar = typename Derived::Scalar;
  if (auto* f = std::get_if<FixedBandwidth>(&config.policy)) return Scalar(f->h);
  try {
    return median_bandwidth(particles);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::DegenerateConfiguration && config.degenerate_floor)
      return Scalar(*config.degenerate_floor);
    throw;
  }
}

}  // namespace evi
