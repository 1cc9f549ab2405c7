#include "evi/diagnostics.hpp"

#include <algorithm>
#include <utility>

namespace evi {

GridSpec default_mode_grid(const ParticleSet& particles, double h) {
  detail::check_bandwidth(h);
  if (particles.rows() == 0) throw Error(ErrorCode::EmptyInput, "no particles to grid");
  if (particles.cols() != 2)
    throw Error(ErrorCode::DimensionMismatch, "mode grid is two-dimensional");
  const Eigen::Vector2d pad = Eigen::Vector2d::Constant(3.0 * h);
  return {particles.colwise().minCoeff().transpose() - pad,
          particles.colwise().maxCoeff().transpose() + pad, 201, 201};
}

std::vector<Eigen::Vector2d> find_modes(const ParticleSet& particles, double h,
                                        const GridSpec& grid) {
  if (particles.cols() != 2)
    throw Error(ErrorCode::DimensionMismatch, "find_modes supports 2-d particles only");
  if (grid.nx < 3 || grid.ny < 3 || !(grid.upper(0) > grid.lower(0)) ||
      !(grid.upper(1) > grid.lower(1)))
    throw Error(ErrorCode::InvalidGrid, "mode grid needs at least 3x3 nodes and positive extent");

  const double dx = (grid.upper(0) - grid.lower(0)) / (grid.nx - 1);
  const double dy = (grid.upper(1) - grid.lower(1)) / (grid.ny - 1);
  auto node = [&](int a, int b) {
    return Eigen::Vector2d(grid.lower(0) + a * dx, grid.lower(1) + b * dy);
  };

  Eigen::MatrixXd density(grid.nx, grid.ny);
#pragma omp parallel for schedule(static) num_threads(thread_count())
  for (int a = 0; a < grid.nx; ++a)
    for (int b = 0; b < grid.ny; ++b) density(a, b) = kde_density(particles, h, node(a, b));

  std::vector<std::pair<double, Eigen::Vector2d>> peaks;
  for (int a = 1; a + 1 < grid.nx; ++a)
    for (int b = 1; b + 1 < grid.ny; ++b) {
      const double v = density(a, b);
      bool is_max = true;
      for (int da = -1; da <= 1 && is_max; ++da)
        for (int db = -1; db <= 1; ++db)
          if ((da != 0 || db != 0) && !(v > density(a + da, b + db))) {
            is_max = false;
            break;
          }
      if (is_max) peaks.emplace_back(v, node(a, b));
    }

  std::stable_sort(peaks.begin(), peaks.end(),
                   [](const auto& l, const auto& r) { return l.first > r.first; });
  std::vector<Eigen::Vector2d> modes;
  modes.reserve(peaks.size());
  for (auto& p : peaks) modes.push_back(p.second);
  return modes;
}

}  // namespace evi
