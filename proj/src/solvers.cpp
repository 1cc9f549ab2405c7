#include "evi/solvers.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <sstream>

namespace evi {

std::string_view to_string(Scheme scheme) {
  switch (scheme) {
    case Scheme::EviIm: return "evi_im";
    case Scheme::Blob: return "blob";
    case Scheme::Svgd: return "svgd";
    case Scheme::Gfsf: return "gfsf";
    case Scheme::Gfsd: return "gfsd";
    case Scheme::Lmc: return "lmc";
  }
  return "unknown";
}

std::optional<Scheme> parse_scheme(std::string_view name) {
  for (Scheme s : {Scheme::EviIm, Scheme::Blob, Scheme::Svgd, Scheme::Gfsf, Scheme::Gfsd,
                   Scheme::Lmc})
    if (to_string(s) == name) return s;
  return std::nullopt;
}

double LmcSchedule::step(long n) const { return a * std::pow(b + static_cast<double>(n), -c); }

void SolverConfig::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v))
      throw Error(ErrorCode::Config, std::string(name) + " must be positive");
  };
  positive(tau, "tau");
  positive(lr, "lr");
  positive(inner_tol, "inner_tol");
  positive(lmc_schedule.a, "lmc_a");
  positive(lmc_schedule.b, "lmc_b");
  positive(lmc_schedule.c, "lmc_c");
  if (inner_max_iter < 1) throw Error(ErrorCode::Config, "inner_max_iter must be positive");
  if (outer_iters < 0) throw Error(ErrorCode::Config, "outer_iters must be >= 0");
  if (gfsf_ridge && !(*gfsf_ridge >= 0.0))
    throw Error(ErrorCode::Config, "gfsf_ridge must be nonnegative");
}

RunState::RunState(ParticleSet init, std::uint64_t seed)
    : particles(std::move(init)),
      adagrad_sum_sq(ParticleSet::Zero(particles.rows(), particles.cols())),
      rng(seed) {}

namespace {

void check_finite(const ParticleSet& m, const char* what) {
  for (Index i = 0; i < m.rows(); ++i)
    if (!m.row(i).allFinite()) {
      std::ostringstream msg;
      msg << what << " is not finite at particle " << i;
      throw Error(ErrorCode::Divergence, msg.str());
    }
}

// Rows of sum_j grad_1 K(x_i, x_j) / S_i.
ParticleSet smoothed_score(const ParticleSet& x, double h, const KernelMatrix<double>& km) {
  const Index n = x.rows();
  const double c = -2.0 / (h * h);
  ParticleSet out(n, x.cols());
  for (Index i = 0; i < n; ++i) {
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(x.cols());
    for (Index j = 0; j < n; ++j) acc.noalias() += (c * km.values(i, j)) * (x.row(i) - x.row(j));
    out.row(i) = acc / km.row_sums(i);
  }
  return out;
}

// Rows of sum_j grad_1 K(x_i, x_j), unnormalized.
ParticleSet kernel_gradient_sum(const ParticleSet& x, double h, const KernelMatrix<double>& km) {
  const Index n = x.rows();
  const double c = -2.0 / (h * h);
  ParticleSet out(n, x.cols());
  for (Index i = 0; i < n; ++i) {
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(x.cols());
    for (Index j = 0; j < n; ++j) acc.noalias() += (c * km.values(i, j)) * (x.row(i) - x.row(j));
    out.row(i) = acc;
  }
  return out;
}

ParticleSet blob_velocity(const ParticleSet& x, double h, const KernelMatrix<double>& km,
                          const ParticleSet& grad_v) {
  const Index n = x.rows();
  const double c = -2.0 / (h * h);
  const ParticleSet own = smoothed_score(x, h, km);
  ParticleSet v(n, x.cols());
  for (Index i = 0; i < n; ++i) {
    // grad_{x_i} K(x_k, x_i) = -2/h^2 (x_i - x_k) K_ki
    Eigen::RowVectorXd others = Eigen::RowVectorXd::Zero(x.cols());
    for (Index k = 0; k < n; ++k)
      others.noalias() += (c * km.values(k, i) / km.row_sums(k)) * (x.row(i) - x.row(k));
    v.row(i) = -(own.row(i) + others + grad_v.row(i));
  }
  return v;
}

ParticleSet svgd_direction(const ParticleSet& x, double h, const KernelMatrix<double>& km,
                           const ParticleSet& grad_v) {
  const Index n = x.rows();
  const double c = -2.0 / (h * h);
  ParticleSet out(n, x.cols());
  for (Index i = 0; i < n; ++i) {
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(x.cols());
    for (Index j = 0; j < n; ++j)
      acc.noalias() += km.values(i, j) * grad_v.row(j) + (c * km.values(i, j)) * (x.row(i) - x.row(j));
    out.row(i) = acc;
  }
  return out;
}

// (K + r I) v = -(K G + B) with B_i = sum_j grad_1 K_ij. Rewritten as
// v = -G - (K + r I)^{-1} (B - r G), which is the same system but keeps the
// drift term exact. Without an explicit ridge the unregularized system is
// tried first and the default ridge is used only if it is ill-posed.
ParticleSet gfsf_velocity(const ParticleSet& x, double h, const KernelMatrix<double>& km,
                          const ParticleSet& grad_v, std::optional<double> ridge) {
  const Index n = x.rows();
  const ParticleSet b = kernel_gradient_sum(x, h, km);
  const ParticleSet rhs = km.values * grad_v + b;
  const double rhs_norm = rhs.norm();
  const double default_ridge = 1e-8 * kernel_peak(h, x.cols());

  std::vector<double> attempts;
  if (ridge) {
    attempts.push_back(*ridge);
  } else {
    attempts = {0.0, default_ridge};
  }

  double rcond = 0.0;
  double residual = std::numeric_limits<double>::infinity();
  for (double r : attempts) {
    const Eigen::MatrixXd a =
        Eigen::MatrixXd(km.values) + r * Eigen::MatrixXd::Identity(n, n);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(a);
    if (ldlt.info() != Eigen::Success) continue;
    rcond = ldlt.rcond();
    const Eigen::MatrixXd y = ldlt.solve(Eigen::MatrixXd(b - r * grad_v));
    ParticleSet v = -grad_v - y;
    residual = (a * v + rhs).norm();
    if (v.allFinite() && residual <= 1e-8 * rhs_norm) return v;
  }
  std::ostringstream msg;
  msg << "GFSF kernel system is singular (reciprocal condition estimate " << rcond
      << ", residual " << residual << " vs |rhs| " << rhs_norm << ")";
  throw Error(ErrorCode::SingularSystem, msg.str());
}

}  // namespace

ParticleSet potential_gradients(const TargetModel& target, const ParticleSet& particles,
                                Rng* rng) {
  if (rng && target.stochastic()) {
    ParticleSet g(particles.rows(), particles.cols());
    for (Index i = 0; i < particles.rows(); ++i)
      g.row(i) = target.sample_gradient(particles.row(i).transpose(), *rng).transpose();
    return g;
  }
  ParticleSet g;
  evaluate_potentials(target, particles, &g);
  return g;
}

ParticleSet parvi_velocity(Scheme scheme, const ParticleSet& particles, double h,
                           const TargetModel& target, std::optional<double> gfsf_ridge,
                           Rng* rng) {
  if (particles.rows() == 0) throw Error(ErrorCode::EmptyInput, "empty particle set");
  if (particles.cols() != target.dim())
    throw Error(ErrorCode::DimensionMismatch, "particle dimension does not match target");
  const ParticleSet grad_v = potential_gradients(target, particles, rng);
  const auto km = kernel_matrix(particles, h);
  switch (scheme) {
    case Scheme::Blob: return blob_velocity(particles, h, km, grad_v);
    case Scheme::Svgd: return -svgd_direction(particles, h, km, grad_v);
    case Scheme::Gfsf: return gfsf_velocity(particles, h, km, grad_v, gfsf_ridge);
    case Scheme::Gfsd: return -(smoothed_score(particles, h, km) + grad_v);
    case Scheme::EviIm:
    case Scheme::Lmc: break;
  }
  throw Error(ErrorCode::InvalidArgument,
              "parvi_velocity: no velocity field for scheme " + std::string(to_string(scheme)));
}

ParticleSet parvi_velocity(Scheme scheme, const ParticleSet& particles,
                           const KernelConfig& kernel, const TargetModel& target) {
  return parvi_velocity(scheme, particles, resolve_bandwidth(kernel, particles), target);
}

RunState explicit_step(RunState state, const SolverConfig& config, const KernelConfig& kernel,
                       const TargetModel& target) {
  constexpr double kStab = 1e-8;
  const double h = resolve_bandwidth(kernel, state.particles);
  const ParticleSet v =
      parvi_velocity(config.scheme, state.particles, h, target, config.gfsf_ridge, &state.rng);
  check_finite(v, "velocity");
  if (config.adagrad) {
    if (state.adagrad_sum_sq.rows() != v.rows() || state.adagrad_sum_sq.cols() != v.cols())
      state.adagrad_sum_sq = ParticleSet::Zero(v.rows(), v.cols());
    state.adagrad_sum_sq.array() += v.array().square();
    state.particles.array() +=
        config.lr * v.array() / (state.adagrad_sum_sq.array().sqrt() + kStab);
  } else {
    state.particles += config.lr * v;
  }
  ++state.iter;
  return state;
}

RunState lmc_step(RunState state, const SolverConfig& config, const TargetModel& target) {
  const double eps = config.lmc_schedule.step(state.iter);
  const ParticleSet g = potential_gradients(target, state.particles, &state.rng);
  check_finite(g, "potential gradient");
  const double drift_sign = config.lmc_printed_sign ? 1.0 : -1.0;
  const double noise_scale = std::sqrt(2.0 * eps);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (Index i = 0; i < state.particles.rows(); ++i)
    for (Index k = 0; k < state.particles.cols(); ++k)
      state.particles(i, k) += drift_sign * eps * g(i, k) + noise_scale * normal(state.rng);
  ++state.iter;
  return state;
}

EviImStep evi_im_step(RunState state, const SolverConfig& config, const KernelConfig& kernel,
                      const TargetModel& target) {
  constexpr int kMaxHalvings = 50;
  constexpr double kMinStep = 1e-10;
  constexpr double kMaxStep = 1e3;
  // Predicted decreases below this fraction of |J| are lost in rounding.
  constexpr double kResolution = 1e-14;

  const double tau = config.tau;
  const ParticleSet prev = state.particles;
  const double h = resolve_bandwidth(kernel, prev);
  auto objective = [&](const ParticleSet& x) { return evaluate_proximal(x, prev, tau, h, target); };

  InnerReport report;
  report.bandwidth = h;
  ParticleSet x = prev;
  ProximalReport cur = objective(x);
  report.energy_before = cur.energy.value;

  double step = 1e-3 * tau;
  int k = 0;
  for (; k < config.inner_max_iter; ++k) {
    const double g2 = cur.grad.squaredNorm();
    if (std::sqrt(g2) <= config.inner_tol) break;

    double t = step;
    bool accepted = false;
    ParticleSet trial_x;
    ProximalReport trial;
    const double resolution = kResolution * (1.0 + std::abs(cur.value));
    for (int halving = 0; halving <= kMaxHalvings; ++halving) {
      trial_x = x - t * cur.grad;
      trial = objective(trial_x);
      if (std::isfinite(trial.value)) {
        if (trial.value < cur.value) {
          accepted = true;
          break;
        }
        // Below the rounding level of J the value difference carries no
        // information; the trapezoid estimate -t/2 (g + g_trial) . g does.
        if (trial.value - cur.value <= resolution &&
            (cur.grad + trial.grad).cwiseProduct(cur.grad).sum() > 0.0) {
          accepted = true;
          break;
        }
      }
      t *= 0.5;
    }
    if (!accepted) {
      if (t * g2 <= resolution) {
        report.stalled = true;
        break;
      }
      std::ostringstream msg;
      msg << "inner solver could not decrease J_n in " << kMaxHalvings
          << " halvings (outer iteration " << state.iter << ", |grad J| " << std::sqrt(g2) << ")";
      throw Error(ErrorCode::StalledInnerSolver, msg.str());
    }

    const ParticleSet s = trial_x - x;
    const ParticleSet y = trial.grad - cur.grad;
    x = std::move(trial_x);
    cur = std::move(trial);

    const double sy = s.cwiseProduct(y).sum();
    const double yy = y.squaredNorm();
    // BB1 step; keep the accepted step when curvature is not positive.
    step = (sy > 0.0 && yy > 0.0) ? std::clamp(sy / yy, kMinStep, kMaxStep)
                                  : std::clamp(t, kMinStep, kMaxStep);
  }

  const double n = static_cast<double>(prev.rows());
  report.iterations = k;
  report.grad_norm = cur.grad.norm();
  report.converged = report.grad_norm <= config.inner_tol;
  report.energy_after = cur.energy.value;
  report.objective = cur.value;
  report.mean_sq_displacement = (x - prev).squaredNorm() / n;
  report.decrease_inequality =
      report.energy_after - report.energy_before <=
      -report.mean_sq_displacement / (2.0 * tau) + 1e-10 * (1.0 + std::abs(report.energy_before));

  state.particles = std::move(x);
  ++state.iter;
  return {std::move(state), report};
}

MetricsRecord measure(long iter, const ParticleSet& particles, const KernelConfig& kernel,
                      const TargetModel& target, const DiagnosticsSpec& diagnostics) {
  const double h = resolve_bandwidth(kernel, particles);
  const EnergyReport e = evaluate_energy(particles, h, target);
  MetricsRecord rec;
  rec.iter = iter;
  rec.energy = e.value;
  rec.grad_norm = e.grad_norm;
  if (diagnostics.mmd_reference) rec.mmd2 = mmd2(particles, *diagnostics.mmd_reference);
  return rec;
}

RunResult run(const TargetModel& target, const ParticleSet& init, const SolverConfig& config,
              const KernelConfig& kernel, const DiagnosticsSpec& diagnostics) {
  config.validate();
  kernel.validate();
  if (init.rows() == 0) throw Error(ErrorCode::EmptyInput, "no initial particles");
  if (init.cols() != target.dim())
    throw Error(ErrorCode::DimensionMismatch,
                "initial particles have dimension " + std::to_string(init.cols()) +
                    ", target expects " + std::to_string(target.dim()));

  using Clock = std::chrono::steady_clock;
  const auto start = Clock::now();
  auto elapsed = [&] {
    return diagnostics.record_wall_time
               ? std::chrono::duration<double>(Clock::now() - start).count()
               : 0.0;
  };

  RunResult out;
  RunState state(init, config.seed);
  out.metrics.push_back(measure(0, state.particles, kernel, target, diagnostics));
  out.snapshots.push_back({0, state.particles});

  for (long n = 1; n <= config.outer_iters; ++n) {
    switch (config.scheme) {
      case Scheme::EviIm: {
        auto step = evi_im_step(std::move(state), config, kernel, target);
        state = std::move(step.state);
        out.inner_reports.push_back(step.report);
        break;
      }
      case Scheme::Lmc:
        state = lmc_step(std::move(state), config, target);
        break;
      default:
        state = explicit_step(std::move(state), config, kernel, target);
        break;
    }
    check_finite(state.particles, "particle position");
    const double wall = elapsed();
    MetricsRecord rec = measure(n, state.particles, kernel, target, diagnostics);
    rec.wall_time_s = wall;
    out.metrics.push_back(rec);
    const bool periodic = diagnostics.snapshot_every > 0 && n % diagnostics.snapshot_every == 0;
    if (periodic || n == config.outer_iters) out.snapshots.push_back({n, state.particles});
  }
  out.final_state = std::move(state);
  return out;
}

}  // namespace evi
