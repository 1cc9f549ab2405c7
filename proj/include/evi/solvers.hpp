#pragma once

// Particle integrators.
//
// EviIm advances the particles by one implicit Euler step of the Blob ODE,
// i.e. one proximal point step on F_h, solving min J_n by Barzilai-Borwein
// gradient descent with backtracking. The explicit schemes (Blob, SVGD, GFSF,
// GFSD) take AdaGrad-scaled steps along their velocity fields; Lmc is the
// unadjusted Langevin baseline.

#include "evi/core.hpp"
#include "evi/diagnostics.hpp"
#include "evi/energy.hpp"
#include "evi/kernels.hpp"
#include "evi/targets.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace evi {

enum class Scheme { EviIm, Blob, Svgd, Gfsf, Gfsd, Lmc };

std::string_view to_string(Scheme scheme);
std::optional<Scheme> parse_scheme(std::string_view name);

/// Step size eps_n = a (b + n)^(-c).
struct LmcSchedule {
  double a = 0.1;
  double b = 1.0;
  double c = 0.55;

  double step(long n) const;
};

struct SolverConfig {
  Scheme scheme = Scheme::EviIm;
  double tau = 0.01;
  double lr = 0.1;
  int inner_max_iter = 100;
  double inner_tol = 1e-8;
  long outer_iters = 100;
  LmcSchedule lmc_schedule;
  /// Uses x - eps grad(ln rho*) + noise literally, which drifts away from the
  /// target. Off by default.
  bool lmc_printed_sign = false;
  /// Ridge added to the GFSF kernel system; unset means 1e-8 times the kernel peak.
  std::optional<double> gfsf_ridge;
  /// Explicit schemes: AdaGrad scaling when true, plain x + lr * v otherwise.
  bool adagrad = true;
  std::uint64_t seed = 0;

  void validate() const;
};

struct RunState {
  ParticleSet particles;
  long iter = 0;
  ParticleSet adagrad_sum_sq;  // running sum of squared velocities
  Rng rng;

  RunState() = default;
  RunState(ParticleSet init, std::uint64_t seed);
};

/// Velocity field of an explicit scheme at the current particles.
///
/// Blob:  -( sum_j grad_1 K_ij / S_i + sum_k grad_2 K_ki / S_k + grad V_i )
/// SVGD:  -sum_j ( K_ij grad V_j + grad_1 K_ij )
/// GFSF:  solve (K + ridge I) v = -sum_j ( K_ij grad V_j + grad_1 K_ij )
/// GFSD:  -( sum_j grad_1 K_ij / S_i + grad V_i )
///
/// None of them carries a 1/N prefactor. With a stochastic target and a
/// non-null `rng`, grad V is the minibatch estimate.
ParticleSet parvi_velocity(Scheme scheme, const ParticleSet& particles, double h,
                           const TargetModel& target, std::optional<double> gfsf_ridge = {},
                           Rng* rng = nullptr);

ParticleSet parvi_velocity(Scheme scheme, const ParticleSet& particles,
                           const KernelConfig& kernel, const TargetModel& target);

/// grad V at every particle (minibatch estimates drawn in row order when `rng` is set).
ParticleSet potential_gradients(const TargetModel& target, const ParticleSet& particles,
                                Rng* rng = nullptr);

/// x <- x + lr g / (sqrt(G) + 1e-8) per coordinate, G the running sum of g^2.
RunState explicit_step(RunState state, const SolverConfig& config, const KernelConfig& kernel,
                       const TargetModel& target);

/// x <- x - eps_n grad V + sqrt(2 eps_n) xi.
RunState lmc_step(RunState state, const SolverConfig& config, const TargetModel& target);

struct InnerReport {
  int iterations = 0;
  double grad_norm = 0.0;      // |grad J_n| at the returned particles
  bool converged = false;      // grad_norm <= inner_tol
  bool stalled = false;        // stopped because no resolvable decrease remained
  double bandwidth = 0.0;
  double energy_before = 0.0;  // F_h(x^n)
  double energy_after = 0.0;   // F_h(x^{n+1})
  double objective = 0.0;      // J_n(x^{n+1})
  double mean_sq_displacement = 0.0;  // 1/N sum |x^{n+1} - x^n|^2
  /// F(new) - F(old) <= -1/(2 tau N) sum |dx|^2 + 1e-10 (1 + |F(old)|)
  bool decrease_inequality = false;
};

struct EviImStep {
  RunState state;
  InnerReport report;
};

/// One outer iteration of the implicit Euler scheme. The bandwidth is resolved
/// at x^n and frozen for the inner solve.
EviImStep evi_im_step(RunState state, const SolverConfig& config, const KernelConfig& kernel,
                      const TargetModel& target);

struct Snapshot {
  long iter = 0;
  ParticleSet particles;
};

struct DiagnosticsSpec {
  /// Reference sample for MMD^2; no MMD column when empty.
  std::optional<ParticleSet> mmd_reference;
  /// Snapshot period in outer iterations; 0 keeps only the first and last.
  long snapshot_every = 0;
  /// When false, wall_time_s is reported as zero so that repeated runs are
  /// byte-identical.
  bool record_wall_time = true;
};

struct RunResult {
  std::vector<Snapshot> snapshots;
  std::vector<MetricsRecord> metrics;  // iteration 0 plus one row per outer iteration
  std::vector<InnerReport> inner_reports;  // EviIm only
  RunState final_state;
};

/// Metric row for the given particles: F_h and |grad F_h| at the current
/// bandwidth, plus MMD^2 when a reference is configured.
MetricsRecord measure(long iter, const ParticleSet& particles, const KernelConfig& kernel,
                      const TargetModel& target, const DiagnosticsSpec& diagnostics);

RunResult run(const TargetModel& target, const ParticleSet& init, const SolverConfig& config,
              const KernelConfig& kernel, const DiagnosticsSpec& diagnostics = {});

}  // namespace evi
