#pragma once

// Regularized discrete KL energy
//
//   F_h(X) = 1/N sum_i [ ln(1/N sum_j K_h(x_i, x_j)) + V(x_i) ]
//
// its particle gradient, and the proximal objective
//
//   J_n(X) = 1/(2 tau N) sum_i |x_i - x_i^n|^2 + F_h(X)
//
// minimized by each implicit Euler step. Every function here takes a resolved
// bandwidth h; overloads taking a KernelConfig resolve it from the particles
// first. Median-rule bandwidths are never differentiated.

#include "evi/core.hpp"
#include "evi/kernels.hpp"
#include "evi/targets.hpp"

namespace evi {

struct EnergyReport {
  double value = 0.0;
  ParticleSet grad;  // row i is dF_h/dx_i
  double grad_norm = 0.0;
};

/// V(x_i) per row, and optionally grad V(x_i) into `grads`.
Eigen::VectorXd evaluate_potentials(const TargetModel& target, const ParticleSet& particles,
                                    ParticleSet* grads = nullptr);

double discrete_energy(const ParticleSet& particles, double h, const TargetModel& target);
double discrete_energy(const ParticleSet& particles, const KernelConfig& kernel,
                       const TargetModel& target);

ParticleSet discrete_energy_grad(const ParticleSet& particles, double h, const TargetModel& target);
ParticleSet discrete_energy_grad(const ParticleSet& particles, const KernelConfig& kernel,
                                 const TargetModel& target);

/// Value and gradient from a single kernel matrix evaluation.
EnergyReport evaluate_energy(const ParticleSet& particles, double h, const TargetModel& target);

double proximal_objective(const ParticleSet& particles, const ParticleSet& prev, double tau,
                          double h, const TargetModel& target);
double proximal_objective(const ParticleSet& particles, const ParticleSet& prev, double tau,
                          const KernelConfig& kernel, const TargetModel& target);

ParticleSet proximal_objective_grad(const ParticleSet& particles, const ParticleSet& prev,
                                    double tau, double h, const TargetModel& target);
ParticleSet proximal_objective_grad(const ParticleSet& particles, const ParticleSet& prev,
                                    double tau, const KernelConfig& kernel,
                                    const TargetModel& target);

/// J_n and its gradient; `energy` carries the F_h part.
struct ProximalReport {
  double value = 0.0;
  ParticleSet grad;
  EnergyReport energy;
};

ProximalReport evaluate_proximal(const ParticleSet& particles, const ParticleSet& prev, double tau,
                                 double h, const TargetModel& target);

}  // namespace evi
