#include "evi/energy.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace evi {

namespace {

void check_particles(const ParticleSet& particles, const TargetModel& target) {
  if (particles.rows() == 0) throw Error(ErrorCode::EmptyInput, "empty particle set");
  if (particles.cols() != target.dim())
    throw Error(ErrorCode::DimensionMismatch,
                "particles have dimension " + std::to_string(particles.cols()) +
                    " but target '" + target.name() + "' has " + std::to_string(target.dim()));
}

void check_same_shape(const ParticleSet& a, const ParticleSet& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw Error(ErrorCode::DimensionMismatch, "particle sets differ in shape");
}

double energy_value(const KernelMatrix<double>& km, const Eigen::VectorXd& potentials) {
  const Index n = potentials.size();
  const double inv_n = 1.0 / static_cast<double>(n);
  std::vector<double> terms(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i)
    terms[static_cast<std::size_t>(i)] = std::log(km.row_sums(i) * inv_n) + potentials(i);
  return detail::pairwise_sum(terms.data(), n) * inv_n;
}

// Row i: 1/N [ -2/h^2 sum_j K_ij (1/S_i + 1/S_j)(x_i - x_j) + grad V(x_i) ].
// The j sum merges the two interaction terms; j = i contributes zero.
ParticleSet energy_gradient(const ParticleSet& x, double h, const KernelMatrix<double>& km,
                            const ParticleSet& grad_v) {
  const Index n = x.rows();
  const Index d = x.cols();
  const double inv_n = 1.0 / static_cast<double>(n);
  const double c = -2.0 / (h * h);
  const Eigen::VectorXd inv_s = km.row_sums.cwiseInverse();
  ParticleSet grad(n, d);

#pragma omp parallel for schedule(static) num_threads(thread_count()) if (n >= 128)
  for (Index i = 0; i < n; ++i) {
    Eigen::RowVectorXd acc = Eigen::RowVectorXd::Zero(d);
    for (Index j = 0; j < n; ++j) {
      if (j == i) continue;
      const double w = km.values(i, j) * (inv_s(i) + inv_s(j));
      acc.noalias() += w * (x.row(i) - x.row(j));
    }
    grad.row(i) = inv_n * (c * acc + grad_v.row(i));
  }
  return grad;
}

}  // namespace

Eigen::VectorXd evaluate_potentials(const TargetModel& target, const ParticleSet& particles,
                                    ParticleSet* grads) {
  const Index n = particles.rows();
  Eigen::VectorXd v(n);
  if (grads) grads->resize(n, particles.cols());

#pragma omp parallel for schedule(static) num_threads(thread_count()) if (n >= 32)
  for (Index i = 0; i < n; ++i) {
    const Eigen::VectorXd xi = particles.row(i).transpose();
    if (grads) {
      Eigen::VectorXd g;
      v(i) = target.value_and_gradient(xi, g);
      grads->row(i) = g.transpose();
    } else {
      v(i) = target.value(xi);
    }
  }
  return v;
}

double discrete_energy(const ParticleSet& particles, double h, const TargetModel& target) {
  check_particles(particles, target);
  const auto km = kernel_matrix(particles, h);
  return energy_value(km, evaluate_potentials(target, particles));
}

double discrete_energy(const ParticleSet& particles, const KernelConfig& kernel,
                       const TargetModel& target) {
  return discrete_energy(particles, resolve_bandwidth(kernel, particles), target);
}

EnergyReport evaluate_energy(const ParticleSet& particles, double h, const TargetModel& target) {
  check_particles(particles, target);
  const auto km = kernel_matrix(particles, h);
  ParticleSet grad_v;
  const Eigen::VectorXd v = evaluate_potentials(target, particles, &grad_v);
  EnergyReport report;
  report.value = energy_value(km, v);
  report.grad = energy_gradient(particles, h, km, grad_v);
  report.grad_norm = report.grad.norm();
  return report;
}

ParticleSet discrete_energy_grad(const ParticleSet& particles, double h, const TargetModel& target) {
  return evaluate_energy(particles, h, target).grad;
}

ParticleSet discrete_energy_grad(const ParticleSet& particles, const KernelConfig& kernel,
                                 const TargetModel& target) {
  return discrete_energy_grad(particles, resolve_bandwidth(kernel, particles), target);
}

double proximal_objective(const ParticleSet& particles, const ParticleSet& prev, double tau,
                          double h, const TargetModel& target) {
  check_same_shape(particles, prev);
  if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau must be positive");
  const double n = static_cast<double>(particles.rows());
  return (particles - prev).squaredNorm() / (2.0 * tau * n) +
         discrete_energy(particles, h, target);
}

double proximal_objective(const ParticleSet& particles, const ParticleSet& prev, double tau,
                          const KernelConfig& kernel, const TargetModel& target) {
  return proximal_objective(particles, prev, tau, resolve_bandwidth(kernel, prev), target);
}

ProximalReport evaluate_proximal(const ParticleSet& particles, const ParticleSet& prev, double tau,
                                 double h, const TargetModel& target) {
  check_same_shape(particles, prev);
  if (!(tau > 0.0)) throw Error(ErrorCode::InvalidArgument, "tau must be positive");
  const double n = static_cast<double>(particles.rows());
  ProximalReport report;
  report.energy = evaluate_energy(particles, h, target);
  const ParticleSet diff = particles - prev;
  report.value = diff.squaredNorm() / (2.0 * tau * n) + report.energy.value;
  report.grad = diff / (tau * n) + report.energy.grad;
  return report;
}

ParticleSet proximal_objective_grad(const ParticleSet& particles, const ParticleSet& prev,
                                    double tau, double h, const TargetModel& target) {
  return evaluate_proximal(particles, prev, tau, h, target).grad;
}

ParticleSet proximal_objective_grad(const ParticleSet& particles, const ParticleSet& prev,
                                    double tau, const KernelConfig& kernel,
                                    const TargetModel& target) {
  return proximal_objective_grad(particles, prev, tau, resolve_bandwidth(kernel, prev), target);
}

}  // namespace evi
