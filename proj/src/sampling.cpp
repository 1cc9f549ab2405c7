#include "evi/targets.hpp"

#include <cmath>
#include <limits>
#include <sstream>

namespace evi {

ParticleSet sample_gaussian_init(Index n, int dim, const Eigen::VectorXd& mean, double scale,
                                 std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::EmptyInput, "need at least one particle");
  if (mean.size() != dim)
    throw Error(ErrorCode::DimensionMismatch, "initial mean has dimension " +
                                                  std::to_string(mean.size()) + ", expected " +
                                                  std::to_string(dim));
  if (scale < 0.0) throw Error(ErrorCode::InvalidArgument, "initial scale must be >= 0");
  Rng rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  ParticleSet x(n, dim);
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < dim; ++k) x(i, k) = mean(k) + scale * normal(rng);
  return x;
}

ParticleSet rejection_sample(const TargetModel& target, const RejectionBox& box, Index n,
                             std::uint64_t seed) {
  if (target.dim() != 2)
    throw Error(ErrorCode::DimensionMismatch, "rejection sampling supports 2-d targets only");
  constexpr int kGrid = 401;
  // Envelope inflation covers peaks that fall between grid nodes.
  constexpr double kEnvelopeSlack = 0.1;
  constexpr double kMinAcceptance = 1e-5;
  constexpr long long kMinProposalsForCheck = 1'000'000;

  const Eigen::Vector2d span = box.upper - box.lower;
  double v_min = std::numeric_limits<double>::infinity();
  for (int a = 0; a < kGrid; ++a)
    for (int b = 0; b < kGrid; ++b) {
      const Eigen::Vector2d p(box.lower(0) + span(0) * a / (kGrid - 1),
                              box.lower(1) + span(1) * b / (kGrid - 1));
      v_min = std::min(v_min, target.value(p));
    }
  const double log_envelope = -v_min + kEnvelopeSlack;

  Rng rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  ParticleSet out(n, 2);
  Index accepted = 0;
  long long proposed = 0;
  while (accepted < n) {
    const Eigen::Vector2d p(box.lower(0) + span(0) * unit(rng),
                            box.lower(1) + span(1) * unit(rng));
    ++proposed;
    if (std::log(unit(rng)) < -target.value(p) - log_envelope) out.row(accepted++) = p;
    if (proposed >= kMinProposalsForCheck &&
        static_cast<double>(accepted) < kMinAcceptance * static_cast<double>(proposed)) {
      std::ostringstream msg;
      msg << "rejection sampler for " << target.name() << " accepted " << accepted << " of "
          << proposed << " proposals (min V on grid " << v_min << ")";
      throw Error(ErrorCode::ProposalFailure, msg.str());
    }
  }
  return out;
}

ParticleSet sample_reference(const std::string& target, Index n, std::uint64_t seed,
                             int gaussian_dim) {
  if (n < 0) throw Error(ErrorCode::InvalidArgument, "sample count must be >= 0");
  if (target == "gaussian") {
    if (n == 0) return ParticleSet(0, gaussian_dim);
    return sample_gaussian_init(n, gaussian_dim, Eigen::VectorXd::Zero(gaussian_dim), 1.0, seed);
  }
  if (n == 0) return ParticleSet(0, 2);
  const RejectionBox wide{Eigen::Vector2d(-4, -4), Eigen::Vector2d(4, 4)};
  const RejectionBox narrow{Eigen::Vector2d(-3, -3), Eigen::Vector2d(3, 3)};
  if (target == "toy1") return rejection_sample(toy1_target(), wide, n, seed);
  if (target == "toy2") return rejection_sample(toy2_target(), narrow, n, seed);
  if (target == "toy3") return rejection_sample(toy3_target(), wide, n, seed);
  throw Error(ErrorCode::InvalidArgument,
              "no reference sampler for target '" + target + "' (expected toy1, toy2, toy3, gaussian)");
}

}  // namespace evi
