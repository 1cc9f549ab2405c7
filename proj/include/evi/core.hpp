#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace evi {

/// N x d particle positions, one particle per row.
template <typename Scalar>
using ParticleMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

using ParticleSet = ParticleMatrix<double>;
using Index = Eigen::Index;

/// All stochastic components draw from one seeded 64-bit Mersenne Twister.
using Rng = std::mt19937_64;

enum class ErrorCode {
  InvalidBandwidth,
  DimensionMismatch,
  EmptyInput,
  InsufficientParticles,
  DegenerateConfiguration,
  SingularSystem,
  Divergence,
  StalledInnerSolver,
  ProposalFailure,
  InvalidGrid,
  InvalidArgument,
  Parse,
  Config,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Worker thread cap from PARVI_THREADS (default: available parallelism).
int thread_count();

}  // namespace evi
