#pragma once

#include "evi/core.hpp"

#include <Eigen/Core>

#include <filesystem>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>

namespace evi {

/// Potential V = -ln rho* (up to an additive constant) and its gradient.
struct PotentialValue {
  double value;
  Eigen::Vector2d grad;
};

PotentialValue toy1_potential(const Eigen::Vector2d& x);
PotentialValue toy2_potential(const Eigen::Vector2d& x);
PotentialValue toy3_potential(const Eigen::Vector2d& x);

/// A target density known through its potential.
///
/// The potential callback returns V(x) and, when `grad` is non-null, writes
/// the exact gradient into it. Targets with a minibatch estimator also carry a
/// stochastic gradient that consumes the caller's RNG.
class TargetModel {
 public:
  using Potential = std::function<double(const Eigen::Ref<const Eigen::VectorXd>&,
                                         Eigen::VectorXd* grad)>;
  using StochasticGradient =
      std::function<Eigen::VectorXd(const Eigen::Ref<const Eigen::VectorXd>&, Rng&)>;

  TargetModel(std::string name, int dim, Potential potential,
              StochasticGradient stochastic_grad = {});

  const std::string& name() const { return name_; }
  int dim() const { return dim_; }
  bool stochastic() const { return static_cast<bool>(stochastic_grad_); }

  double value(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  Eigen::VectorXd gradient(const Eigen::Ref<const Eigen::VectorXd>& x) const;
  double value_and_gradient(const Eigen::Ref<const Eigen::VectorXd>& x,
                            Eigen::VectorXd& grad) const;

  /// Minibatch estimate for stochastic targets, exact gradient otherwise.
  Eigen::VectorXd sample_gradient(const Eigen::Ref<const Eigen::VectorXd>& x, Rng& rng) const;

 private:
  std::string name_;
  int dim_;
  Potential potential_;
  StochasticGradient stochastic_grad_;
};

TargetModel toy1_target();
TargetModel toy2_target();
TargetModel toy3_target();

/// N(mean, scale^2 I).
TargetModel gaussian_target(const Eigen::VectorXd& mean, double scale = 1.0);

struct MixtureData {
  Eigen::VectorXd observations;
  double sigma = 2.5;
};

/// Draws y_i ~ 1/2 N(w1, sigma^2) + 1/2 N(w1 + w2, sigma^2).
MixtureData generate_mixture_data(Index count, const Eigen::Vector2d& omega, double sigma,
                                  std::uint64_t seed);

/// Posterior over (w1, w2) with standard normal priors.
TargetModel mixture_posterior(MixtureData data);

struct LabeledDataset {
  Eigen::MatrixXd features;  // T x p
  Eigen::VectorXd labels;    // entries in {-1, +1}
  bool standardized = false;
  Eigen::VectorXd column_means;
  Eigen::VectorXd column_stds;

  Index rows() const { return features.rows(); }
  Index cols() const { return features.cols(); }
};

/// Batch size for the logistic posterior; std::nullopt means the full dataset.
using BatchSize = std::optional<Index>;

/// Bayesian logistic regression with prior N(0, alpha I) and labels in {-1, +1}.
/// With a batch size, each stochastic gradient call draws a fresh batch without
/// replacement and rescales the data term by T / |B|.
TargetModel logistic_posterior(LabeledDataset data, double alpha, BatchSize batch_size);

/// Fraction of rows where sign(w . c) matches the label (ties count as +1).
double classification_accuracy(const LabeledDataset& data, const Eigen::VectorXd& omega);

struct DatasetSplit {
  LabeledDataset train;
  LabeledDataset test;
};

/// Reads a headered numeric CSV, maps labels in {-1, +1} or {0, 1} to {-1, +1},
/// shuffles with `seed`, splits, and optionally standardizes both splits with
/// training-split statistics (population standard deviation).
DatasetSplit load_csv_dataset(const std::filesystem::path& path, const std::string& label_column,
                              bool standardize, double split_fraction, std::uint64_t seed);

/// Same split and standardization applied to an in-memory dataset.
DatasetSplit split_dataset(const LabeledDataset& data, bool standardize, double split_fraction,
                           std::uint64_t seed);

ParticleSet sample_gaussian_init(Index n, int dim, const Eigen::VectorXd& mean, double scale,
                                 std::uint64_t seed);

/// Reference samples for the built-in analytic targets ("toy1", "toy2", "toy3",
/// "gaussian"). Toys use rejection sampling on a bounding box; the Gaussian is
/// sampled exactly.
ParticleSet sample_reference(const std::string& target, Index n, std::uint64_t seed,
                             int gaussian_dim = 2);

struct RejectionBox {
  Eigen::Vector2d lower;
  Eigen::Vector2d upper;
};

/// Rejection sampling from exp(-V) restricted to `box`, with the envelope taken
/// from a 401 x 401 grid search for the minimum of V.
ParticleSet rejection_sample(const TargetModel& target, const RejectionBox& box, Index n,
                             std::uint64_t seed);

}  // namespace evi
