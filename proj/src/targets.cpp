#include "evi/targets.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <vector>

namespace evi {

namespace {

// log(e^a + e^b) without overflow; returns the weight of `a` through `wa`.
double log_sum_exp2(double a, double b, double& wa) {
  const double m = std::max(a, b);
  const double ea = std::exp(a - m);
  const double eb = std::exp(b - m);
  wa = ea / (ea + eb);
  return m + std::log(ea + eb);
}

// ln(1 + e^z), stable for large |z|.
double softplus(double z) { return std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))); }

// 1 / (1 + e^-z)
double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

TargetModel::Potential wrap2(PotentialValue (*fn)(const Eigen::Vector2d&)) {
  return [fn](const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::VectorXd* grad) {
    const PotentialValue p = fn(Eigen::Vector2d(x(0), x(1)));
    if (grad) *grad = p.grad;
    return p.value;
  };
}

}  // namespace

PotentialValue toy1_potential(const Eigen::Vector2d& x) {
  const double r = 10.0 * x(1) + 3.0 * x(0) * x(0) - 3.0;
  return {0.5 * x(0) * x(0) + 0.5 * r * r,
          Eigen::Vector2d(x(0) + 6.0 * x(0) * r, 10.0 * r)};
}

PotentialValue toy2_potential(const Eigen::Vector2d& x) {
  const double q = x.squaredNorm() - 3.0;
  const double a = -2.0 * (x(0) - 2.0) * (x(0) - 2.0);
  const double b = -2.0 * (x(1) + 2.0) * (x(1) + 2.0);
  double wa = 0.0;
  const double lse = log_sum_exp2(a, b, wa);
  const double wb = 1.0 - wa;
  return {2.0 * q * q - lse, Eigen::Vector2d(8.0 * q * x(0) + 4.0 * wa * (x(0) - 2.0),
                                             8.0 * q * x(1) + 4.0 * wb * (x(1) + 2.0))};
}

PotentialValue toy3_potential(const Eigen::Vector2d& x) {
  constexpr double kWidth = 0.4;
  const double half_pi = std::numbers::pi / 2.0;
  const double r = (x(1) - std::sin(half_pi * x(0))) / kWidth;
  const double u = r / kWidth;
  return {0.5 * r * r, Eigen::Vector2d(-u * std::cos(half_pi * x(0)) * half_pi, u)};
}

TargetModel::TargetModel(std::string name, int dim, Potential potential,
                         StochasticGradient stochastic_grad)
    : name_(std::move(name)),
      dim_(dim),
      potential_(std::move(potential)),
      stochastic_grad_(std::move(stochastic_grad)) {
  if (dim_ < 1) throw Error(ErrorCode::DimensionMismatch, "target dimension must be >= 1");
}

double TargetModel::value(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  return potential_(x, nullptr);
}

Eigen::VectorXd TargetModel::gradient(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  Eigen::VectorXd g(dim_);
  potential_(x, &g);
  return g;
}

double TargetModel::value_and_gradient(const Eigen::Ref<const Eigen::VectorXd>& x,
                                       Eigen::VectorXd& grad) const {
  grad.resize(dim_);
  return potential_(x, &grad);
}

Eigen::VectorXd TargetModel::sample_gradient(const Eigen::Ref<const Eigen::VectorXd>& x,
                                             Rng& rng) const {
  if (stochastic_grad_) return stochastic_grad_(x, rng);
  return gradient(x);
}

TargetModel toy1_target() { return {"toy1", 2, wrap2(&toy1_potential)}; }
TargetModel toy2_target() { return {"toy2", 2, wrap2(&toy2_potential)}; }
TargetModel toy3_target() { return {"toy3", 2, wrap2(&toy3_potential)}; }

TargetModel gaussian_target(const Eigen::VectorXd& mean, double scale) {
  if (!(scale > 0.0)) throw Error(ErrorCode::InvalidArgument, "gaussian scale must be positive");
  const double inv_var = 1.0 / (scale * scale);
  return {"gaussian", static_cast<int>(mean.size()),
          [mean, inv_var](const Eigen::Ref<const Eigen::VectorXd>& x, Eigen::VectorXd* grad) {
            const Eigen::VectorXd diff = x - mean;
            if (grad) *grad = inv_var * diff;
            return 0.5 * inv_var * diff.squaredNorm();
          }};
}

MixtureData generate_mixture_data(Index count, const Eigen::Vector2d& omega, double sigma,
                                  std::uint64_t seed) {
  if (!(sigma > 0.0)) throw Error(ErrorCode::InvalidArgument, "mixture sigma must be positive");
  Rng rng(seed);
  std::normal_distribution<double> noise(0.0, sigma);
  std::bernoulli_distribution pick(0.5);
  MixtureData data{Eigen::VectorXd(count), sigma};
  for (Index i = 0; i < count; ++i) {
    const double mu = pick(rng) ? omega(0) + omega(1) : omega(0);
    data.observations(i) = mu + noise(rng);
  }
  return data;
}

TargetModel mixture_posterior(MixtureData data) {
  if (!(data.sigma > 0.0))
    throw Error(ErrorCode::InvalidArgument, "mixture sigma must be positive");
  const double inv_var = 1.0 / (data.sigma * data.sigma);
  auto potential = [obs = std::move(data.observations), inv_var](
                       const Eigen::Ref<const Eigen::VectorXd>& w, Eigen::VectorXd* grad) {
    const double m1 = w(0);
    const double m2 = w(0) + w(1);
    double v = 0.5 * (w(0) * w(0) + w(1) * w(1));
    double g0 = w(0);
    double g1 = w(1);
    // Per observation: -ln(1/2 phi(y; m1) + 1/2 phi(y; m2)) up to constants.
    for (Index i = 0; i < obs.size(); ++i) {
      const double d1 = obs(i) - m1;
      const double d2 = obs(i) - m2;
      double r1 = 0.0;
      v -= log_sum_exp2(-0.5 * inv_var * d1 * d1, -0.5 * inv_var * d2 * d2, r1);
      const double r2 = 1.0 - r1;
      g0 -= inv_var * (r1 * d1 + r2 * d2);
      g1 -= inv_var * r2 * d2;
    }
    if (grad) {
      (*grad)(0) = g0;
      (*grad)(1) = g1;
    }
    return v;
  };
  return {"mixture", 2, std::move(potential)};
}

namespace {

struct LogisticModel {
  LabeledDataset data;
  double inv_alpha;

  // Data-term gradient summed over `rows` in the given order.
  template <typename Rows>
  Eigen::VectorXd data_grad(const Eigen::Ref<const Eigen::VectorXd>& w, const Rows& rows) const {
    Eigen::VectorXd g = Eigen::VectorXd::Zero(w.size());
    for (Index t : rows) {
      const double y = data.labels(t);
      const double z = y * data.features.row(t).dot(w);
      g.noalias() -= (y * sigmoid(-z)) * data.features.row(t).transpose();
    }
    return g;
  }
};

}  // namespace

TargetModel logistic_posterior(LabeledDataset data, double alpha, BatchSize batch_size) {
  if (data.rows() == 0) throw Error(ErrorCode::EmptyInput, "logistic_posterior: empty dataset");
  if (!(alpha > 0.0)) throw Error(ErrorCode::InvalidArgument, "prior variance alpha must be positive");
  if (batch_size && (*batch_size < 1 || *batch_size > data.rows()))
    throw Error(ErrorCode::InvalidArgument,
                "batch size must lie in [1, " + std::to_string(data.rows()) + "]");

  const int dim = static_cast<int>(data.cols());
  const Index total = data.rows();
  auto model = std::make_shared<const LogisticModel>(LogisticModel{std::move(data), 1.0 / alpha});

  auto potential = [model, total](const Eigen::Ref<const Eigen::VectorXd>& w,
                                  Eigen::VectorXd* grad) {
    const auto& ds = model->data;
    double v = 0.5 * model->inv_alpha * w.squaredNorm();
    for (Index t = 0; t < total; ++t) v += softplus(-ds.labels(t) * ds.features.row(t).dot(w));
    if (grad) {
      std::vector<Index> all(static_cast<std::size_t>(total));
      std::iota(all.begin(), all.end(), Index{0});
      *grad = model->inv_alpha * w + 1.0 * model->data_grad(w, all);
    }
    return v;
  };

  TargetModel::StochasticGradient stochastic;
  if (batch_size) {
    // Index pool reshuffled partially per call; the first |B| entries after a
    // partial Fisher-Yates pass are a uniform draw without replacement.
    auto pool = std::make_shared<std::vector<Index>>(static_cast<std::size_t>(total));
    std::iota(pool->begin(), pool->end(), Index{0});
    const Index b = *batch_size;
    stochastic = [model, pool, b, total](const Eigen::Ref<const Eigen::VectorXd>& w, Rng& rng) {
      auto& idx = *pool;
      for (Index k = 0; k < b; ++k) {
        std::uniform_int_distribution<Index> pick(k, total - 1);
        std::swap(idx[static_cast<std::size_t>(k)], idx[static_cast<std::size_t>(pick(rng))]);
      }
      std::vector<Index> batch(idx.begin(), idx.begin() + b);
      std::sort(batch.begin(), batch.end());
      const double scale = static_cast<double>(total) / static_cast<double>(b);
      return Eigen::VectorXd(model->inv_alpha * w + scale * model->data_grad(w, batch));
    };
  }
  return {"logistic", dim, std::move(potential), std::move(stochastic)};
}

double classification_accuracy(const LabeledDataset& data, const Eigen::VectorXd& omega) {
  if (data.rows() == 0) throw Error(ErrorCode::EmptyInput, "accuracy of an empty dataset");
  Index correct = 0;
  for (Index t = 0; t < data.rows(); ++t) {
    const double predicted = data.features.row(t).dot(omega) >= 0.0 ? 1.0 : -1.0;
    if (predicted == data.labels(t)) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.rows());
}

}  // namespace evi
