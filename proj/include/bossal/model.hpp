#pragma once

// Linear softmax head over frozen features: SGD training with cosine
// annealing, prediction, loss evaluation, and a finite-difference gradient
// check used by the test suites.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bossal/core.hpp"
#include "bossal/data.hpp"

namespace bossal {

using ProbMatrix = Eigen::MatrixXd;

struct LinearHead {
  Eigen::MatrixXf weights;  // K x D
  Eigen::VectorXf biases;   // K

  LinearHead() = default;
  LinearHead(int num_classes, int dim)
      : weights(Eigen::MatrixXf::Zero(num_classes, dim)), biases(Eigen::VectorXf::Zero(num_classes)) {}

  int num_classes() const noexcept { return static_cast<int>(weights.rows()); }
  int dim() const noexcept { return static_cast<int>(weights.cols()); }

  bool finite() const { return weights.allFinite() && biases.allFinite(); }

  friend bool operator==(const LinearHead& a, const LinearHead& b) {
    return a.weights.rows() == b.weights.rows() && a.weights.cols() == b.weights.cols() &&
           a.weights == b.weights && a.biases == b.biases;
  }
};

struct TrainConfig {
  int epochs = 200;
  double base_lr = 0.01;
  double weight_decay = 1e-4;
  int minibatch_size = 64;
  std::uint64_t init_seed = 0;
  std::uint64_t shuffle_seed = 0;

  void validate() const {
    require(epochs >= 1, "train: epochs must be >= 1");
    require(base_lr > 0.0, "train: base_lr must be > 0");
    require(weight_decay >= 0.0, "train: weight_decay must be >= 0");
    require(minibatch_size >= 1, "train: minibatch_size must be >= 1");
  }
};

enum class LossKind { zero_one, cross_entropy, brier };

inline std::string_view to_string(LossKind k) {
  switch (k) {
    case LossKind::zero_one: return "zero_one";
    case LossKind::cross_entropy: return "cross_entropy";
    case LossKind::brier: return "brier";
  }
  return "?";
}

inline LossKind parse_loss(std::string_view s) {
  if (s == "zero_one") return LossKind::zero_one;
  if (s == "cross_entropy") return LossKind::cross_entropy;
  if (s == "brier") return LossKind::brier;
  throw ValidationError("unknown loss '" + std::string(s) + "' (expected zero_one, cross_entropy or brier)");
}

inline double cosine_lr(int epoch, const TrainConfig& config) {
  require(epoch >= 0 && epoch < config.epochs,
          "cosine_lr: epoch " + std::to_string(epoch) + " outside [0, " + std::to_string(config.epochs) + ")");
  return config.base_lr * 0.5 *
         (1.0 + std::cos(std::numbers::pi * static_cast<double>(epoch) / static_cast<double>(config.epochs)));
}

inline FeatureMatrix gather_rows(const Dataset& dataset, std::span<const Index> indices) {
  FeatureMatrix out(static_cast<Index>(indices.size()), dataset.dim());
  for (std::size_t i = 0; i < indices.size(); ++i) {
    require(indices[i] >= 0 && indices[i] < dataset.size(), "index out of range");
    out.row(static_cast<Index>(i)) = dataset.features.row(indices[i]);
  }
  return out;
}

/// Row-wise softmax in place, stabilised by max-logit subtraction.
template <typename Matrix>
void softmax_rows(Matrix& logits) {
  for (Index r = 0; r < logits.rows(); ++r) {
    auto row = logits.row(r);
    row.array() -= row.maxCoeff();
    row = row.array().exp().matrix();
    row /= row.sum();
  }
}

/// Lowest index among maximal entries.
template <typename Row>
int argmax(const Row& row) {
  int best = 0;
  for (int c = 1; c < static_cast<int>(row.size()); ++c)
    if (row(c) > row(best)) best = c;
  return best;
}

inline ProbMatrix logits(const LinearHead& head, const Dataset& dataset, std::span<const Index> indices) {
  const FeatureMatrix x = gather_rows(dataset, indices);
  ProbMatrix z = (x.cast<double>() * head.weights.cast<double>().transpose());
  z.rowwise() += head.biases.cast<double>().transpose();
  return z;
}

inline ProbMatrix predict_proba(const LinearHead& head, const Dataset& dataset, std::span<const Index> indices) {
  ProbMatrix p = logits(head, dataset, indices);
  softmax_rows(p);
  return p;
}

/// Argmax class of each row of logits, lowest index on ties.
inline std::vector<int> predict(const LinearHead& head, const Dataset& dataset, std::span<const Index> indices) {
  const ProbMatrix z = logits(head, dataset, indices);
  std::vector<int> out(indices.size());
  for (Index r = 0; r < z.rows(); ++r) out[static_cast<std::size_t>(r)] = argmax(z.row(r));
  return out;
}

/// Mean loss of precomputed probabilities against integer targets.
inline double loss_of(const ProbMatrix& probs, std::span<const int> targets, LossKind loss) {
  require(probs.rows() > 0, "evaluate: empty eval set");
  double total = 0.0;
  for (Index r = 0; r < probs.rows(); ++r) {
    const int y = targets[static_cast<std::size_t>(r)];
    switch (loss) {
      case LossKind::zero_one: total += (argmax(probs.row(r)) != y) ? 1.0 : 0.0; break;
      case LossKind::cross_entropy: total += -std::log(std::max(probs(r, y), 1e-12)); break;
      case LossKind::brier: {
        double s = 0.0;
        for (Index c = 0; c < probs.cols(); ++c) {
          const double diff = probs(r, c) - (c == y ? 1.0 : 0.0);
          s += diff * diff;
        }
        total += s;
        break;
      }
    }
  }
  return total / static_cast<double>(probs.rows());
}

/// Mean loss on `eval_indices` against `targets` (one per eval index).
inline double evaluate(const LinearHead& head, const Dataset& dataset, std::span<const Index> eval_indices,
                       std::span<const int> targets, LossKind loss) {
  require(!eval_indices.empty(), "evaluate: empty eval set");
  require(targets.size() == eval_indices.size(), "evaluate: target count mismatch");
  return loss_of(predict_proba(head, dataset, eval_indices), targets, loss);
}

inline std::vector<int> labels_at(const Dataset& dataset, std::span<const Index> indices) {
  std::vector<int> out(indices.size());
  for (std::size_t i = 0; i < indices.size(); ++i) out[i] = dataset.label(indices[i]);
  return out;
}

inline double evaluate(const LinearHead& head, const Dataset& dataset, std::span<const Index> eval_indices,
                       LossKind loss) {
  require(!eval_indices.empty(), "evaluate: empty eval set");
  return evaluate(head, dataset, eval_indices, labels_at(dataset, eval_indices), loss);
}

inline double accuracy(const LinearHead& head, const Dataset& dataset, std::span<const Index> eval_indices) {
  return 1.0 - evaluate(head, dataset, eval_indices, LossKind::zero_one);
}

inline LinearHead init_head(int num_classes, int dim, std::uint64_t init_seed) {
  LinearHead head(num_classes, dim);
  Rng rng(mix64(init_seed, 0x494e4954ULL));
  for (int c = 0; c < num_classes; ++c)
    for (int j = 0; j < dim; ++j) head.weights(c, j) = static_cast<float>(0.01 * rng.normal());
  return head;
}

using EpochCallback = std::function<void(int epoch, const LinearHead&)>;

/// Fresh head trained on (indices, labels) from the seeded init. Deterministic.
inline LinearHead train_head(const Dataset& dataset, std::span<const Index> indices, std::span<const int> labels,
                             const TrainConfig& config, const EpochCallback& on_epoch_end = {}) {
  config.validate();
  require(!indices.empty(), "train_head: empty index set");
  require(labels.size() == indices.size(), "train_head: label count mismatch");
  const int k = dataset.num_classes;
  for (int y : labels) require(y >= 0 && y < k, "train_head: label out of range");

  const FeatureMatrix x = gather_rows(dataset, indices);
  const auto n = static_cast<Index>(indices.size());
  LinearHead head = init_head(k, dataset.dim(), config.init_seed);

  Rng shuffler(mix64(config.shuffle_seed, 0x5348554646ULL));
  std::vector<Index> order(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) order[static_cast<std::size_t>(i)] = i;

  const Index mb = config.minibatch_size;
  const auto decay = static_cast<float>(config.weight_decay);
  FeatureMatrix xb;
  Eigen::MatrixXf g;
  for (int epoch = 0; epoch < config.epochs; ++epoch) {
    shuffler.shuffle(order);
    const auto lr = static_cast<float>(cosine_lr(epoch, config));
    for (Index start = 0; start < n; start += mb) {
      const Index m = std::min(mb, n - start);
      xb.resize(m, x.cols());
      for (Index i = 0; i < m; ++i) xb.row(i) = x.row(order[static_cast<std::size_t>(start + i)]);
      g.noalias() = xb * head.weights.transpose();
      g.rowwise() += head.biases.transpose();
      softmax_rows(g);
      for (Index i = 0; i < m; ++i) g(i, labels[static_cast<std::size_t>(order[static_cast<std::size_t>(start + i)])]) -= 1.0f;
      g /= static_cast<float>(m);
      // Weight decay on weights only.
      head.weights -= lr * (g.transpose() * xb + decay * head.weights);
      head.biases -= lr * g.colwise().sum().transpose();
    }
    if (on_epoch_end) on_epoch_end(epoch, head);
  }
  return head;
}

inline LinearHead train_head(const Dataset& dataset, std::span<const Index> indices, const TrainConfig& config,
                             const EpochCallback& on_epoch_end = {}) {
  require(!indices.empty(), "train_head: empty index set");
  return train_head(dataset, indices, labels_at(dataset, indices), config, on_epoch_end);
}

/// Mean softmax cross-entropy plus (wd/2)·||W||², the objective SGD descends.
inline double training_objective(const LinearHead& head, const Dataset& dataset, std::span<const Index> indices,
                                 double weight_decay) {
  const double ce = evaluate(head, dataset, indices, LossKind::cross_entropy);
  return ce + 0.5 * weight_decay * head.weights.cast<double>().squaredNorm();
}

// ---------------------------------------------------------------------------
// Gradient check
// ---------------------------------------------------------------------------

struct HeadGradient {
  Eigen::MatrixXd weights;
  Eigen::VectorXd biases;
};

/// Analytic gradient of the mean cross-entropy: (p - onehot(y)) ⊗ h(x), averaged.
inline HeadGradient analytic_gradient(const LinearHead& head, const Dataset& dataset, std::span<const Index> indices) {
  require(!indices.empty(), "gradient: empty index set");
  ProbMatrix p = predict_proba(head, dataset, indices);
  for (std::size_t i = 0; i < indices.size(); ++i) p(static_cast<Index>(i), dataset.label(indices[i])) -= 1.0;
  p /= static_cast<double>(indices.size());
  const Eigen::MatrixXd x = gather_rows(dataset, indices).cast<double>();
  return {p.transpose() * x, p.colwise().sum().transpose()};
}

/// Max relative error between the analytic gradient and Richardson-extrapolated
/// central differences (base step 1e-3) on a 64-bit copy of the head.
inline double grad_check(const LinearHead& head, const Dataset& dataset, std::span<const Index> indices) {
  require(!indices.empty(), "grad_check: empty index set");
  const HeadGradient analytic = analytic_gradient(head, dataset, indices);
  const Eigen::MatrixXd x = gather_rows(dataset, indices).cast<double>();
  const std::vector<int> y = labels_at(dataset, indices);
  Eigen::MatrixXd w = head.weights.cast<double>();
  Eigen::VectorXd bias = head.biases.cast<double>();

  auto objective = [&] {
    Eigen::MatrixXd z = x * w.transpose();
    z.rowwise() += bias.transpose();
    double total = 0.0;
    for (Index r = 0; r < z.rows(); ++r) {
      const double mx = z.row(r).maxCoeff();
      const double lse = mx + std::log((z.row(r).array() - mx).exp().sum());
      total += lse - z(r, y[static_cast<std::size_t>(r)]);
    }
    return total / static_cast<double>(z.rows());
  };
  auto derivative = [&](double& param) {
    auto central = [&](double h) {
      const double saved = param;
      param = saved + h;
      const double up = objective();
      param = saved - h;
      const double down = objective();
      param = saved;
      return (up - down) / (2.0 * h);
    };
    constexpr double step = 1e-3;
    return (4.0 * central(step / 2.0) - central(step)) / 3.0;
  };
  auto rel = [](double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6}); };

  double worst = 0.0;
  for (Index c = 0; c < w.rows(); ++c) {
    for (Index j = 0; j < w.cols(); ++j) worst = std::max(worst, rel(analytic.weights(c, j), derivative(w(c, j))));
    worst = std::max(worst, rel(analytic.biases(c), derivative(bias(c))));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Selection-time retraining with instrumented cost counters
// ---------------------------------------------------------------------------

/// Counts retrainings and training instances processed during selection.
struct RetrainMeter {
  std::int64_t retrains = 0;
  std::int64_t processed_instances = 0;
};

struct Assessment {
  double score = 0.0;
  LinearHead head;
};

/// Trains a fresh head on (train_indices, train_labels), scores it on the eval
/// set against eval_targets, and charges the meter.
inline Assessment retrain_and_evaluate(const Dataset& dataset, std::span<const Index> train_indices,
                                       std::span<const int> train_labels, std::span<const Index> eval_indices,
                                       std::span<const int> eval_targets, const TrainConfig& config, LossKind loss,
                                       RetrainMeter* meter) {
  Assessment out;
  out.head = train_head(dataset, train_indices, train_labels, config);
  out.score = evaluate(out.head, dataset, eval_indices, eval_targets, loss);
  if (meter != nullptr) {
    ++meter->retrains;
    meter->processed_instances += static_cast<std::int64_t>(train_indices.size());
  }
  return out;
}

}  // namespace bossal
