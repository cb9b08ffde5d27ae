#pragma once

// The BoSS oracle: candidate batches from a strategy ensemble run on randomly
// sized random candidate pools, each assessed by retraining the head on
// L ∪ batch and scoring the eval set; the minimum-loss batch wins.

#include <algorithm>
#include <array>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "bossal/core.hpp"
#include "bossal/data.hpp"
#include "bossal/model.hpp"
#include "bossal/strategies.hpp"

namespace bossal {

enum class LabelSource { ground_truth, pseudo };

inline std::string_view to_string(LabelSource s) {
  return s == LabelSource::ground_truth ? "ground_truth" : "pseudo";
}

inline LabelSource parse_label_source(std::string_view s) {
  if (s == "ground_truth") return LabelSource::ground_truth;
  if (s == "pseudo") return LabelSource::pseudo;
  throw ValidationError("unknown label_source '" + std::string(s) + "' (expected ground_truth or pseudo)");
}

struct CandidateBatch {
  IndexList indices;
  StrategyId origin = StrategyId::random;
  Index candidate_pool_size = 0;
  std::optional<double> score;
};

struct BossConfig {
  int num_batches = 100;  // T
  std::vector<StrategyId> strategies{kAllStrategies.begin(), kAllStrategies.end()};
  std::optional<Index> k_max;  // default: min(|U|, max(1000, 10 b))
  int assess_epochs = 50;
  LossKind loss = LossKind::zero_one;
  LabelSource label_source = LabelSource::ground_truth;
  std::uint64_t seed = 0;

  int batches_per_strategy() const { return num_batches / static_cast<int>(strategies.size()); }

  void validate() const {
    require(!strategies.empty(), "boss: strategies must be nonempty");
    require(num_batches >= static_cast<int>(strategies.size()),
            "boss: T (" + std::to_string(num_batches) + ") must be >= |strategies| (" +
                std::to_string(strategies.size()) + ")");
    require(assess_epochs >= 1, "boss: assess_epochs must be >= 1");
    require(!k_max || *k_max >= 1, "boss: k_max must be >= 1");
  }
};

/// Named runtime presets: (T, assessment epochs).
struct BossPreset {
  std::string_view name;
  int num_batches;
  int assess_epochs;
};

inline constexpr std::array<BossPreset, 4> kBossPresets = {{
    {"boss", 100, 50},
    {"boss-s", 50, 25},
    {"boss-xs", 25, 10},
    {"boss-xxs", 10, 5},
}};

inline std::optional<BossPreset> find_boss_preset(std::string_view name) {
  for (const auto& p : kBossPresets)
    if (p.name == name) return p;
  return std::nullopt;
}

/// Per-batch seed: mix64(seed, cycle, strategy ordinal, batch ordinal).
inline std::uint64_t candidate_seed(std::uint64_t seed, std::uint64_t cycle, std::uint64_t strategy_ordinal,
                                    std::uint64_t batch_ordinal) {
  return mix64(seed, cycle, strategy_ordinal, batch_ordinal);
}

inline Index effective_k_max(const BossConfig& cfg, Index b, Index unlabeled) {
  const Index k = cfg.k_max ? *cfg.k_max : std::max<Index>(1000, 10 * b);
  return std::max(b, std::min(k, unlabeled));
}

/// Targets used for extension labels and eval targets. Ground truth, or argmax
/// pseudo-labels of a reference head.
struct LabelTable {
  std::vector<int> labels;  // one per dataset index
};

inline LabelTable ground_truth_labels(const Dataset& dataset) {
  return {std::vector<int>(dataset.labels.begin(), dataset.labels.end())};
}

/// argmax_c p(c | x_i, reference) for every instance.
inline LabelTable infer_pseudo_labels(const Dataset& dataset, const LinearHead& reference_head) {
  IndexList all(static_cast<std::size_t>(dataset.size()));
  std::iota(all.begin(), all.end(), Index{0});
  return {predict(reference_head, dataset, all)};
}

/// Candidate batches in generation order: strategy order, then batch order.
/// For strategy s (ordinal i) and batch j the seed mix64(cfg.seed, cycle, i, j)
/// drives k ~ Unif{b..min(k_max,|U|)}, the pool C ~ Unif([U]^k), and (via
/// mix64(seed, 1)) the strategy itself.
inline std::vector<CandidateBatch> generate_candidate_batches(const PoolState& pool, const Dataset& dataset,
                                                              const LinearHead& head, Index b, const BossConfig& cfg,
                                                              std::uint64_t cycle = 0) {
  cfg.validate();
  require(b >= 1, "boss: b must be >= 1");
  require(static_cast<Index>(pool.unlabeled.size()) >= b,
          "boss: unlabeled pool (" + std::to_string(pool.unlabeled.size()) + ") smaller than b (" +
              std::to_string(b) + ")");
  const Index k_hi = effective_k_max(cfg, b, static_cast<Index>(pool.unlabeled.size()));
  const int per_strategy = cfg.batches_per_strategy();
  std::vector<CandidateBatch> out;
  out.reserve(cfg.strategies.size() * static_cast<std::size_t>(per_strategy));
  for (std::size_t s = 0; s < cfg.strategies.size(); ++s) {
    for (int j = 0; j < per_strategy; ++j) {
      const std::uint64_t seed = candidate_seed(cfg.seed, cycle, s, static_cast<std::uint64_t>(j));
      Rng rng(seed);
      const Index k = rng.between(b, k_hi);
      const IndexList cand = rng.sample(pool.unlabeled, static_cast<std::size_t>(k));
      StrategyContext ctx{&dataset, pool.labeled, cand, &head, mix64(seed, 1), false};
      CandidateBatch batch;
      batch.indices = select(cfg.strategies[s], ctx, b);
      batch.origin = cfg.strategies[s];
      batch.candidate_pool_size = k;
      out.push_back(std::move(batch));
    }
  }
  return out;
}

/// Eval loss after retraining a fresh head on L ∪ batch for cfg.assess_epochs.
/// L keeps its ground-truth labels; batch labels and eval targets come from
/// `targets`.
inline double assess_batch(const PoolState& pool, const Dataset& dataset, const CandidateBatch& batch,
                           const BossConfig& cfg, const TrainConfig& train_cfg, const LabelTable& targets,
                           RetrainMeter* meter = nullptr) {
  IndexList train = pool.labeled;
  std::vector<int> labels = labels_at(dataset, pool.labeled);
  for (Index i : batch.indices) {
    train.push_back(i);
    labels.push_back(targets.labels[static_cast<std::size_t>(i)]);
  }
  std::vector<int> eval_targets;
  eval_targets.reserve(pool.eval.size());
  for (Index i : pool.eval) eval_targets.push_back(targets.labels[static_cast<std::size_t>(i)]);
  TrainConfig tc = train_cfg;
  tc.epochs = cfg.assess_epochs;
  return retrain_and_evaluate(dataset, train, labels, pool.eval, eval_targets, tc, cfg.loss, meter).score;
}

inline double assess_batch(const PoolState& pool, const Dataset& dataset, const CandidateBatch& batch,
                           const BossConfig& cfg, const TrainConfig& train_cfg) {
  return assess_batch(pool, dataset, batch, cfg, train_cfg, ground_truth_labels(dataset));
}

/// Minimum score, earliest position on ties.
inline std::size_t best_batch_position(std::span<const CandidateBatch> candidates) {
  require(!candidates.empty(), "boss: no candidate batches to select from");
  std::size_t best = 0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    require(candidates[i].score.has_value(), "boss: candidate batch " + std::to_string(i) + " was not assessed");
    if (*candidates[i].score < *candidates[best].score) best = i;
  }
  return best;
}

inline CandidateBatch select_best_batch(std::span<const CandidateBatch> candidates) {
  return candidates[best_batch_position(candidates)];
}

struct BossSelection {
  CandidateBatch winner;
  std::size_t winner_position = 0;
  std::vector<CandidateBatch> candidates;  // assessed, generation order
};

/// Generate, assess, argmin. `train_cfg` carries the per-cycle init/shuffle
/// seeds shared by every assessment.
inline BossSelection boss_select(const PoolState& pool, const Dataset& dataset, const LinearHead& head, Index b,
                                 const BossConfig& cfg, const TrainConfig& train_cfg, const LabelTable& targets,
                                 std::uint64_t cycle = 0, RetrainMeter* meter = nullptr) {
  BossSelection out;
  out.candidates = generate_candidate_batches(pool, dataset, head, b, cfg, cycle);
  for (auto& c : out.candidates) c.score = assess_batch(pool, dataset, c, cfg, train_cfg, targets, meter);
  out.winner_position = best_batch_position(out.candidates);
  out.winner = out.candidates[out.winner_position];
  return out;
}

inline BossSelection boss_select(const PoolState& pool, const Dataset& dataset, const LinearHead& head, Index b,
                                 const BossConfig& cfg, const TrainConfig& train_cfg) {
  return boss_select(pool, dataset, head, b, cfg, train_cfg, ground_truth_labels(dataset));
}

}  // namespace bossal
