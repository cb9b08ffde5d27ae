#pragma once

// Baseline oracles for runtime-aligned comparison: CDO (greedy per-instance
// with a margin fallback) and sas-batch (simulated annealing over size-b
// batches followed by greedy refinement).

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bossal/core.hpp"
#include "bossal/data.hpp"
#include "bossal/model.hpp"
#include "bossal/strategies.hpp"

namespace bossal {

struct CdoConfig {
  int m = 20;
  std::optional<LossKind> loss;  // unset: zero-one accuracy
  int assess_epochs = 50;
  std::uint64_t seed = 0;

  void validate() const {
    require(m >= 1, "cdo: m must be >= 1");
    require(assess_epochs >= 1, "cdo: assess_epochs must be >= 1");
  }
};

struct SasConfig {
  int anneal_steps = 150;  // s
  int greedy_steps = 10;   // g
  double temp_start = 1.0;
  double temp_end = 0.01;
  LossKind loss = LossKind::zero_one;
  int assess_epochs = 50;
  std::uint64_t seed = 0;

  void validate() const {
    require(anneal_steps >= 1, "sas: anneal_steps must be >= 1");
    require(greedy_steps >= 0, "sas: greedy_steps must be >= 0");
    require(temp_start > 0.0 && temp_end > 0.0, "sas: temperatures must be > 0");
    require(temp_end <= temp_start, "sas: temp_end must not exceed temp_start");
    require(assess_epochs >= 1, "sas: assess_epochs must be >= 1");
  }

  /// Geometric schedule from temp_start (t = 0) to temp_end (t = s - 1).
  double temperature(int t) const {
    if (anneal_steps <= 1) return temp_start;
    const double frac = static_cast<double>(t) / static_cast<double>(anneal_steps - 1);
    return temp_start * std::pow(temp_end / temp_start, frac);
  }
};

/// Runtime-aligned settings keyed by batch size (CDO m; SAS s, g).
struct AlignedOracleSettings {
  std::string_view name;
  int cdo_m;
  int sas_s;
  int sas_g;
};

inline constexpr std::array<AlignedOracleSettings, 4> kAlignedOracleSettings = {{
    {"aligned-b10", 20, 250, 10},
    {"aligned-b20", 10, 225, 10},
    {"aligned-b50", 4, 215, 10},
    {"aligned-b50-dtd", 3, 150, 10},
}};

struct OracleBatch {
  IndexList indices;
  double score = 0.0;  // eval loss of the head trained on L ∪ indices (SAS); last committed loss (CDO)
};

/// One CDO acquisition step, recorded for verification.
struct CdoStep {
  double pre_loss = 0.0;
  IndexList sampled;
  std::vector<double> sampled_loss;
  Index committed = -1;
  bool by_margin = false;
};

namespace detail {

inline std::vector<int> eval_targets(const Dataset& d, const PoolState& pool) { return labels_at(d, pool.eval); }

}  // namespace detail

/// Greedy CDO. `head` is the current model; its eval loss is the pre-step
/// reference for the first acquisition, afterwards the committed instance's
/// retrained head takes over (for both the reference loss and the margins).
inline OracleBatch cdo_select(const PoolState& pool, const Dataset& dataset, const LinearHead& head, Index b,
                              const CdoConfig& cfg, const TrainConfig& train_cfg, RetrainMeter* meter = nullptr,
                              std::vector<CdoStep>* trace = nullptr) {
  cfg.validate();
  require(b >= 1, "cdo: b must be >= 1");
  require(static_cast<Index>(pool.unlabeled.size()) >= b, "cdo: unlabeled pool smaller than b");
  const LossKind loss = cfg.loss.value_or(LossKind::zero_one);
  const auto targets = detail::eval_targets(dataset, pool);
  TrainConfig tc = train_cfg;
  tc.epochs = cfg.assess_epochs;
  Rng rng(mix64(cfg.seed, 0x43444fULL));

  IndexList labeled = pool.labeled;
  std::vector<int> labels = labels_at(dataset, labeled);
  IndexList unlabeled = pool.unlabeled;
  LinearHead current = head;
  double pre_loss = evaluate(current, dataset, pool.eval, targets, loss);
  OracleBatch out;

  for (Index step = 0; step < b; ++step) {
    require(!unlabeled.empty(), "cdo: unlabeled pool exhausted mid-batch");
    const auto m = std::min<std::size_t>(static_cast<std::size_t>(cfg.m), unlabeled.size());
    CdoStep rec;
    rec.pre_loss = pre_loss;
    rec.sampled = rng.sample(unlabeled, m);
    std::vector<Assessment> assessed;
    for (Index x : rec.sampled) {
      labeled.push_back(x);
      labels.push_back(dataset.label(x));
      assessed.push_back(retrain_and_evaluate(dataset, labeled, labels, pool.eval, targets, tc, loss, meter));
      rec.sampled_loss.push_back(assessed.back().score);
      labeled.pop_back();
      labels.pop_back();
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < m; ++i)
      if (rec.sampled_loss[i] < rec.sampled_loss[best] ||
          (rec.sampled_loss[i] == rec.sampled_loss[best] && rec.sampled[i] < rec.sampled[best]))
        best = i;
    std::size_t commit = best;
    if (!(rec.sampled_loss[best] < pre_loss)) {
      StrategyContext ctx{&dataset, labeled, rec.sampled, &current, 0, false};
      const auto order = detail::margin_order(ctx);
      commit = static_cast<std::size_t>(order.front());
      rec.by_margin = true;
    }
    rec.committed = rec.sampled[commit];
    labeled.push_back(rec.committed);
    labels.push_back(dataset.label(rec.committed));
    unlabeled.erase(std::find(unlabeled.begin(), unlabeled.end(), rec.committed));
    out.indices.push_back(rec.committed);
    pre_loss = rec.sampled_loss[commit];
    current = std::move(assessed[commit].head);
    if (trace != nullptr) trace->push_back(std::move(rec));
  }
  out.score = pre_loss;
  return out;
}

struct SasTrace {
  double initial_objective = 0.0;
  double best_objective = 0.0;
  int accepted = 0;
};

/// Batch-level simulated annealing. The initial random state's evaluation is
/// annealing step 0, so a call performs exactly s + g retrainings.
inline OracleBatch sas_select(const PoolState& pool, const Dataset& dataset, Index b, const SasConfig& cfg,
                              const TrainConfig& train_cfg, RetrainMeter* meter = nullptr, SasTrace* trace = nullptr) {
  cfg.validate();
  require(b >= 1, "sas: b must be >= 1");
  require(static_cast<Index>(pool.unlabeled.size()) >= b, "sas: unlabeled pool smaller than b");
  const auto targets = detail::eval_targets(dataset, pool);
  TrainConfig tc = train_cfg;
  tc.epochs = cfg.assess_epochs;
  Rng rng(mix64(cfg.seed, 0x534153ULL));

  const IndexList base = pool.labeled;
  const std::vector<int> base_labels = labels_at(dataset, base);
  // Sorted so the objective is a function of the set, not of swap history.
  auto objective = [&](IndexList batch) {
    std::sort(batch.begin(), batch.end());
    IndexList train = base;
    std::vector<int> labels = base_labels;
    for (Index i : batch) {
      train.push_back(i);
      labels.push_back(dataset.label(i));
    }
    return retrain_and_evaluate(dataset, train, labels, pool.eval, targets, tc, cfg.loss, meter).score;
  };

  // Members occupy the first b slots of `order`; the rest are non-members.
  IndexList order = pool.unlabeled;
  for (Index i = 0; i < b; ++i) {
    const auto j = static_cast<std::size_t>(i) + rng.below(order.size() - static_cast<std::size_t>(i));
    std::swap(order[static_cast<std::size_t>(i)], order[j]);
  }
  const auto bs = static_cast<std::size_t>(b);
  auto members = [&] { return IndexList(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(bs)); };
  auto propose = [&] {
    const std::size_t in = rng.below(bs);
    const std::size_t out = bs + rng.below(order.size() - bs);
    return std::pair{in, out};
  };

  double current = objective(members());
  OracleBatch best{members(), current};
  SasTrace local{current, current, 0};
  const bool can_move = order.size() > bs;

  for (int t = 1; t < cfg.anneal_steps && can_move; ++t) {
    const auto [in, out] = propose();
    std::swap(order[in], order[out]);
    const double next = objective(members());
    const double delta = next - current;
    if (delta <= 0.0 || rng.uniform() < std::exp(-delta / cfg.temperature(t))) {
      current = next;
      ++local.accepted;
      if (next < best.score) best = {members(), next};
    } else {
      std::swap(order[in], order[out]);
    }
  }

  // Greedy refinement from the best state seen.
  if (can_move && cfg.greedy_steps > 0) {
    std::vector<char> in_best(static_cast<std::size_t>(dataset.size()), 0);
    for (Index i : best.indices) in_best[static_cast<std::size_t>(i)] = 1;
    std::stable_partition(order.begin(), order.end(), [&](Index i) { return in_best[static_cast<std::size_t>(i)] != 0; });
    std::copy(best.indices.begin(), best.indices.end(), order.begin());
    current = best.score;
  }
  for (int t = 0; t < cfg.greedy_steps && can_move; ++t) {
    const auto [in, out] = propose();
    std::swap(order[in], order[out]);
    const double next = objective(members());
    if (next < current) {
      current = next;
      ++local.accepted;
      best = {members(), next};
    } else {
      std::swap(order[in], order[out]);
    }
  }
  local.best_objective = best.score;
  if (trace != nullptr) *trace = local;
  return best;
}

}  // namespace bossal
