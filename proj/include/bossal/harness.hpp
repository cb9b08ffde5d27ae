#pragma once

// Active-learning experiment loop, learning-curve metrics and processed
// instance accounting.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <array>
#include <numeric>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "bossal/baselines.hpp"
#include "bossal/boss.hpp"
#include "bossal/core.hpp"
#include "bossal/data.hpp"
#include "bossal/model.hpp"
#include "bossal/strategies.hpp"

namespace bossal {

using Selector = std::variant<StrategyId, BossConfig, CdoConfig, SasConfig>;

enum class SelectorKind { strategy, boss, cdo, sas };

inline SelectorKind kind_of(const Selector& s) { return static_cast<SelectorKind>(s.index()); }

inline std::string selector_name(const Selector& s) {
  switch (kind_of(s)) {
    case SelectorKind::strategy: return std::string(to_string(std::get<StrategyId>(s)));
    case SelectorKind::boss: return "boss";
    case SelectorKind::cdo: return "cdo";
    case SelectorKind::sas: return "sas-batch";
  }
  return "?";
}

struct ExperimentConfig {
  Selector selector = StrategyId::random;
  Index b = 10;
  int cycles = 20;  // A
  double eval_fraction = 0.2;
  TrainConfig train;
  int repetitions = 10;
  std::uint64_t master_seed = 0;

  void validate(const Dataset& dataset) const {
    require(b >= 1, "experiment: b must be >= 1");
    require(cycles >= 1, "experiment: cycles (A) must be >= 1");
    require(repetitions >= 1, "experiment: repetitions must be >= 1");
    train.validate();
    std::visit([](const auto& s) {
      if constexpr (!std::is_same_v<std::decay_t<decltype(s)>, StrategyId>) s.validate();
    }, selector);
    const PoolState split = make_splits(dataset, eval_fraction, 0);
    const auto train_size = static_cast<Index>(split.unlabeled.size());
    require(b * (cycles + 1) <= train_size,
            "experiment: budget b*(A+1) = " + std::to_string(b * (cycles + 1)) + " exceeds the train split (" +
                std::to_string(train_size) + " instances)");
  }
};

// ---------------------------------------------------------------------------
// Cost accounting
// ---------------------------------------------------------------------------

struct CostParams {
  Index m = 20;                 // CDO samples per acquisition
  Index anneal_steps = 0;       // SAS s
  Index greedy_steps = 0;       // SAS g
  Index batches_per_strategy = 10;
  Index num_strategies = 10;
};

/// Training instances processed by one selection:
///   CDO:       m·(b·|L| + b(b+1)/2)
///   sas-batch: (s + g)·(|L| + b)
///   BoSS:      T̂·|S|·(|L| + b)
/// Plain strategies train nothing.
inline std::int64_t processed_instances(SelectorKind kind, Index b, Index labeled_size, const CostParams& p) {
  require(b >= 0 && labeled_size >= 0, "processed_instances: negative size");
  switch (kind) {
    case SelectorKind::strategy: return 0;
    case SelectorKind::cdo: return p.m * (b * labeled_size + b * (b + 1) / 2);
    case SelectorKind::sas: return (p.anneal_steps + p.greedy_steps) * (labeled_size + b);
    case SelectorKind::boss: return p.batches_per_strategy * p.num_strategies * (labeled_size + b);
  }
  return 0;
}

inline std::int64_t retrain_count(SelectorKind kind, Index b, const CostParams& p) {
  switch (kind) {
    case SelectorKind::strategy: return 0;
    case SelectorKind::cdo: return p.m * b;
    case SelectorKind::sas: return p.anneal_steps + p.greedy_steps;
    case SelectorKind::boss: return p.batches_per_strategy * p.num_strategies;
  }
  return 0;
}

inline CostParams cost_params(const Selector& s) {
  CostParams p;
  if (const auto* c = std::get_if<CdoConfig>(&s)) p.m = c->m;
  if (const auto* c = std::get_if<SasConfig>(&s)) {
    p.anneal_steps = c->anneal_steps;
    p.greedy_steps = c->greedy_steps;
  }
  if (const auto* c = std::get_if<BossConfig>(&s)) {
    p.batches_per_strategy = c->batches_per_strategy();
    p.num_strategies = static_cast<Index>(c->strategies.size());
  }
  return p;
}

// ---------------------------------------------------------------------------
// Curves
// ---------------------------------------------------------------------------

struct CycleRecord {
  Index labeled_size = 0;
  double accuracy = 0.0;
  std::optional<StrategyId> picked;  // BoSS winner origin
  std::int64_t retrains = 0;
  std::int64_t processed_instances = 0;
  std::int64_t predicted_processed = 0;  // processed_instances() for this cycle
  IndexList selected;
  std::vector<double> candidate_scores;  // BoSS score table, generation order
  std::optional<double> winner_score;
};

struct LearningCurve {
  int repetition = 0;
  std::vector<CycleRecord> cycles;  // index 0 = after the initial pool

  std::vector<double> accuracies() const {
    std::vector<double> out;
    out.reserve(cycles.size());
    for (const auto& c : cycles) out.push_back(c.accuracy);
    return out;
  }
};

namespace tags {
constexpr std::uint64_t split = 0x53504c54ULL;
constexpr std::uint64_t initial = 0x494e4954ULL;
constexpr std::uint64_t train = 0x5452414eULL;
constexpr std::uint64_t assess = 0x41535345ULL;
constexpr std::uint64_t strategy = 0x53545241ULL;
constexpr std::uint64_t reference = 0x52454645ULL;
}  // namespace tags

inline std::uint64_t repetition_seed(std::uint64_t master_seed, int repetition) {
  return mix64(master_seed, static_cast<std::uint64_t>(repetition));
}

inline TrainConfig seeded(const TrainConfig& base, std::uint64_t rep_seed, std::uint64_t tag, int cycle) {
  TrainConfig tc = base;
  tc.init_seed = mix64(base.init_seed, rep_seed, tag, static_cast<std::uint64_t>(cycle));
  tc.shuffle_seed = mix64(base.shuffle_seed, rep_seed, tag, static_cast<std::uint64_t>(cycle), 1);
  return tc;
}

/// θ*: a head trained on the whole train split, used for pseudo-labels.
inline LinearHead reference_head(const Dataset& dataset, const PoolState& split, const ExperimentConfig& cfg) {
  return train_head(dataset, split.train(), seeded(cfg.train, cfg.master_seed, tags::reference, 0));
}

/// One repetition. `targets` is only consulted by BoSS.
inline LearningCurve run_repetition(const Dataset& dataset, const ExperimentConfig& cfg, const PoolState& split,
                                    const LabelTable& targets, int repetition) {
  const std::uint64_t rep_seed = repetition_seed(cfg.master_seed, repetition);
  const SelectorKind kind = kind_of(cfg.selector);
  const CostParams params = cost_params(cfg.selector);

  Rng init_rng(mix64(rep_seed, tags::initial));
  PoolState pool = split.with_labeled(init_rng.sample(split.unlabeled, static_cast<std::size_t>(cfg.b)));

  LearningCurve curve;
  curve.repetition = repetition;
  LinearHead head = train_head(dataset, pool.labeled, seeded(cfg.train, rep_seed, tags::train, 0));
  CycleRecord initial;
  initial.labeled_size = static_cast<Index>(pool.labeled.size());
  initial.accuracy = accuracy(head, dataset, pool.eval);
  curve.cycles.push_back(std::move(initial));

  for (int cycle = 1; cycle <= cfg.cycles; ++cycle) {
    CycleRecord rec;
    RetrainMeter meter;
    const auto labeled_before = static_cast<Index>(pool.labeled.size());
    const TrainConfig assess_cfg = seeded(cfg.train, rep_seed, tags::assess, cycle);
    switch (kind) {
      case SelectorKind::strategy: {
        const auto id = std::get<StrategyId>(cfg.selector);
        StrategyContext ctx{&dataset, pool.labeled, pool.unlabeled, &head,
                            mix64(rep_seed, tags::strategy, static_cast<std::uint64_t>(cycle)), false};
        rec.selected = select(id, ctx, cfg.b);
        break;
      }
      case SelectorKind::boss: {
        BossConfig bc = std::get<BossConfig>(cfg.selector);
        bc.seed = mix64(bc.seed, rep_seed);
        const BossSelection sel = boss_select(pool, dataset, head, cfg.b, bc, assess_cfg, targets,
                                              static_cast<std::uint64_t>(cycle), &meter);
        rec.selected = sel.winner.indices;
        rec.picked = sel.winner.origin;
        rec.winner_score = sel.winner.score;
        for (const auto& c : sel.candidates) rec.candidate_scores.push_back(*c.score);
        break;
      }
      case SelectorKind::cdo: {
        CdoConfig cc = std::get<CdoConfig>(cfg.selector);
        cc.seed = mix64(cc.seed, rep_seed, static_cast<std::uint64_t>(cycle));
        rec.selected = cdo_select(pool, dataset, head, cfg.b, cc, assess_cfg, &meter).indices;
        break;
      }
      case SelectorKind::sas: {
        SasConfig sc = std::get<SasConfig>(cfg.selector);
        sc.seed = mix64(sc.seed, rep_seed, static_cast<std::uint64_t>(cycle));
        rec.selected = sas_select(pool, dataset, cfg.b, sc, assess_cfg, &meter).indices;
        break;
      }
    }
    rec.retrains = meter.retrains;
    rec.processed_instances = meter.processed_instances;
    rec.predicted_processed = processed_instances(kind, cfg.b, labeled_before, params);
    pool = pool.with_labeled(rec.selected);
    head = train_head(dataset, pool.labeled, seeded(cfg.train, rep_seed, tags::train, cycle));
    rec.labeled_size = static_cast<Index>(pool.labeled.size());
    rec.accuracy = accuracy(head, dataset, pool.eval);
    curve.cycles.push_back(std::move(rec));
  }
  return curve;
}

/// Runs all repetitions (up to `jobs` concurrently). Results are ordered by
/// repetition and independent of `jobs`.
inline std::vector<LearningCurve> run_experiment(const Dataset& dataset, const ExperimentConfig& cfg, int jobs = 1) {
  cfg.validate(dataset);
  const PoolState split = make_splits(dataset, cfg.eval_fraction, mix64(cfg.master_seed, tags::split));
  LabelTable targets = ground_truth_labels(dataset);
  if (const auto* bc = std::get_if<BossConfig>(&cfg.selector); bc && bc->label_source == LabelSource::pseudo)
    targets = infer_pseudo_labels(dataset, reference_head(dataset, split, cfg));

  std::vector<LearningCurve> curves(static_cast<std::size_t>(cfg.repetitions));
  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (int r = next++; r < cfg.repetitions; r = next++) {
      try {
        curves[static_cast<std::size_t>(r)] = run_repetition(dataset, cfg, split, targets, r);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    }
  };
  const int workers = std::clamp(jobs, 1, cfg.repetitions);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int i = 0; i < workers; ++i) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return curves;
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

enum class Regime { full, low, mid, high };

inline std::string_view to_string(Regime r) {
  switch (r) {
    case Regime::full: return "full";
    case Regime::low: return "low";
    case Regime::mid: return "mid";
    case Regime::high: return "high";
  }
  return "?";
}

inline constexpr std::array<Regime, 4> kRegimes = {Regime::full, Regime::low, Regime::mid, Regime::high};

/// Mean accuracy over an inclusive cycle window: full = 1..A, low = 1..7,
/// mid = 7..14, high = 14..20. Cycle 0 is never included.
inline double aulc(std::span<const double> accuracies, Regime regime) {
  const auto a = static_cast<int>(accuracies.size()) - 1;
  require(a >= 1, "aulc: curve needs at least one cycle after the initial pool");
  int lo = 1, hi = a;
  switch (regime) {
    case Regime::full: break;
    case Regime::low: lo = 1, hi = 7; break;
    case Regime::mid: lo = 7, hi = 14; break;
    case Regime::high: lo = 14, hi = 20; break;
  }
  require(hi <= a, "aulc: regime '" + std::string(to_string(regime)) + "' needs cycles up to " +
                       std::to_string(hi) + " but the curve has A = " + std::to_string(a));
  double sum = 0.0;
  for (int c = lo; c <= hi; ++c) sum += accuracies[static_cast<std::size_t>(c)];
  return sum / static_cast<double>(hi - lo + 1);
}

inline double aulc(const LearningCurve& curve, Regime regime) { return aulc(curve.accuracies(), regime); }

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

inline MeanSe mean_se(std::span<const double> xs) {
  require(!xs.empty(), "mean_se: no values");
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  if (xs.size() == 1) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  const double sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  return {mean, sd / std::sqrt(static_cast<double>(xs.size()))};
}

inline MeanSe aulc_stats(std::span<const LearningCurve> curves, Regime regime) {
  std::vector<double> v;
  for (const auto& c : curves) v.push_back(aulc(c, regime));
  return mean_se(v);
}

/// Per-cycle mean over repetitions.
inline std::vector<double> mean_curve(std::span<const std::vector<double>> curves) {
  require(!curves.empty(), "mean_curve: no curves");
  std::vector<double> out(curves.front().size(), 0.0);
  for (const auto& c : curves) {
    require(c.size() == out.size(), "mean_curve: curves differ in length");
    for (std::size_t i = 0; i < c.size(); ++i) out[i] += c[i];
  }
  for (double& v : out) v /= static_cast<double>(curves.size());
  return out;
}

inline std::vector<double> mean_curve(std::span<const LearningCurve> curves) {
  std::vector<std::vector<double>> acc;
  for (const auto& c : curves) acc.push_back(c.accuracies());
  return mean_curve(acc);
}

/// Elementwise curve - baseline.
inline std::vector<double> relative_curve(std::span<const double> curve, std::span<const double> baseline) {
  require(curve.size() == baseline.size(), "relative_curve: length mismatch (" + std::to_string(curve.size()) +
                                               " vs " + std::to_string(baseline.size()) + ")");
  std::vector<double> out(curve.size());
  for (std::size_t i = 0; i < curve.size(); ++i) out[i] = curve[i] - baseline[i];
  return out;
}

using PickTable = std::vector<std::map<StrategyId, double>>;  // row per cycle 1..A

/// Fraction of repetitions whose cycle winner came from each strategy.
inline PickTable pick_frequencies(std::span<const LearningCurve> curves) {
  require(!curves.empty(), "pick_frequencies: no curves");
  const std::size_t n = curves.front().cycles.size();
  PickTable out(n > 0 ? n - 1 : 0);
  for (const auto& curve : curves) {
    require(curve.cycles.size() == n, "pick_frequencies: curves differ in length");
    for (std::size_t c = 1; c < n; ++c) {
      const auto& pick = curve.cycles[c].picked;
      require(pick.has_value(), "pick_frequencies: no pick records (cycle " + std::to_string(c) + ")");
      out[c - 1][*pick] += 1.0 / static_cast<double>(curves.size());
    }
  }
  return out;
}

}  // namespace bossal
