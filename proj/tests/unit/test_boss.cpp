#include <gtest/gtest.h>

#include <map>
#include <set>

#include "bossal/boss.hpp"

using namespace bossal;

namespace {

Dataset blobs(int k, int dim, int per_class, std::uint64_t seed, double sep = 4.0, double spread = 1.0) {
  SyntheticSpec s;
  s.num_classes = k;
  s.dim = dim;
  s.per_class = per_class;
  s.class_separation = sep;
  s.cluster_spread = spread;
  s.seed = seed;
  return generate_synthetic(s);
}

struct Fixture {
  Dataset data;
  PoolState pool;
  LinearHead head;
};

Fixture small_problem(std::uint64_t seed, Index labeled = 10) {
  Fixture f{blobs(3, 4, 40, seed), {}, LinearHead(3, 4)};
  const PoolState split = make_splits(f.data, 0.25, seed);
  Rng rng(seed);
  f.pool = split.with_labeled(rng.sample(split.unlabeled, static_cast<std::size_t>(labeled)));
  TrainConfig tc;
  tc.epochs = 20;
  f.head = train_head(f.data, f.pool.labeled, tc);
  return f;
}

CandidateBatch scored(double s, StrategyId origin = StrategyId::random) {
  CandidateBatch c;
  c.score = s;
  c.origin = origin;
  return c;
}

}  // namespace

TEST(BossConfig, Validation) {
  BossConfig c;
  EXPECT_NO_THROW(c.validate());
  c.num_batches = 9;
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.strategies.clear();
  EXPECT_THROW(c.validate(), ValidationError);
  c = {};
  c.assess_epochs = 0;
  EXPECT_THROW(c.validate(), ValidationError);
  EXPECT_THROW(parse_label_source("oracle"), ValidationError);
  EXPECT_EQ(parse_label_source("pseudo"), LabelSource::pseudo);
}

TEST(BossPresets, Table) {
  const std::map<std::string_view, std::pair<int, int>> expected = {
      {"boss", {100, 50}}, {"boss-s", {50, 25}}, {"boss-xs", {25, 10}}, {"boss-xxs", {10, 5}}};
  for (const auto& [name, te] : expected) {
    const auto p = find_boss_preset(name);
    ASSERT_TRUE(p.has_value()) << name;
    EXPECT_EQ(p->num_batches, te.first);
    EXPECT_EQ(p->assess_epochs, te.second);
  }
  EXPECT_FALSE(find_boss_preset("boss-xxxs").has_value());
}

TEST(GenerateCandidates, EqualCountPerStrategy) {
  const Fixture f = small_problem(1);
  BossConfig cfg;
  cfg.num_batches = 100;
  auto batches = generate_candidate_batches(f.pool, f.data, f.head, 5, cfg);
  ASSERT_EQ(batches.size(), 100u);
  std::map<StrategyId, int> per;
  for (const auto& b : batches) ++per[b.origin];
  for (StrategyId id : kAllStrategies) EXPECT_EQ(per[id], 10);

  cfg.num_batches = 25;  // floor(25 / 10) = 2 each
  batches = generate_candidate_batches(f.pool, f.data, f.head, 5, cfg);
  EXPECT_EQ(batches.size(), 20u);
  per.clear();
  for (const auto& b : batches) ++per[b.origin];
  for (StrategyId id : kAllStrategies) EXPECT_EQ(per[id], 2);
}

TEST(GenerateCandidates, BatchContractAndPoolSizes) {
  const Fixture f = small_problem(2);
  BossConfig cfg;
  cfg.num_batches = 30;
  cfg.k_max = 40;
  const Index b = 4;
  const std::set<Index> unl(f.pool.unlabeled.begin(), f.pool.unlabeled.end());
  for (const auto& c : generate_candidate_batches(f.pool, f.data, f.head, b, cfg)) {
    ASSERT_EQ(static_cast<Index>(c.indices.size()), b);
    EXPECT_EQ(std::set<Index>(c.indices.begin(), c.indices.end()).size(), c.indices.size());
    for (Index i : c.indices) EXPECT_TRUE(unl.count(i));
    EXPECT_GE(c.candidate_pool_size, b);
    EXPECT_LE(c.candidate_pool_size, 40);
    EXPECT_FALSE(c.score.has_value());
  }
}

TEST(GenerateCandidates, KMaxBelowBCollapsesToB) {
  const Fixture f = small_problem(3);
  BossConfig cfg;
  cfg.num_batches = 10;
  cfg.k_max = 2;
  for (const auto& c : generate_candidate_batches(f.pool, f.data, f.head, 6, cfg))
    EXPECT_EQ(c.candidate_pool_size, 6);
}

TEST(GenerateCandidates, DefaultKMax) {
  BossConfig cfg;
  EXPECT_EQ(effective_k_max(cfg, 10, 5000), 1000);
  EXPECT_EQ(effective_k_max(cfg, 200, 5000), 2000);
  EXPECT_EQ(effective_k_max(cfg, 10, 300), 300);
}

TEST(GenerateCandidates, DeterministicAndCycleSensitive) {
  const Fixture f = small_problem(4);
  BossConfig cfg;
  cfg.num_batches = 20;
  cfg.seed = 9;
  const auto a = generate_candidate_batches(f.pool, f.data, f.head, 5, cfg, 3);
  const auto b = generate_candidate_batches(f.pool, f.data, f.head, 5, cfg, 3);
  const auto c = generate_candidate_batches(f.pool, f.data, f.head, 5, cfg, 4);
  bool any_diff = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].indices, b[i].indices);
    any_diff |= a[i].indices != c[i].indices;
  }
  EXPECT_TRUE(any_diff);
}

TEST(GenerateCandidates, SeedIsMixOfCoordinates) {
  EXPECT_EQ(candidate_seed(7, 2, 3, 4), mix64(7, 2, 3, 4));
  std::set<std::uint64_t> seen;
  for (std::uint64_t s = 0; s < 4; ++s)
    for (std::uint64_t j = 0; j < 10; ++j) seen.insert(candidate_seed(0, 0, s, j));
  EXPECT_EQ(seen.size(), 40u);
}

TEST(GenerateCandidates, UnlabeledSmallerThanBFails) {
  const Fixture f = small_problem(5);
  BossConfig cfg;
  EXPECT_THROW(generate_candidate_batches(f.pool, f.data, f.head, static_cast<Index>(f.pool.unlabeled.size()) + 1, cfg),
               ValidationError);
}

TEST(SelectBest, MinimumWithEarliestTie) {
  const std::vector<CandidateBatch> c = {scored(0.3), scored(0.1, StrategyId::badge), scored(0.1), scored(0.2)};
  EXPECT_EQ(best_batch_position(c), 1u);
  EXPECT_EQ(select_best_batch(c).origin, StrategyId::badge);
  EXPECT_THROW(best_batch_position(std::vector<CandidateBatch>{}), ValidationError);
  std::vector<CandidateBatch> missing = {scored(0.1), CandidateBatch{}};
  EXPECT_THROW(best_batch_position(missing), ValidationError);
}

TEST(SelectBest, DominatingBatchWinsAnyPosition) {
  Rng rng(3);
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<CandidateBatch> c;
    for (int i = 0; i < 20; ++i) c.push_back(scored(0.2 + rng.uniform()));
    const auto pos = static_cast<std::size_t>(rng.below(c.size()));
    c[pos].score = 0.1;
    EXPECT_EQ(best_batch_position(c), pos);
  }
}

TEST(AssessBatch, MissingClassScoresWorse) {
  // 1-D: class 0 near x = 1, class 1 near x = 3. Trained on class 0 alone the
  // head predicts class 0 everywhere on the positive axis.
  Dataset d;
  d.num_classes = 2;
  d.features.resize(80, 1);
  Rng rng(6);
  for (Index i = 0; i < 80; ++i) {
    d.labels.push_back(static_cast<int>(i % 2));
    d.features(i, 0) = static_cast<float>((i % 2 ? 3.0 : 1.0) + 0.1 * rng.normal());
  }
  const PoolState split = make_splits(d, 0.25, 6);
  IndexList zeros, ones;
  for (Index i : split.unlabeled) (d.label(i) == 0 ? zeros : ones).push_back(i);
  const PoolState pool = split.with_labeled({zeros[0]});
  BossConfig cfg;
  cfg.assess_epochs = 200;
  TrainConfig tc;
  tc.base_lr = 0.5;
  CandidateBatch good, bad;
  good.indices = {ones[0], ones[1]};
  bad.indices = {zeros[1], zeros[2]};
  const double g = assess_batch(pool, d, good, cfg, tc), b = assess_batch(pool, d, bad, cfg, tc);
  EXPECT_NEAR(b, 0.5, 1e-12);
  EXPECT_LT(g, b);
}

TEST(AssessBatch, CountsOneRetrainOfLPlusB) {
  const Fixture f = small_problem(7);
  BossConfig cfg;
  cfg.assess_epochs = 3;
  CandidateBatch c;
  c.indices = {f.pool.unlabeled[0], f.pool.unlabeled[1], f.pool.unlabeled[2]};
  RetrainMeter meter;
  assess_batch(f.pool, f.data, c, cfg, TrainConfig{}, ground_truth_labels(f.data), &meter);
  EXPECT_EQ(meter.retrains, 1);
  EXPECT_EQ(meter.processed_instances, static_cast<std::int64_t>(f.pool.labeled.size() + 3));
}

TEST(BossSelect, WinnerIsArgminOfScoreTable) {
  const Fixture f = small_problem(8);
  BossConfig cfg;
  cfg.num_batches = 20;
  cfg.assess_epochs = 5;
  RetrainMeter meter;
  const auto sel =
      boss_select(f.pool, f.data, f.head, 4, cfg, TrainConfig{}, ground_truth_labels(f.data), 0, &meter);
  ASSERT_EQ(sel.candidates.size(), 20u);
  EXPECT_EQ(meter.retrains, 20);
  double best = 1e9;
  for (const auto& c : sel.candidates) best = std::min(best, *c.score);
  EXPECT_EQ(*sel.winner.score, best);
  EXPECT_EQ(sel.winner.indices, sel.candidates[sel.winner_position].indices);
}

TEST(BossSelect, RandomOnlySingleBatchIsRandomSelection) {
  const Fixture f = small_problem(9);
  BossConfig cfg;
  cfg.num_batches = 1;
  cfg.strategies = {StrategyId::random};
  cfg.assess_epochs = 1;
  cfg.seed = 4;
  const auto sel = boss_select(f.pool, f.data, f.head, 5, cfg, TrainConfig{});
  // Same draw sequence as generate_candidate_batches: pool size, pool, strategy seed.
  Rng rng(candidate_seed(4, 0, 0, 0));
  const Index k = rng.between(5, effective_k_max(cfg, 5, static_cast<Index>(f.pool.unlabeled.size())));
  const IndexList cand = rng.sample(f.pool.unlabeled, static_cast<std::size_t>(k));
  StrategyContext ctx{&f.data, f.pool.labeled, cand, &f.head, mix64(candidate_seed(4, 0, 0, 0), 1), false};
  EXPECT_EQ(sel.winner.indices, select_random(ctx, 5));
}

TEST(BossSelect, EnsembleNeverWorseThanMember) {
  // The argmin over the union of score tables cannot exceed the argmin of a subset.
  const Fixture f = small_problem(10);
  BossConfig full;
  full.num_batches = 20;
  full.assess_epochs = 5;
  const auto sel = boss_select(f.pool, f.data, f.head, 4, full, TrainConfig{});
  std::map<StrategyId, double> best_of;
  for (const auto& c : sel.candidates)
    best_of[c.origin] = best_of.count(c.origin) ? std::min(best_of[c.origin], *c.score) : *c.score;
  for (const auto& [id, s] : best_of) EXPECT_LE(*sel.winner.score, s) << to_string(id);
}

TEST(PseudoLabels, MatchGroundTruthOnSeparableData) {
  const Dataset d = blobs(4, 6, 30, 11, 12.0, 0.3);
  TrainConfig tc;
  tc.base_lr = 0.1;
  IndexList all(static_cast<std::size_t>(d.size()));
  std::iota(all.begin(), all.end(), Index{0});
  const LinearHead ref = train_head(d, all, tc);
  const LabelTable p = infer_pseudo_labels(d, ref);
  EXPECT_EQ(p.labels, ground_truth_labels(d).labels);
}

TEST(PseudoLabels, ConstantHeadGivesOneClass) {
  const Dataset d = blobs(3, 2, 10, 12);
  LinearHead h(3, 2);
  h.biases[2] = 1.f;
  for (int y : infer_pseudo_labels(d, h).labels) EXPECT_EQ(y, 2);
}

TEST(PseudoLabels, LabeledSetKeepsGroundTruth) {
  // Targets that disagree with the truth only matter for batch and eval rows.
  const Fixture f = small_problem(13);
  LabelTable flipped = ground_truth_labels(f.data);
  for (Index i : f.pool.labeled) flipped.labels[static_cast<std::size_t>(i)] = (f.data.label(i) + 1) % 3;
  BossConfig cfg;
  cfg.assess_epochs = 5;
  CandidateBatch c;
  c.indices = {f.pool.unlabeled[0], f.pool.unlabeled[1]};
  EXPECT_EQ(assess_batch(f.pool, f.data, c, cfg, TrainConfig{}, flipped),
            assess_batch(f.pool, f.data, c, cfg, TrainConfig{}, ground_truth_labels(f.data)));
}
