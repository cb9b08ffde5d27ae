#pragma once

// The selection-strategy ensemble. Every strategy maps a candidate pool, the
// labeled pool, the current head and a seed to b distinct pool members.
//
// Label discipline: strategies read ground-truth labels of the labeled pool
// freely. Labels of candidates are reachable only through
// StrategyContext::candidate_label, which refuses unless label_access is set
// (the supervised variants).

#include <Eigen/Core>
#include <Eigen/Cholesky>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "bossal/core.hpp"
#include "bossal/data.hpp"
#include "bossal/kmeans.hpp"
#include "bossal/model.hpp"

namespace bossal {

enum class StrategyId {
  random,
  margin,
  coreset,
  badge,
  bait,
  typiclust,
  alfamix,
  dropquery,
  typiclust_sup,
  dropquery_sup,
};

inline constexpr std::array<StrategyId, 10> kAllStrategies = {
    StrategyId::random,    StrategyId::margin,  StrategyId::coreset,   StrategyId::badge,
    StrategyId::bait,      StrategyId::typiclust, StrategyId::alfamix, StrategyId::dropquery,
    StrategyId::typiclust_sup, StrategyId::dropquery_sup};

inline std::string_view to_string(StrategyId id) {
  switch (id) {
    case StrategyId::random: return "random";
    case StrategyId::margin: return "margin";
    case StrategyId::coreset: return "coreset";
    case StrategyId::badge: return "badge";
    case StrategyId::bait: return "bait";
    case StrategyId::typiclust: return "typiclust";
    case StrategyId::alfamix: return "alfamix";
    case StrategyId::dropquery: return "dropquery";
    case StrategyId::typiclust_sup: return "typiclust_sup";
    case StrategyId::dropquery_sup: return "dropquery_sup";
  }
  return "?";
}

inline std::optional<StrategyId> try_parse_strategy(std::string_view s) {
  for (auto id : kAllStrategies)
    if (to_string(id) == s) return id;
  return std::nullopt;
}

inline StrategyId parse_strategy(std::string_view s) {
  if (auto id = try_parse_strategy(s)) return *id;
  throw ValidationError("unknown strategy '" + std::string(s) + "'");
}

inline bool uses_candidate_labels(StrategyId id) {
  return id == StrategyId::typiclust_sup || id == StrategyId::dropquery_sup;
}

struct StrategyContext {
  const Dataset* dataset = nullptr;
  std::span<const Index> labeled;
  std::span<const Index> candidate_pool;
  const LinearHead* head = nullptr;
  std::uint64_t rng_seed = 0;
  bool label_access = false;

  int candidate_label(Index dataset_index) const {
    if (!label_access) throw std::logic_error("strategy read a candidate label without label access");
    return dataset->label(dataset_index);
  }
};

namespace detail {

inline void check_context(const StrategyContext& ctx, Index b) {
  require(ctx.dataset != nullptr && ctx.head != nullptr, "strategy: context missing dataset or head");
  require(b >= 1, "strategy: b must be >= 1");
  require(static_cast<Index>(ctx.candidate_pool.size()) >= b,
          "strategy: candidate pool (" + std::to_string(ctx.candidate_pool.size()) + ") smaller than b (" +
              std::to_string(b) + ")");
  IndexList pool(ctx.candidate_pool.begin(), ctx.candidate_pool.end());
  IndexList lab(ctx.labeled.begin(), ctx.labeled.end());
  std::sort(pool.begin(), pool.end());
  std::sort(lab.begin(), lab.end());
  require(std::adjacent_find(pool.begin(), pool.end()) == pool.end(), "strategy: duplicate candidate indices");
  IndexList common;
  std::set_intersection(pool.begin(), pool.end(), lab.begin(), lab.end(), std::back_inserter(common));
  require(common.empty(), "strategy: candidate pool overlaps the labeled pool");
}

inline PointMatrix features_of(const Dataset& d, std::span<const Index> indices) {
  return gather_rows(d, indices).cast<double>();
}

inline std::vector<double> margins(const StrategyContext& ctx) {
  const ProbMatrix p = predict_proba(*ctx.head, *ctx.dataset, ctx.candidate_pool);
  std::vector<double> out(static_cast<std::size_t>(p.rows()));
  for (Index r = 0; r < p.rows(); ++r) {
    double top = -1.0, second = -1.0;
    for (Index c = 0; c < p.cols(); ++c) {
      const double v = p(r, c);
      if (v > top) {
        second = top;
        top = v;
      } else if (v > second) {
        second = v;
      }
    }
    out[static_cast<std::size_t>(r)] = p.cols() > 1 ? top - second : top;
  }
  return out;
}

/// Pool positions ordered by ascending margin, ties by lower dataset index.
inline std::vector<Index> margin_order(const StrategyContext& ctx) {
  const auto m = margins(ctx);
  std::vector<Index> pos(m.size());
  std::iota(pos.begin(), pos.end(), Index{0});
  std::sort(pos.begin(), pos.end(), [&](Index a, Index b) {
    const auto ma = m[static_cast<std::size_t>(a)], mb = m[static_cast<std::size_t>(b)];
    if (ma != mb) return ma < mb;
    return ctx.candidate_pool[static_cast<std::size_t>(a)] < ctx.candidate_pool[static_cast<std::size_t>(b)];
  });
  return pos;
}

inline IndexList to_indices(const StrategyContext& ctx, const std::vector<Index>& positions) {
  IndexList out;
  out.reserve(positions.size());
  for (Index p : positions) out.push_back(ctx.candidate_pool[static_cast<std::size_t>(p)]);
  return out;
}

/// Keeps `chosen` (pool positions) and tops it up to b with the lowest-margin
/// untouched positions.
inline IndexList fill_with_margin(const StrategyContext& ctx, std::vector<Index> chosen, Index b) {
  std::vector<char> used(ctx.candidate_pool.size(), 0);
  for (Index p : chosen) used[static_cast<std::size_t>(p)] = 1;
  for (Index p : margin_order(ctx)) {
    if (static_cast<Index>(chosen.size()) >= b) break;
    if (!used[static_cast<std::size_t>(p)]) chosen.push_back(p);
  }
  return to_indices(ctx, chosen);
}

/// Picks b representatives of `subset` (pool positions, |subset| > b): k-means
/// with k = b on their features, then the nearest distinct member per centroid.
inline std::vector<Index> kmeans_representatives(const StrategyContext& ctx, const std::vector<Index>& subset,
                                                 Index b, std::uint64_t seed) {
  IndexList idx;
  for (Index p : subset) idx.push_back(ctx.candidate_pool[static_cast<std::size_t>(p)]);
  const PointMatrix pts = features_of(*ctx.dataset, idx);
  const KMeansResult km = kmeans(pts, b, seed);
  std::vector<Index> out;
  for (Index local : nearest_distinct(pts, km.centroids)) out.push_back(subset[static_cast<std::size_t>(local)]);
  return out;
}

inline std::vector<int> argmax_rows(const ProbMatrix& z) {
  std::vector<int> out(static_cast<std::size_t>(z.rows()));
  for (Index r = 0; r < z.rows(); ++r) out[static_cast<std::size_t>(r)] = argmax(z.row(r));
  return out;
}

constexpr std::uint64_t kTagRandom = 0x52414e44ULL;
constexpr std::uint64_t kTagBadge = 0x42414447ULL;
constexpr std::uint64_t kTagTypiclust = 0x54595049ULL;
constexpr std::uint64_t kTagAlfamix = 0x414c4641ULL;
constexpr std::uint64_t kTagDropMask = 0x44524f50ULL;
constexpr std::uint64_t kTagDropKmeans = 0x44524b4dULL;

}  // namespace detail

// ---------------------------------------------------------------------------

inline IndexList select_random(const StrategyContext& ctx, Index b) {
  detail::check_context(ctx, b);
  Rng rng(mix64(ctx.rng_seed, detail::kTagRandom));
  IndexList pool(ctx.candidate_pool.begin(), ctx.candidate_pool.end());
  return rng.sample(pool, static_cast<std::size_t>(b));
}

/// Smallest top-1 minus top-2 probability first.
inline IndexList select_margin(const StrategyContext& ctx, Index b) {
  detail::check_context(ctx, b);
  auto order = detail::margin_order(ctx);
  order.resize(static_cast<std::size_t>(b));
  return detail::to_indices(ctx, order);
}

/// Greedy k-center over labeled ∪ selected centers.
inline IndexList select_coreset(const StrategyContext& ctx, Index b) {
  detail::check_context(ctx, b);
  const PointMatrix pts = detail::features_of(*ctx.dataset, ctx.candidate_pool);
  const Index n = pts.rows();
  const double inf = std::numeric_limits<double>::infinity();
  Eigen::VectorXd nearest = Eigen::VectorXd::Constant(n, inf);
  auto absorb = [&](const PointMatrix& centers) {
    if (centers.rows() == 0) return;
    nearest = nearest.cwiseMin(squared_distances(pts, centers).rowwise().minCoeff());
  };
  auto farthest = [&](const Eigen::VectorXd& score, const std::vector<char>& taken) {
    Index best = -1;
    for (Index i = 0; i < n; ++i) {
      if (taken[static_cast<std::size_t>(i)]) continue;
      if (best < 0 || score(i) > score(best) ||
          (score(i) == score(best) &&
           ctx.candidate_pool[static_cast<std::size_t>(i)] < ctx.candidate_pool[static_cast<std::size_t>(best)]))
        best = i;
    }
    return best;
  };

  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  std::vector<Index> chosen;
  if (ctx.labeled.empty()) {
    const Eigen::RowVectorXd centroid = pts.colwise().mean();
    const Eigen::VectorXd to_centroid = (pts.rowwise() - centroid).rowwise().squaredNorm();
    chosen.push_back(farthest(to_centroid, taken));
  } else {
    absorb(detail::features_of(*ctx.dataset, ctx.labeled));
    chosen.push_back(farthest(nearest, taken));
  }
  taken[static_cast<std::size_t>(chosen.back())] = 1;
  absorb(pts.row(chosen.back()));
  while (static_cast<Index>(chosen.size()) < b) {
    chosen.push_back(farthest(nearest, taken));
    taken[static_cast<std::size_t>(chosen.back())] = 1;
    absorb(pts.row(chosen.back()));
  }
  return detail::to_indices(ctx, chosen);
}

/// k-means++ seeding over gradient embeddings (p - onehot(argmax)) ⊗ h(x),
/// first seed the largest-norm embedding.
inline IndexList select_badge(const StrategyContext& ctx, Index b) {
  detail::check_context(ctx, b);
  ProbMatrix a = predict_proba(*ctx.head, *ctx.dataset, ctx.candidate_pool);
  for (Index r = 0; r < a.rows(); ++r) a(r, argmax(a.row(r))) -= 1.0;
  const PointMatrix h = detail::features_of(*ctx.dataset, ctx.candidate_pool);
  const Eigen::VectorXd an = a.rowwise().squaredNorm();
  const Eigen::VectorXd hn = h.rowwise().squaredNorm();
  const Eigen::MatrixXd aa = a * a.transpose();
  const Eigen::MatrixXd hh = h * h.transpose();
  // ||a_i⊗h_i - a_j⊗h_j||² without materialising the K·D embeddings.
  auto dist2 = [&](Index i, Index j) {
    return std::max(0.0, an(i) * hn(i) + an(j) * hn(j) - 2.0 * aa(i, j) * hh(i, j));
  };
  Index first = 0;
  for (Index i = 1; i < a.rows(); ++i) {
    const double ni = an(i) * hn(i), nf = an(first) * hn(first);
    if (ni > nf || (ni == nf && ctx.candidate_pool[static_cast<std::size_t>(i)] <
                                    ctx.candidate_pool[static_cast<std::size_t>(first)]))
      first = i;
  }
  Rng rng(mix64(ctx.rng_seed, detail::kTagBadge));
  return detail::to_indices(ctx, kmeanspp_seeds(a.rows(), b, rng, first, dist2));
}

/// Greedy log-det design over uncertainty-weighted rank-one information
/// π(x)·h̃h̃ᵀ, h̃ = [h(x), 1], π = 1 - max_c p(c|x), M = λI + Σ information.
inline IndexList select_bait(const StrategyContext& ctx, Index b, double lambda = 1e-2) {
  detail::check_context(ctx, b);
  const Dataset& d = *ctx.dataset;
  auto augmented = [&](std::span<const Index> idx) {
    PointMatrix h(static_cast<Index>(idx.size()), d.dim() + 1);
    h.leftCols(d.dim()) = detail::features_of(d, idx);
    h.col(d.dim()).setOnes();
    return h;
  };
  auto weights = [&](std::span<const Index> idx) {
    const ProbMatrix p = predict_proba(*ctx.head, d, idx);
    return Eigen::VectorXd((1.0 - p.rowwise().maxCoeff().array()).max(0.0));
  };
  const Index dim = d.dim() + 1;
  Eigen::MatrixXd m = lambda * Eigen::MatrixXd::Identity(dim, dim);
  if (!ctx.labeled.empty()) {
    const PointMatrix hl = augmented(ctx.labeled);
    const Eigen::VectorXd pl = weights(ctx.labeled);
    m += hl.transpose() * pl.asDiagonal() * hl;
  }
  Eigen::MatrixXd m_inv = m.ldlt().solve(Eigen::MatrixXd::Identity(dim, dim));

  const PointMatrix hc = augmented(ctx.candidate_pool);
  const Eigen::VectorXd pc = weights(ctx.candidate_pool);
  std::vector<char> taken(ctx.candidate_pool.size(), 0);
  std::vector<Index> chosen;
  while (static_cast<Index>(chosen.size()) < b) {
    const Eigen::VectorXd q = (hc * m_inv).cwiseProduct(hc).rowwise().sum();
    Index best = -1;
    double best_gain = 0.0;
    for (Index i = 0; i < hc.rows(); ++i) {
      if (taken[static_cast<std::size_t>(i)]) continue;
      const double gain = std::log1p(pc(i) * std::max(q(i), 0.0));
      if (best < 0 || gain > best_gain ||
          (gain == best_gain &&
           ctx.candidate_pool[static_cast<std::size_t>(i)] < ctx.candidate_pool[static_cast<std::size_t>(best)])) {
        best = i;
        best_gain = gain;
      }
    }
    chosen.push_back(best);
    taken[static_cast<std::size_t>(best)] = 1;
    // Sherman-Morrison for M + π h̃h̃ᵀ.
    const Eigen::VectorXd u = m_inv * hc.row(best).transpose();
    m_inv -= (pc(best) / (1.0 + pc(best) * hc.row(best).dot(u))) * (u * u.transpose());
  }
  return detail::to_indices(ctx, chosen);
}

namespace detail {

/// Typicality of each member: 1 / (mean distance to its min(20, n-1) nearest
/// co-members + 1e-8). Members are rows of `pts`.
inline std::vector<double> typicality(const PointMatrix& pts) {
  const Index n = pts.rows();
  std::vector<double> out(static_cast<std::size_t>(n));
  const Index nn = std::min<Index>(20, n - 1);
  if (nn == 0) {
    std::fill(out.begin(), out.end(), 1.0 / 1e-8);
    return out;
  }
  const Eigen::MatrixXd d2 = squared_distances(pts, pts);
  std::vector<double> row(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) row[static_cast<std::size_t>(j)] = std::sqrt(d2(i, j));
    row[static_cast<std::size_t>(i)] = std::numeric_limits<double>::infinity();
    std::partial_sort(row.begin(), row.begin() + nn, row.end());
    double mean = 0.0;
    for (Index j = 0; j < nn; ++j) mean += row[static_cast<std::size_t>(j)];
    out[static_cast<std::size_t>(i)] = 1.0 / (mean / static_cast<double>(nn) + 1e-8);
  }
  return out;
}

struct Group {
  std::vector<Index> all_members;    // rows into the clustered point set
  std::vector<Index> candidates;     // pool positions, most typical first
  bool has_labeled = false;
  Index key = 0;                     // tie-break: smallest candidate dataset index (or label)
};

/// Round-robin over groups: eligible (no labeled member) first, each block
/// ordered by candidate count descending then key; one pick per group per pass.
inline std::vector<Index> round_robin(std::vector<Group> groups, Index b) {
  std::erase_if(groups, [](const Group& g) { return g.candidates.empty(); });
  std::stable_sort(groups.begin(), groups.end(), [](const Group& x, const Group& y) {
    if (x.has_labeled != y.has_labeled) return !x.has_labeled;
    if (x.candidates.size() != y.candidates.size()) return x.candidates.size() > y.candidates.size();
    return x.key < y.key;
  });
  std::vector<Index> chosen;
  for (std::size_t pass = 0; static_cast<Index>(chosen.size()) < b; ++pass) {
    bool any = false;
    for (const auto& g : groups) {
      if (static_cast<Index>(chosen.size()) >= b) break;
      if (pass < g.candidates.size()) {
        chosen.push_back(g.candidates[pass]);
        any = true;
      }
    }
    if (!any) break;
  }
  return chosen;
}

}  // namespace detail

/// Typical points of the largest uncovered clusters. `supervised` swaps the
/// k-means clusters (k = |L| + b over L ∪ C) for ground-truth label groups of C.
inline IndexList select_typiclust(const StrategyContext& ctx, Index b, bool supervised) {
  detail::check_context(ctx, b);
  const Dataset& d = *ctx.dataset;
  const auto n_lab = static_cast<Index>(ctx.labeled.size());
  const auto n_cand = static_cast<Index>(ctx.candidate_pool.size());
  IndexList members(ctx.labeled.begin(), ctx.labeled.end());
  members.insert(members.end(), ctx.candidate_pool.begin(), ctx.candidate_pool.end());
  const PointMatrix pts = detail::features_of(d, members);

  std::vector<detail::Group> groups;
  if (supervised) {
    std::map<int, Index> group_of_label;
    for (Index p = 0; p < n_cand; ++p) {
      const int y = ctx.candidate_label(ctx.candidate_pool[static_cast<std::size_t>(p)]);
      auto [it, inserted] = group_of_label.try_emplace(y, static_cast<Index>(groups.size()));
      if (inserted) groups.push_back({{}, {}, false, y});
      groups[static_cast<std::size_t>(it->second)].all_members.push_back(n_lab + p);
    }
  } else {
    const KMeansResult km = kmeans(pts, n_lab + b, mix64(ctx.rng_seed, detail::kTagTypiclust));
    groups.resize(static_cast<std::size_t>(n_lab + b));
    for (auto& g : groups) g.key = std::numeric_limits<Index>::max();
    for (Index row = 0; row < pts.rows(); ++row) {
      auto& g = groups[static_cast<std::size_t>(km.assignment[static_cast<std::size_t>(row)])];
      g.all_members.push_back(row);
      if (row < n_lab)
        g.has_labeled = true;
      else
        g.key = std::min(g.key, ctx.candidate_pool[static_cast<std::size_t>(row - n_lab)]);
    }
  }

  for (auto& g : groups) {
    if (g.all_members.empty()) continue;
    PointMatrix sub(static_cast<Index>(g.all_members.size()), pts.cols());
    for (std::size_t i = 0; i < g.all_members.size(); ++i) sub.row(static_cast<Index>(i)) = pts.row(g.all_members[i]);
    const auto typ = detail::typicality(sub);
    std::vector<std::size_t> order;
    for (std::size_t i = 0; i < g.all_members.size(); ++i)
      if (g.all_members[i] >= n_lab) order.push_back(i);
    std::sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
      if (typ[x] != typ[y]) return typ[x] > typ[y];
      return ctx.candidate_pool[static_cast<std::size_t>(g.all_members[x] - n_lab)] <
             ctx.candidate_pool[static_cast<std::size_t>(g.all_members[y] - n_lab)];
    });
    for (std::size_t i : order) g.candidates.push_back(g.all_members[i] - n_lab);
  }
  return detail::to_indices(ctx, detail::round_robin(std::move(groups), b));
}

/// Candidates whose prediction flips when mixed 20% towards a labeled class
/// anchor; k-means representatives of those, margin fill if too few.
inline IndexList select_alfamix(const StrategyContext& ctx, Index b, double alpha = 0.2) {
  detail::check_context(ctx, b);
  const Dataset& d = *ctx.dataset;
  const int k = d.num_classes;
  Eigen::MatrixXd anchor_sum = Eigen::MatrixXd::Zero(k, d.dim());
  std::vector<Index> anchor_count(static_cast<std::size_t>(k), 0);
  for (Index i : ctx.labeled) {
    anchor_sum.row(d.label(i)) += d.features.row(i).cast<double>();
    ++anchor_count[static_cast<std::size_t>(d.label(i))];
  }
  const Eigen::MatrixXd w = ctx.head->weights.cast<double>();
  const Eigen::VectorXd bias = ctx.head->biases.cast<double>();
  const ProbMatrix clean = logits(*ctx.head, d, ctx.candidate_pool);
  const auto clean_pred = detail::argmax_rows(clean);

  std::vector<Index> inconsistent;
  for (Index p = 0; p < clean.rows(); ++p) {
    const Eigen::VectorXd h = d.features.row(ctx.candidate_pool[static_cast<std::size_t>(p)]).cast<double>().transpose();
    for (int c = 0; c < k; ++c) {
      if (anchor_count[static_cast<std::size_t>(c)] == 0) continue;
      const Eigen::VectorXd anchor =
          anchor_sum.row(c).transpose() / static_cast<double>(anchor_count[static_cast<std::size_t>(c)]);
      const Eigen::VectorXd z = w * (alpha * anchor + (1.0 - alpha) * h) + bias;
      if (argmax(z) != clean_pred[static_cast<std::size_t>(p)]) {
        inconsistent.push_back(p);
        break;
      }
    }
  }
  if (static_cast<Index>(inconsistent.size()) > b)
    return detail::to_indices(ctx, detail::kmeans_representatives(ctx, inconsistent, b,
                                                                  mix64(ctx.rng_seed, detail::kTagAlfamix)));
  return detail::fill_with_margin(ctx, inconsistent, b);
}

/// Inconsistency counts under M inverted-dropout copies of each candidate's
/// features (drop rate 0.5). Exposed for tests.
inline std::vector<int> dropout_inconsistency(const StrategyContext& ctx, int copies = 10, double drop = 0.5) {
  const Dataset& d = *ctx.dataset;
  const Eigen::MatrixXd w = ctx.head->weights.cast<double>();
  const Eigen::VectorXd bias = ctx.head->biases.cast<double>();
  const auto clean_pred = detail::argmax_rows(logits(*ctx.head, d, ctx.candidate_pool));
  Rng rng(mix64(ctx.rng_seed, detail::kTagDropMask));
  const double keep_scale = 1.0 / (1.0 - drop);
  std::vector<int> counts(ctx.candidate_pool.size(), 0);
  Eigen::VectorXd h(d.dim());
  for (std::size_t p = 0; p < ctx.candidate_pool.size(); ++p) {
    for (int m = 0; m < copies; ++m) {
      for (int j = 0; j < d.dim(); ++j)
        h(j) = rng.bernoulli(drop) ? 0.0 : keep_scale * static_cast<double>(d.features(ctx.candidate_pool[p], j));
      const Eigen::VectorXd z = w * h + bias;
      if (argmax(z) != clean_pred[p]) ++counts[p];
    }
  }
  return counts;
}

inline IndexList select_dropquery(const StrategyContext& ctx, Index b, bool supervised) {
  detail::check_context(ctx, b);
  const auto counts = dropout_inconsistency(ctx);
  std::vector<Index> query;
  for (std::size_t p = 0; p < counts.size(); ++p)
    if (counts[p] >= 1) query.push_back(static_cast<Index>(p));
  if (query.empty()) {
    query.resize(ctx.candidate_pool.size());
    std::iota(query.begin(), query.end(), Index{0});
  }
  if (static_cast<Index>(query.size()) <= b) return detail::fill_with_margin(ctx, query, b);

  if (!supervised)
    return detail::to_indices(
        ctx, detail::kmeans_representatives(ctx, query, b, mix64(ctx.rng_seed, detail::kTagDropKmeans)));

  std::map<int, std::size_t> group_of_label;
  std::vector<detail::Group> groups;
  for (Index p : query) {
    const int y = ctx.candidate_label(ctx.candidate_pool[static_cast<std::size_t>(p)]);
    auto [it, inserted] = group_of_label.try_emplace(y, groups.size());
    if (inserted) groups.push_back({{}, {}, false, y});
    groups[it->second].candidates.push_back(p);
  }
  for (auto& g : groups)
    std::sort(g.candidates.begin(), g.candidates.end(), [&](Index x, Index y) {
      if (counts[static_cast<std::size_t>(x)] != counts[static_cast<std::size_t>(y)])
        return counts[static_cast<std::size_t>(x)] > counts[static_cast<std::size_t>(y)];
      return ctx.candidate_pool[static_cast<std::size_t>(x)] < ctx.candidate_pool[static_cast<std::size_t>(y)];
    });
  return detail::to_indices(ctx, detail::round_robin(std::move(groups), b));
}

/// Dispatch. The label-access flag is forced to match the strategy.
inline IndexList select(StrategyId id, StrategyContext ctx, Index b) {
  ctx.label_access = uses_candidate_labels(id);
  switch (id) {
    case StrategyId::random: return select_random(ctx, b);
    case StrategyId::margin: return select_margin(ctx, b);
    case StrategyId::coreset: return select_coreset(ctx, b);
    case StrategyId::badge: return select_badge(ctx, b);
    case StrategyId::bait: return select_bait(ctx, b);
    case StrategyId::typiclust: return select_typiclust(ctx, b, false);
    case StrategyId::alfamix: return select_alfamix(ctx, b);
    case StrategyId::dropquery: return select_dropquery(ctx, b, false);
    case StrategyId::typiclust_sup: return select_typiclust(ctx, b, true);
    case StrategyId::dropquery_sup: return select_dropquery(ctx, b, true);
  }
  throw std::logic_error("unhandled strategy");
}

}  // namespace bossal
