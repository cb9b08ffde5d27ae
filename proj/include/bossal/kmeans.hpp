#pragma once

// k-means++ seeding and Lloyd iterations over row-major point sets. Shared by
// the clustering-based strategies.

#include <Eigen/Core>

#include <algorithm>
#include <limits>
#include <optional>
#include <vector>

#include "bossal/core.hpp"

namespace bossal {

using PointMatrix = Eigen::MatrixXd;  // one point per row

/// Squared Euclidean distances, points x centers.
inline Eigen::MatrixXd squared_distances(const PointMatrix& points, const PointMatrix& centers) {
  const Eigen::VectorXd pn = points.rowwise().squaredNorm();
  const Eigen::VectorXd cn = centers.rowwise().squaredNorm();
  Eigen::MatrixXd d = -2.0 * points * centers.transpose();
  d.colwise() += pn;
  d.rowwise() += cn.transpose();
  return d.cwiseMax(0.0);
}

/// D²-weighted seeding. `first` fixes the first seed; otherwise it is uniform.
/// `dist2(i, j)` returns the squared distance between points i and j.
template <typename Dist2>
std::vector<Index> kmeanspp_seeds(Index n, Index k, Rng& rng, std::optional<Index> first, Dist2&& dist2) {
  require(k >= 1 && k <= n, "k-means++: need 1 <= k <= number of points");
  std::vector<Index> seeds;
  seeds.reserve(static_cast<std::size_t>(k));
  std::vector<char> taken(static_cast<std::size_t>(n), 0);
  seeds.push_back(first ? *first : static_cast<Index>(rng.below(static_cast<std::uint64_t>(n))));
  taken[static_cast<std::size_t>(seeds.back())] = 1;

  std::vector<double> nearest(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) nearest[static_cast<std::size_t>(i)] = dist2(i, seeds.back());

  while (static_cast<Index>(seeds.size()) < k) {
    double total = 0.0;
    for (Index i = 0; i < n; ++i)
      if (!taken[static_cast<std::size_t>(i)]) total += nearest[static_cast<std::size_t>(i)];
    Index pick = -1;
    if (total > 0.0) {
      const double target = rng.uniform() * total;
      double acc = 0.0;
      for (Index i = 0; i < n; ++i) {
        if (taken[static_cast<std::size_t>(i)] || nearest[static_cast<std::size_t>(i)] <= 0.0) continue;
        acc += nearest[static_cast<std::size_t>(i)];
        pick = i;
        if (acc > target) break;
      }
    } else {
      // Every remaining point coincides with a seed: uniform among the rest.
      const auto remaining = static_cast<std::uint64_t>(n - static_cast<Index>(seeds.size()));
      auto skip = static_cast<Index>(rng.below(remaining));
      for (Index i = 0; i < n; ++i) {
        if (taken[static_cast<std::size_t>(i)]) continue;
        if (skip-- == 0) {
          pick = i;
          break;
        }
      }
    }
    seeds.push_back(pick);
    taken[static_cast<std::size_t>(pick)] = 1;
    for (Index i = 0; i < n; ++i)
      nearest[static_cast<std::size_t>(i)] = std::min(nearest[static_cast<std::size_t>(i)], dist2(i, pick));
  }
  return seeds;
}

inline std::vector<Index> kmeanspp_seeds(const PointMatrix& points, Index k, Rng& rng,
                                         std::optional<Index> first = std::nullopt) {
  return kmeanspp_seeds(points.rows(), k, rng, first,
                        [&](Index i, Index j) { return (points.row(i) - points.row(j)).squaredNorm(); });
}

struct KMeansResult {
  PointMatrix centroids;
  std::vector<Index> assignment;  // cluster id per point
  int iterations = 0;
};

/// Lloyd's algorithm from k-means++ seeds. Stops after max_iter iterations,
/// when assignments stop changing, or when no centroid moves by more than
/// tol times the RMS point norm. Empty clusters keep their previous centroid.
inline KMeansResult kmeans(const PointMatrix& points, Index k, std::uint64_t seed, int max_iter = 50,
                           double tol = 1e-6) {
  const Index n = points.rows();
  require(k >= 1 && k <= n, "k-means: need 1 <= k <= number of points");
  Rng rng(seed);
  const auto seeds = kmeanspp_seeds(points, k, rng);
  KMeansResult out;
  out.centroids.resize(k, points.cols());
  for (Index c = 0; c < k; ++c) out.centroids.row(c) = points.row(seeds[static_cast<std::size_t>(c)]);
  out.assignment.assign(static_cast<std::size_t>(n), -1);

  const double scale = std::sqrt(points.rowwise().squaredNorm().mean());
  const double shift_tol = tol * std::max(scale, std::numeric_limits<double>::min());
  for (int it = 0; it < max_iter; ++it) {
    out.iterations = it + 1;
    const Eigen::MatrixXd d = squared_distances(points, out.centroids);
    bool changed = false;
    for (Index i = 0; i < n; ++i) {
      Index best = 0;
      for (Index c = 1; c < k; ++c)
        if (d(i, c) < d(i, best)) best = c;
      if (out.assignment[static_cast<std::size_t>(i)] != best) {
        out.assignment[static_cast<std::size_t>(i)] = best;
        changed = true;
      }
    }
    if (!changed) break;
    PointMatrix sums = PointMatrix::Zero(k, points.cols());
    std::vector<Index> counts(static_cast<std::size_t>(k), 0);
    for (Index i = 0; i < n; ++i) {
      const Index c = out.assignment[static_cast<std::size_t>(i)];
      sums.row(c) += points.row(i);
      ++counts[static_cast<std::size_t>(c)];
    }
    double max_shift = 0.0;
    for (Index c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] == 0) continue;
      const Eigen::RowVectorXd next = sums.row(c) / static_cast<double>(counts[static_cast<std::size_t>(c)]);
      max_shift = std::max(max_shift, (next - out.centroids.row(c)).norm());
      out.centroids.row(c) = next;
    }
    if (max_shift <= shift_tol) break;
  }
  return out;
}

/// For each centroid in order, the nearest point not already claimed by an
/// earlier centroid (lowest position on ties). Returns point positions.
inline std::vector<Index> nearest_distinct(const PointMatrix& points, const PointMatrix& centroids) {
  require(centroids.rows() <= points.rows(), "nearest_distinct: more centroids than points");
  const Eigen::MatrixXd d = squared_distances(points, centroids);
  std::vector<char> taken(static_cast<std::size_t>(points.rows()), 0);
  std::vector<Index> out;
  for (Index c = 0; c < centroids.rows(); ++c) {
    Index best = -1;
    for (Index i = 0; i < points.rows(); ++i) {
      if (taken[static_cast<std::size_t>(i)]) continue;
      if (best < 0 || d(i, c) < d(best, c)) best = i;
    }
    taken[static_cast<std::size_t>(best)] = 1;
    out.push_back(best);
  }
  return out;
}

}  // namespace bossal
