#include <gtest/gtest.h>

#include <set>

#include "bossal/kmeans.hpp"

using namespace bossal;

namespace {

PointMatrix three_blobs(std::uint64_t seed) {
  Rng rng(seed);
  PointMatrix p(60, 2);
  const double cx[3] = {0, 10, 0}, cy[3] = {0, 0, 10};
  for (Index i = 0; i < 60; ++i) {
    p(i, 0) = cx[i % 3] + 0.3 * rng.normal();
    p(i, 1) = cy[i % 3] + 0.3 * rng.normal();
  }
  return p;
}

}  // namespace

TEST(SquaredDistances, MatchesDirectComputation) {
  Rng rng(1);
  PointMatrix a(5, 3), b(4, 3);
  for (Index i = 0; i < a.size(); ++i) a.data()[i] = rng.normal();
  for (Index i = 0; i < b.size(); ++i) b.data()[i] = rng.normal();
  const Eigen::MatrixXd d = squared_distances(a, b);
  for (Index i = 0; i < 5; ++i)
    for (Index j = 0; j < 4; ++j) EXPECT_NEAR(d(i, j), (a.row(i) - b.row(j)).squaredNorm(), 1e-12);
}

TEST(KMeansPP, DistinctSeedsAndFixedFirst) {
  const PointMatrix p = three_blobs(2);
  Rng rng(3);
  const auto s = kmeanspp_seeds(p, 10, rng, Index{7});
  EXPECT_EQ(s.front(), 7);
  EXPECT_EQ(std::set<Index>(s.begin(), s.end()).size(), 10u);
}

TEST(KMeansPP, DuplicatePointsStillYieldDistinctSeeds) {
  const PointMatrix p = PointMatrix::Ones(6, 2);
  Rng rng(4);
  const auto s = kmeanspp_seeds(p, 6, rng);
  EXPECT_EQ(std::set<Index>(s.begin(), s.end()).size(), 6u);
}

TEST(KMeansPP, ZeroDistancePointsNeverChosenWhileOthersRemain) {
  PointMatrix p(4, 1);
  p << 0, 0, 0, 5;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    const auto s = kmeanspp_seeds(p, 2, rng, Index{0});
    EXPECT_EQ(s[1], 3);
  }
}

TEST(KMeans, RecoversSeparatedBlobs) {
  const PointMatrix p = three_blobs(5);
  const auto r = kmeans(p, 3, 9);
  for (Index i = 3; i < 60; ++i) EXPECT_EQ(r.assignment[i], r.assignment[i % 3]);
  EXPECT_EQ(std::set<Index>(r.assignment.begin(), r.assignment.end()).size(), 3u);
  EXPECT_LE(r.iterations, 50);
}

TEST(KMeans, DeterministicAndScaleInvariant) {
  const PointMatrix p = three_blobs(6);
  const auto a = kmeans(p, 5, 1), b = kmeans(p, 5, 1);
  EXPECT_EQ(a.assignment, b.assignment);
  const auto scaled = kmeans(p * 4.0, 5, 1);
  EXPECT_EQ(a.assignment, scaled.assignment);
  EXPECT_THROW(kmeans(p, 0, 1), ValidationError);
  EXPECT_THROW(kmeans(p, 61, 1), ValidationError);
}

TEST(NearestDistinct, ClaimsInCentroidOrder) {
  PointMatrix pts(3, 1), cents(2, 1);
  pts << 0, 1, 10;
  cents << 0.4, 0.1;
  const auto r = nearest_distinct(pts, cents);
  EXPECT_EQ(r, (std::vector<Index>{0, 1}));
}
