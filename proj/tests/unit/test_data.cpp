#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>

#include "bossal/data.hpp"
#include "bossal/model.hpp"

using namespace bossal;
namespace fs = std::filesystem;

namespace {

// Writes ALFX bytes field by field, independently of the library encoder.
struct ManualAlfx {
  std::vector<unsigned char> bytes;
  template <typename T>
  void le(T v) {
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));  // host is little-endian
    bytes.insert(bytes.end(), buf, buf + sizeof(T));
  }
  ManualAlfx(std::uint64_t n, std::uint32_t d, std::uint32_t k, const std::string& name, std::uint32_t version = 1) {
    bytes = {'A', 'L', 'F', 'X'};
    le(version);
    le(n);
    le(d);
    le(k);
    le(static_cast<std::uint16_t>(name.size()));
    bytes.insert(bytes.end(), name.begin(), name.end());
  }
};

Dataset tiny() {
  Dataset d;
  d.num_classes = 2;
  d.name = "tiny";
  d.labels = {0, 1, 0, 1};
  d.features.resize(4, 2);
  d.features << 0.5f, -1.f, 2.f, 3.25f, -0.f, 1e-7f, 7.f, 8.f;
  return d;
}

fs::path temp_path(const std::string& name) { return fs::temp_directory_path() / ("bossal_test_" + name); }

}  // namespace

TEST(Alfx, ManualFileWithFourRowsLoads) {
  ManualAlfx f(4, 2, 2, "tiny");
  for (std::int32_t y : {0, 1, 0, 1}) f.le(y);
  for (float x : {0.5f, -1.f, 2.f, 3.25f, -0.f, 1e-7f, 7.f, 8.f}) f.le(x);
  const Dataset d = alfx::decode(f.bytes);
  EXPECT_EQ(d.size(), 4);
  EXPECT_EQ(d.dim(), 2);
  EXPECT_EQ(d.num_classes, 2);
  EXPECT_EQ(d, tiny());
  EXPECT_EQ(alfx::encode(tiny()), f.bytes);
}

TEST(Alfx, LabelOutOfRangeIsValidationErrorWithIndex) {
  ManualAlfx f(2, 1, 2, "");
  f.le(std::int32_t{1});
  f.le(std::int32_t{5});
  f.le(1.f);
  f.le(2.f);
  try {
    alfx::decode(f.bytes);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("index 1"), std::string::npos) << e.what();
  }
}

TEST(Alfx, NanFeatureIsValidationErrorWithRowAndColumn) {
  ManualAlfx f(2, 2, 2, "");
  f.le(std::int32_t{0});
  f.le(std::int32_t{1});
  for (float x : {1.f, 2.f, 3.f, std::numeric_limits<float>::quiet_NaN()}) f.le(x);
  try {
    alfx::decode(f.bytes);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("row 1"), std::string::npos) << msg;
    EXPECT_NE(msg.find("col 1"), std::string::npos) << msg;
  }
}

TEST(Alfx, TruncationAnywhereIsFormatError) {
  const auto bytes = alfx::encode(tiny());
  for (std::size_t cut = 0; cut < bytes.size(); ++cut) {
    std::vector<unsigned char> partial(bytes.begin(), bytes.begin() + static_cast<std::ptrdiff_t>(cut));
    EXPECT_THROW(alfx::decode(partial), FormatError) << "cut at " << cut;
  }
}

TEST(Alfx, HeaderErrorsNameTheField) {
  auto bytes = alfx::encode(tiny());
  auto bad_magic = bytes;
  bad_magic[0] = 'X';
  EXPECT_THROW(alfx::decode(bad_magic), FormatError);

  ManualAlfx v2(4, 2, 2, "tiny", 2);
  try {
    alfx::decode(v2.bytes);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("version"), std::string::npos);
  }
  std::vector<unsigned char> header_only(bytes.begin(), bytes.begin() + 10);
  try {
    alfx::decode(header_only);
    FAIL();
  } catch (const FormatError& e) {
    EXPECT_NE(std::string(e.what()).find("N"), std::string::npos) << e.what();
  }
  bytes.push_back(0);
  EXPECT_THROW(alfx::decode(bytes), FormatError);
}

TEST(Alfx, EmptyDatasetCannotBeWritten) {
  Dataset d;
  d.num_classes = 1;
  d.features.resize(0, 3);
  EXPECT_THROW(write_feature_file(d, temp_path("empty.alfx")), ValidationError);
}

TEST(Alfx, FileRoundTripAndByteIdenticalRewrites) {
  SyntheticSpec s;
  s.num_classes = 3;
  s.dim = 5;
  s.per_class = 7;
  s.seed = 3;
  const Dataset d = generate_synthetic(s);
  const auto p1 = temp_path("a.alfx"), p2 = temp_path("b.alfx");
  write_feature_file(d, p1);
  write_feature_file(d, p2);
  EXPECT_EQ(load_feature_file(p1), d);
  std::ifstream a(p1, std::ios::binary), b(p2, std::ios::binary);
  const std::string ba((std::istreambuf_iterator<char>(a)), {}), bb((std::istreambuf_iterator<char>(b)), {});
  EXPECT_EQ(ba, bb);
  EXPECT_EQ(ba.size(), 4u + 4 + 8 + 4 + 4 + 2 + d.name.size() + 4 * 21 + 4 * 21 * 5);
  fs::remove(p1);
  fs::remove(p2);
  EXPECT_THROW(load_feature_file(temp_path("missing.alfx")), IoError);
  EXPECT_THROW(write_feature_file(d, "/nonexistent-dir/x.alfx"), IoError);
}

TEST(Alfx, RoundTripPropertyOverRandomDatasets) {
  for (int trial = 0; trial < 50; ++trial) {
    Rng rng(static_cast<std::uint64_t>(trial));
    Dataset d;
    d.num_classes = 1 + static_cast<int>(rng.below(5));
    const Index n = d.num_classes + static_cast<Index>(rng.below(20));
    const Index dim = 1 + static_cast<Index>(rng.below(6));
    d.name = std::string(rng.below(12), 'n');
    d.features.resize(n, dim);
    for (Index i = 0; i < n; ++i) {
      d.labels.push_back(i < d.num_classes ? static_cast<int>(i) : static_cast<int>(rng.below(d.num_classes)));
      for (Index j = 0; j < dim; ++j) d.features(i, j) = static_cast<float>(rng.normal() * 1e3);
    }
    EXPECT_EQ(alfx::decode(alfx::encode(d)), d) << trial;
  }
}

TEST(Synthetic, DeterministicAndShaped) {
  SyntheticSpec s;
  s.num_classes = 3;
  s.dim = 4;
  s.per_class = 10;
  s.seed = 7;
  const Dataset a = generate_synthetic(s), b = generate_synthetic(s);
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.size(), 30);
  EXPECT_EQ(a.dim(), 4);
  s.seed = 8;
  EXPECT_FALSE(generate_synthetic(s) == a);
}

TEST(Synthetic, SpecValidation) {
  SyntheticSpec s;
  s.per_class = 1;
  EXPECT_THROW(generate_synthetic(s), ValidationError);
  s = {};
  s.cluster_spread = 0;
  EXPECT_THROW(generate_synthetic(s), ValidationError);
  s = {};
  s.class_separation = -1;
  EXPECT_THROW(generate_synthetic(s), ValidationError);
}

TEST(Synthetic, CentroidsAtRequestedMeanSeparation) {
  SyntheticSpec s;
  s.num_classes = 5;
  s.dim = 6;
  s.per_class = 4000;
  s.cluster_spread = 0.5;
  s.class_separation = 3.0;
  s.seed = 1;
  const Dataset d = generate_synthetic(s);
  Eigen::MatrixXd means = Eigen::MatrixXd::Zero(5, 6);
  for (Index i = 0; i < d.size(); ++i) means.row(d.label(i)) += d.features.row(i).cast<double>();
  means /= 4000.0;
  double total = 0;
  for (int a = 0; a < 5; ++a)
    for (int b = a + 1; b < 5; ++b) total += (means.row(a) - means.row(b)).norm();
  EXPECT_NEAR(total / 10.0, 3.0, 0.05);
}

TEST(Synthetic, SeparatedBlobsAreLinearlySeparable) {
  SyntheticSpec s;
  s.num_classes = 2;
  s.dim = 2;
  s.per_class = 100;
  s.cluster_spread = 0.1;
  s.class_separation = 10.0;
  s.seed = 7;
  const Dataset d = generate_synthetic(s);
  const PoolState split = make_splits(d, 0.2, 1);
  const LinearHead h = train_head(d, split.unlabeled, TrainConfig{});
  EXPECT_GE(accuracy(h, d, split.eval), 0.99);
}

TEST(Synthetic, ZeroSeparationIsClassBlind) {
  double mean_acc = 0.0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    SyntheticSpec s;
    s.num_classes = 4;
    s.dim = 8;
    s.per_class = 250;
    s.class_separation = 0.0;
    s.seed = seed;
    const Dataset d = generate_synthetic(s);
    const PoolState split = make_splits(d, 0.2, seed);
    TrainConfig tc;
    tc.epochs = 50;
    mean_acc += accuracy(train_head(d, split.unlabeled, tc), d, split.eval) / 5.0;
  }
  EXPECT_NEAR(mean_acc, 0.25, 0.05);
}

TEST(Splits, BalancedTwentyPercentGivesTenPerClass) {
  Dataset d;
  d.num_classes = 2;
  d.features = FeatureMatrix::Zero(100, 1);
  for (int i = 0; i < 100; ++i) d.labels.push_back(i % 2);
  const PoolState p = make_splits(d, 0.2, 3);
  ASSERT_EQ(p.eval.size(), 20u);
  int ones = 0;
  for (Index i : p.eval) ones += d.label(i);
  EXPECT_EQ(ones, 10);
  EXPECT_TRUE(p.labeled.empty());
  EXPECT_EQ(p.unlabeled.size(), 80u);
}

TEST(Splits, PartitionAndStratificationProperty) {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    Rng rng(seed);
    Dataset d;
    d.num_classes = 2 + static_cast<int>(rng.below(4));
    const Index n = 40 + static_cast<Index>(rng.below(100));
    d.features = FeatureMatrix::Zero(n, 1);
    for (Index i = 0; i < n; ++i)
      d.labels.push_back(i < d.num_classes * 2 ? static_cast<int>(i % d.num_classes)
                                               : static_cast<int>(rng.below(d.num_classes)));
    const double f = 0.2 + 0.3 * rng.uniform();
    const PoolState p = make_splits(d, f, seed);
    std::set<Index> all(p.eval.begin(), p.eval.end());
    all.insert(p.unlabeled.begin(), p.unlabeled.end());
    EXPECT_EQ(all.size(), static_cast<std::size_t>(n));
    EXPECT_EQ(p.eval.size() + p.unlabeled.size(), static_cast<std::size_t>(n));
    std::vector<int> total(d.num_classes), in_eval(d.num_classes);
    for (Index i = 0; i < n; ++i) ++total[d.label(i)];
    for (Index i : p.eval) ++in_eval[d.label(i)];
    for (int c = 0; c < d.num_classes; ++c) EXPECT_LE(std::abs(in_eval[c] - f * total[c]), 1.0 + 1e-9);
    EXPECT_EQ(make_splits(d, f, seed), p);
  }
}

TEST(Splits, EvalTooSmallForAllClasses) {
  Dataset d;
  d.num_classes = 5;
  d.features = FeatureMatrix::Zero(20, 1);
  for (int i = 0; i < 20; ++i) d.labels.push_back(i % 5);
  EXPECT_THROW(make_splits(d, 0.1, 0), ValidationError);  // |eval| = 2 < K
  EXPECT_THROW(make_splits(d, 0.0, 0), ValidationError);
}

TEST(PoolStateTest, WithLabeledMovesIndices) {
  PoolState p;
  p.unlabeled = {1, 2, 3, 5, 8};
  p.eval = {0, 4};
  const PoolState q = p.with_labeled({8, 2});
  EXPECT_EQ(q.labeled, (IndexList{2, 8}));
  EXPECT_EQ(q.unlabeled, (IndexList{1, 3, 5}));
  EXPECT_EQ(q.eval, p.eval);
  EXPECT_EQ(q.train(), p.train());
  EXPECT_THROW(p.with_labeled({4}), ValidationError);
  EXPECT_THROW(p.with_labeled({1, 1}), ValidationError);
}
