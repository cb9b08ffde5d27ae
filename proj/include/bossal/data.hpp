#pragma once

// Datasets, the ALFX feature-file format, synthetic Gaussian-mixture data and
// train/eval pool bookkeeping.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include "bossal/core.hpp"

namespace bossal {

using FeatureMatrix = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Dataset {
  FeatureMatrix features;  // N x D
  std::vector<std::int32_t> labels;
  int num_classes = 0;
  std::string name;

  Index size() const noexcept { return static_cast<Index>(labels.size()); }
  int dim() const noexcept { return static_cast<int>(features.cols()); }
  int label(Index i) const { return labels[static_cast<std::size_t>(i)]; }

  /// Throws ValidationError naming the first violated invariant.
  void validate() const {
    const auto n = static_cast<Index>(labels.size());
    require(num_classes >= 1, "dataset: K must be >= 1");
    require(n >= num_classes, "dataset: N (" + std::to_string(n) + ") must be >= K (" +
                                  std::to_string(num_classes) + ")");
    require(features.cols() >= 1, "dataset: D must be >= 1");
    require(features.rows() == n, "dataset: feature rows do not match label count");
    std::vector<char> seen(static_cast<std::size_t>(num_classes), 0);
    for (Index i = 0; i < n; ++i) {
      const int y = labels[static_cast<std::size_t>(i)];
      if (y < 0 || y >= num_classes)
        throw ValidationError("dataset: label " + std::to_string(y) + " at index " +
                              std::to_string(i) + " outside [0, " +
                              std::to_string(num_classes) + ")");
      seen[static_cast<std::size_t>(y)] = 1;
    }
    for (int c = 0; c < num_classes; ++c)
      require(seen[static_cast<std::size_t>(c)] != 0,
              "dataset: class " + std::to_string(c) + " has no instances");
    for (Index r = 0; r < features.rows(); ++r)
      for (Index c = 0; c < features.cols(); ++c)
        if (!std::isfinite(features(r, c)))
          throw ValidationError("dataset: non-finite feature at (row " + std::to_string(r) +
                                ", col " + std::to_string(c) + ")");
  }

  friend bool operator==(const Dataset& a, const Dataset& b) {
    if (a.num_classes != b.num_classes || a.name != b.name || a.labels != b.labels) return false;
    if (a.features.rows() != b.features.rows() || a.features.cols() != b.features.cols())
      return false;
    return std::memcmp(a.features.data(), b.features.data(),
                       sizeof(float) * static_cast<std::size_t>(a.features.size())) == 0;
  }
};

// ---------------------------------------------------------------------------
// ALFX format (little-endian, no padding):
//   "ALFX" | version u32 (=1) | N u64 | D u32 | K u32 | name_len u16 | name
//   | labels N x i32 | features N x D x f32 row-major
// ---------------------------------------------------------------------------

namespace alfx {

inline constexpr char kMagic[4] = {'A', 'L', 'F', 'X'};
inline constexpr std::uint32_t kVersion = 1;

namespace detail {

template <typename T>
void put(std::vector<unsigned char>& out, T value) {
  std::uint64_t bits = 0;
  if constexpr (std::is_same_v<T, float>) {
    std::uint32_t u;
    std::memcpy(&u, &value, 4);
    bits = u;
  } else {
    bits = static_cast<std::uint64_t>(value);
  }
  for (std::size_t i = 0; i < sizeof(T); ++i) out.push_back(static_cast<unsigned char>(bits >> (8 * i)));
}

class Reader {
 public:
  explicit Reader(const std::vector<unsigned char>& bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* field) {
    if (bytes_.size() - pos_ < sizeof(T))
      throw FormatError("alfx: truncated while reading " + std::string(field));
    std::uint64_t bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
      bits |= static_cast<std::uint64_t>(bytes_[pos_ + i]) << (8 * i);
    pos_ += sizeof(T);
    if constexpr (std::is_same_v<T, float>) {
      auto u = static_cast<std::uint32_t>(bits);
      float f;
      std::memcpy(&f, &u, 4);
      return f;
    } else {
      return static_cast<T>(bits);
    }
  }

  std::string bytes(std::size_t n, const char* field) {
    if (bytes_.size() - pos_ < n) throw FormatError("alfx: truncated while reading " + std::string(field));
    std::string s(reinterpret_cast<const char*>(bytes_.data() + pos_), n);
    pos_ += n;
    return s;
  }

  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  const std::vector<unsigned char>& bytes_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline std::vector<unsigned char> encode(const Dataset& d) {
  d.validate();
  require(d.name.size() <= 0xFFFF, "alfx: name longer than 65535 bytes");
  std::vector<unsigned char> out;
  out.reserve(32 + d.name.size() + 4 * d.labels.size() + 4 * static_cast<std::size_t>(d.features.size()));
  out.insert(out.end(), std::begin(kMagic), std::end(kMagic));
  detail::put<std::uint32_t>(out, kVersion);
  detail::put<std::uint64_t>(out, static_cast<std::uint64_t>(d.size()));
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(d.dim()));
  detail::put<std::uint32_t>(out, static_cast<std::uint32_t>(d.num_classes));
  detail::put<std::uint16_t>(out, static_cast<std::uint16_t>(d.name.size()));
  out.insert(out.end(), d.name.begin(), d.name.end());
  for (auto y : d.labels) detail::put<std::int32_t>(out, y);
  for (Index r = 0; r < d.features.rows(); ++r)
    for (Index c = 0; c < d.features.cols(); ++c) detail::put<float>(out, d.features(r, c));
  return out;
}

inline Dataset decode(const std::vector<unsigned char>& bytes) {
  detail::Reader in(bytes);
  const std::string magic = in.bytes(4, "magic");
  if (magic != std::string(kMagic, 4)) throw FormatError("alfx: bad magic (expected 'ALFX')");
  const auto version = in.get<std::uint32_t>("version");
  if (version != kVersion)
    throw FormatError("alfx: unsupported version " + std::to_string(version));
  const auto n = in.get<std::uint64_t>("N");
  const auto d = in.get<std::uint32_t>("D");
  const auto k = in.get<std::uint32_t>("K");
  const auto name_len = in.get<std::uint16_t>("name length");
  if (d == 0) throw FormatError("alfx: field D must be >= 1");
  if (k == 0 || k > 0x7FFFFFFFu) throw FormatError("alfx: field K out of range");
  // Size check before allocating so a corrupt N cannot trigger a huge allocation.
  const std::uint64_t payload = static_cast<std::uint64_t>(name_len) + 4 * n + 4 * n * d;
  if (n > (std::uint64_t{1} << 40) || in.remaining() < payload)
    throw FormatError("alfx: truncated: header declares N=" + std::to_string(n) + ", D=" +
                      std::to_string(d) + " but file is too short");

  Dataset out;
  out.name = in.bytes(name_len, "name");
  out.num_classes = static_cast<int>(k);
  out.labels.resize(n);
  for (auto& y : out.labels) y = in.get<std::int32_t>("labels");
  out.features.resize(static_cast<Index>(n), static_cast<Index>(d));
  for (Index r = 0; r < out.features.rows(); ++r)
    for (Index c = 0; c < out.features.cols(); ++c) out.features(r, c) = in.get<float>("features");
  if (in.remaining() != 0)
    throw FormatError("alfx: " + std::to_string(in.remaining()) + " trailing bytes after features");
  out.validate();
  return out;
}

}  // namespace alfx

inline Dataset load_feature_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open feature file " + path.string());
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  return alfx::decode(bytes);
}

inline void write_feature_file(const Dataset& dataset, const std::filesystem::path& path) {
  const auto bytes = alfx::encode(dataset);
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open " + path.string() + " for writing");
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed for " + path.string());
}

// ---------------------------------------------------------------------------
// Synthetic data
// ---------------------------------------------------------------------------

struct SyntheticSpec {
  int num_classes = 10;
  int dim = 32;
  int per_class = 500;
  double cluster_spread = 1.0;
  double class_separation = 4.0;
  std::uint64_t seed = 0;

  void validate() const {
    require(num_classes >= 1, "synthetic: num_classes must be >= 1");
    require(dim >= 1, "synthetic: dim must be >= 1");
    require(per_class >= 2, "synthetic: per_class must be >= 2");
    require(cluster_spread > 0.0, "synthetic: cluster_spread must be > 0");
    require(class_separation >= 0.0, "synthetic: class_separation must be >= 0");
  }
};

/// Gaussian mixture. Centroids are standard-normal draws rescaled so their mean
/// pairwise distance equals class_separation exactly; instances are laid out
/// class-major.
inline Dataset generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const int k = spec.num_classes;
  const int d = spec.dim;
  Rng rng(mix64(spec.seed, 0x53594e5448ULL));

  Eigen::MatrixXd centroids(k, d);
  for (int c = 0; c < k; ++c)
    for (int j = 0; j < d; ++j) centroids(c, j) = rng.normal();
  if (k > 1) {
    double total = 0.0;
    for (int a = 0; a < k; ++a)
      for (int b = a + 1; b < k; ++b) total += (centroids.row(a) - centroids.row(b)).norm();
    const double mean = total / (0.5 * k * (k - 1));
    centroids *= (mean > 0.0 ? spec.class_separation / mean : 0.0);
  } else {
    centroids.setZero();
  }

  Dataset out;
  out.num_classes = k;
  out.name = "synthetic-k" + std::to_string(k) + "-d" + std::to_string(d) + "-seed" +
             std::to_string(spec.seed);
  const Index n = static_cast<Index>(k) * spec.per_class;
  out.features.resize(n, d);
  out.labels.resize(static_cast<std::size_t>(n));
  Index row = 0;
  for (int c = 0; c < k; ++c) {
    for (int i = 0; i < spec.per_class; ++i, ++row) {
      out.labels[static_cast<std::size_t>(row)] = c;
      for (int j = 0; j < d; ++j)
        out.features(row, j) = static_cast<float>(centroids(c, j) + spec.cluster_spread * rng.normal());
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Pools
// ---------------------------------------------------------------------------

/// Disjoint sorted index sets. Successor states are built with with_labeled().
struct PoolState {
  IndexList labeled;
  IndexList unlabeled;
  IndexList eval;

  IndexList train() const {
    IndexList all;
    all.reserve(labeled.size() + unlabeled.size());
    std::merge(labeled.begin(), labeled.end(), unlabeled.begin(), unlabeled.end(),
               std::back_inserter(all));
    return all;
  }

  /// Moves `batch` from unlabeled to labeled.
  PoolState with_labeled(const IndexList& batch) const {
    IndexList sorted = batch;
    std::sort(sorted.begin(), sorted.end());
    require(std::adjacent_find(sorted.begin(), sorted.end()) == sorted.end(),
            "pool: batch contains duplicate indices");
    PoolState next;
    next.eval = eval;
    std::set_difference(unlabeled.begin(), unlabeled.end(), sorted.begin(), sorted.end(),
                        std::back_inserter(next.unlabeled));
    require(next.unlabeled.size() + sorted.size() == unlabeled.size(),
            "pool: batch contains indices that are not unlabeled");
    std::merge(labeled.begin(), labeled.end(), sorted.begin(), sorted.end(),
               std::back_inserter(next.labeled));
    return next;
  }

  friend bool operator==(const PoolState&, const PoolState&) = default;
};

/// Stratified train/eval partition (largest-remainder apportionment of the
/// eval size across classes). Every class keeps >= 1 instance on each side.
inline PoolState make_splits(const Dataset& dataset, double eval_fraction, std::uint64_t seed) {
  require(eval_fraction > 0.0 && eval_fraction < 1.0, "splits: eval_fraction must be in (0, 1)");
  const int k = dataset.num_classes;
  const Index n = dataset.size();
  const auto eval_total = static_cast<Index>(std::llround(eval_fraction * static_cast<double>(n)));
  require(eval_total >= k, "splits: eval set of " + std::to_string(eval_total) +
                               " instances cannot hold all " + std::to_string(k) + " classes");

  std::vector<IndexList> by_class(static_cast<std::size_t>(k));
  for (Index i = 0; i < n; ++i) by_class[static_cast<std::size_t>(dataset.label(i))].push_back(i);

  std::vector<Index> quota(static_cast<std::size_t>(k));
  std::vector<std::pair<double, int>> remainders;
  Index assigned = 0;
  for (int c = 0; c < k; ++c) {
    const double exact = eval_fraction * static_cast<double>(by_class[static_cast<std::size_t>(c)].size());
    quota[static_cast<std::size_t>(c)] = static_cast<Index>(std::floor(exact));
    assigned += quota[static_cast<std::size_t>(c)];
    remainders.emplace_back(exact - std::floor(exact), c);
  }
  std::stable_sort(remainders.begin(), remainders.end(),
                   [](const auto& a, const auto& b) { return a.first > b.first; });
  for (std::size_t i = 0; assigned < eval_total && i < remainders.size(); ++i, ++assigned)
    ++quota[static_cast<std::size_t>(remainders[i].second)];

  Rng rng(mix64(seed, 0x53504c4954ULL));
  PoolState pool;
  for (int c = 0; c < k; ++c) {
    auto& members = by_class[static_cast<std::size_t>(c)];
    const Index q = quota[static_cast<std::size_t>(c)];
    require(q >= 1, "splits: class " + std::to_string(c) + " would be absent from the eval split");
    require(static_cast<Index>(members.size()) - q >= 1,
            "splits: class " + std::to_string(c) + " would be absent from the train split");
    rng.shuffle(members);
    pool.eval.insert(pool.eval.end(), members.begin(), members.begin() + q);
    pool.unlabeled.insert(pool.unlabeled.end(), members.begin() + q, members.end());
  }
  std::sort(pool.eval.begin(), pool.eval.end());
  std::sort(pool.unlabeled.begin(), pool.unlabeled.end());
  return pool;
}

}  // namespace bossal
