#pragma once

// Shared vocabulary: error types, index aliases and the deterministic RNG
// used by every module. All randomness in the engine flows through Rng so
// that runs replay bit-exactly across standard library implementations
// (std:: distributions are implementation-defined, so none are used).

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace bossal {

using Index = std::int64_t;
using IndexList = std::vector<Index>;

/// Bad input: invariant or precondition violation on user-supplied data.
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed on-disk data.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline void require(bool cond, const std::string& what) {
  if (!cond) throw ValidationError(what);
}

// ---------------------------------------------------------------------------
// Seed splitting.
//
//   fmix(z):  z ^= z >> 30; z *= 0xbf58476d1ce4e5b9;
//             z ^= z >> 27; z *= 0x94d049bb133111eb; z ^= z >> 31
//   mix64(w1..wn):  h = 0; for each w: h = fmix(h + 0x9e3779b97f4a7c15 ^ w)
//
// i.e. h = fmix((h + golden) ^ w). This is the documented replay contract;
// changing it changes every result.
// ---------------------------------------------------------------------------

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

constexpr std::uint64_t splitmix_finalize(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

constexpr std::uint64_t mix64(std::initializer_list<std::uint64_t> words) noexcept {
  std::uint64_t h = 0;
  for (std::uint64_t w : words) h = splitmix_finalize((h + kGolden) ^ w);
  return h;
}

template <typename... Words>
constexpr std::uint64_t mix64(Words... words) noexcept {
  return mix64({static_cast<std::uint64_t>(words)...});
}

/// xoshiro256** seeded through SplitMix64.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) noexcept {
    std::uint64_t x = seed;
    for (auto& s : state_) {
      x += kGolden;
      s = splitmix_finalize(x);
    }
  }

  std::uint64_t next_u64() noexcept {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n), unbiased (Lemire's method with rejection).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw ValidationError("Rng::below: empty range");
    __uint128_t m = static_cast<__uint128_t>(next_u64()) * n;
    auto low = static_cast<std::uint64_t>(m);
    if (low < n) {
      const std::uint64_t threshold = (0 - n) % n;
      while (low < threshold) {
        m = static_cast<__uint128_t>(next_u64()) * n;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  /// Uniform integer in the closed range [lo, hi].
  Index between(Index lo, Index hi) {
    require(lo <= hi, "Rng::between: lo > hi");
    return lo + static_cast<Index>(below(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  /// Standard normal via Box-Muller (one value per call, no caching).
  double normal() noexcept {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  bool bernoulli(double p) noexcept { return uniform() < p; }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const auto j = static_cast<std::size_t>(below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  /// k distinct elements of `from`, uniformly without replacement, in draw order.
  template <typename T>
  std::vector<T> sample(const std::vector<T>& from, std::size_t k) {
    require(k <= from.size(), "Rng::sample: k exceeds population");
    std::vector<T> pool = from;
    for (std::size_t i = 0; i < k; ++i) {
      const auto j = i + static_cast<std::size_t>(below(pool.size() - i));
      std::swap(pool[i], pool[j]);
    }
    pool.resize(k);
    return pool;
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4]{};
};

}  // namespace bossal
