#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <numbers>
#include <utility>
#include <vector>

namespace mlkit {

// Work-unit levels used both for RNG stream derivation and for picking
// which loop the worker pool parallelizes.
enum class ExecLevel : std::uint64_t {
  Benchmark = 1,
  Resample = 2,
  SelectFeatures = 3,
  TuneParams = 4,
  Instance = 5,  // resampling instantiation
  Unit = 6,      // generic sub-unit (bagging member, smote draw, ...)
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t rotl(std::uint64_t x, int k) {
  return (x << k) | (x >> (64 - k));
}

}  // namespace detail

// Deterministic, portable random stream (xoshiro256++ core). Streams are
// derived from a master seed and a hierarchical path of (level, index)
// pairs, so every work unit draws from its own stream regardless of
// scheduling or worker count.
class Rng {
public:
  Rng() : Rng(0) {}

  explicit Rng(std::uint64_t seed) : key_(seed) { reseed(); }

  // Derive the independent child stream for (level, index).
  Rng child(ExecLevel level, std::uint64_t index) const {
    std::uint64_t k = key_;
    k = mix(k, static_cast<std::uint64_t>(level));
    k = mix(k, index);
    return Rng(k, 0);
  }

  static Rng from_path(
      std::uint64_t master_seed,
      std::initializer_list<std::pair<ExecLevel, std::uint64_t>> path) {
    Rng r(master_seed);
    for (const auto& [level, index] : path) r = r.child(level, index);
    return r;
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = detail::rotl(s_[0] + s_[3], 23) + s_[0];
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = detail::rotl(s_[3], 45);
    return result;
  }

  // Uniform double in [0, 1).
  double unif() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double unif(double lo, double hi) { return lo + (hi - lo) * unif(); }

  // Uniform integer in [lo, hi], inclusive. Unbiased (Lemire rejection).
  std::int64_t unif_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t range = static_cast<std::uint64_t>(hi - lo) + 1;
    if (range == 0) return static_cast<std::int64_t>(next_u64());
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * range;
    auto low = static_cast<std::uint64_t>(m);
    if (low < range) {
      const std::uint64_t threshold = (0 - range) % range;
      while (low < threshold) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * range;
        low = static_cast<std::uint64_t>(m);
      }
    }
    return lo + static_cast<std::int64_t>(m >> 64);
  }

  // Standard normal via Box-Muller (no state carried between calls).
  double normal() {
    double u1 = unif();
    while (u1 <= 0.0) u1 = unif();
    const double u2 = unif();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  double exponential() {
    double u = unif();
    while (u <= 0.0) u = unif();
    return -std::log(u);
  }

  // Fisher-Yates permutation of 0..n-1.
  std::vector<int> permutation(int n) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    shuffle(p);
    return p;
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::int64_t i = static_cast<std::int64_t>(v.size()) - 1; i > 0; --i)
      std::swap(v[i], v[unif_int(0, i)]);
  }

  // k draws without replacement from 0..n-1, in draw order.
  std::vector<int> sample_without_replacement(int n, int k) {
    std::vector<int> pool(n);
    for (int i = 0; i < n; ++i) pool[i] = i;
    std::vector<int> out;
    out.reserve(k);
    for (int i = 0; i < k; ++i) {
      const auto j = unif_int(i, n - 1);
      std::swap(pool[i], pool[j]);
      out.push_back(pool[i]);
    }
    return out;
  }

private:
  Rng(std::uint64_t key, int) : key_(key) { reseed(); }

  static std::uint64_t mix(std::uint64_t key, std::uint64_t v) {
    std::uint64_t st = key ^ (0x9e3779b97f4a7c15ULL + v);
    detail::splitmix64(st);
    st ^= v * 0xff51afd7ed558ccdULL;
    return detail::splitmix64(st);
  }

  void reseed() {
    std::uint64_t st = key_;
    for (auto& s : s_) s = detail::splitmix64(st);
    // xoshiro must not start in the all-zero state
    if ((s_[0] | s_[1] | s_[2] | s_[3]) == 0) s_[0] = 1;
  }

  std::uint64_t key_ = 0;
  std::uint64_t s_[4] = {};
};

}  // namespace mlkit
