#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace gtap {

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
//
// A stream is identified by (key, a, b). Every draw is a pure function of
// (key, a, b, draw index), so work items that derive their own stream from a
// stable identity (player id, sample index, grid cell) produce the same
// numbers regardless of which thread runs them or in which order.
class CounterRng {
 public:
  CounterRng(std::uint64_t key, std::uint32_t a, std::uint32_t b);

  std::uint64_t next_u64();
  // Uniform on [0, 1) with 53 random bits.
  double uniform();
  bool bernoulli(double p) { return uniform() < p; }
  // Uniform integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound);
  // Standard normal via Box-Muller (portable, unlike std::normal_distribution).
  double normal();

  template <typename T>
  void shuffle(std::span<T> values) {
    for (std::size_t i = values.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      std::swap(values[i - 1], values[j]);
    }
  }
  template <typename T>
  void shuffle(std::vector<T>& values) {
    shuffle(std::span<T>(values));
  }

  static std::array<std::uint32_t, 4> philox(std::array<std::uint32_t, 4> ctr,
                                             std::array<std::uint32_t, 2> key);

 private:
  void refill();

  std::array<std::uint32_t, 2> key_;
  std::uint32_t a_;
  std::uint32_t b_;
  std::uint64_t draw_ = 0;
  std::array<std::uint32_t, 4> block_{};
  int cursor_ = 4;
  bool has_spare_normal_ = false;
  double spare_normal_ = 0.0;
};

// Stream domains keep unrelated uses of one master seed apart.
enum class RngDomain : std::uint32_t {
  kCoalition = 1,
  kPermutation = 2,
  kPool = 3,
  kMcue = 4,
  kBootstrap = 5,
  kInit = 6,
  kShuffle = 7,
  kSynthetic = 8,
  kSplit = 9,
  kBaseline = 10,
  kSubsample = 11,
  kDropout = 12,
};

// SplitMix64-style mixing of a seed with up to three identifiers.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                          std::uint64_t b = 0, std::uint64_t c = 0);

inline std::uint64_t domain_key(std::uint64_t seed, RngDomain domain) {
  return derive_seed(seed, static_cast<std::uint64_t>(domain));
}

}  // namespace gtap
