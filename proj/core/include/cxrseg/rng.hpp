#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace cxrseg {

/// Counter-based random stream ("splitmix64-ctr", version 1).
///
/// Every value is a pure function of (seed, stream, counter), so a draw can be
/// replayed without re-running the draws before it. Distributions are
/// implemented here rather than taken from <random>, whose distribution
/// algorithms differ between standard libraries.
class CounterRng {
 public:
  static constexpr std::uint32_t kVersion = 1;

  CounterRng(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint64_t next_u64() noexcept;
  /// Uniform in [0, 1) with 53 random bits.
  double uniform01() noexcept;
  double uniform(double lo, double hi) noexcept;
  /// Uniform integer in [0, bound), unbiased. bound must be > 0.
  std::uint64_t below(std::uint64_t bound) noexcept;
  /// Uniform integer in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi) noexcept;
  bool bernoulli(double p) noexcept;

  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

std::uint64_t splitmix64(std::uint64_t x) noexcept;

/// Derives an independent stream key for a (seed, tag...) tuple.
std::uint64_t derive_stream(std::uint64_t a, std::uint64_t b) noexcept;

/// Fisher-Yates shuffle driven by `rng`.
template <typename T>
void shuffle(std::span<T> items, CounterRng& rng) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

/// Indices 0..n-1 in a seeded random order.
std::vector<std::size_t> random_permutation(std::size_t n, CounterRng& rng);

}  // namespace cxrseg
