#pragma once

#include <cstdint>
#include <limits>

namespace chernoff {

/// xoshiro256** seeded through SplitMix64. Streams derived from
/// (seed, stream) are independent for practical purposes, which gives every
/// Monte Carlo path its own generator regardless of thread scheduling.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit Rng(std::uint64_t seed) : Rng(seed, 0) {}
  static Rng for_stream(std::uint64_t seed, std::uint64_t stream) { return Rng(seed, stream); }

  std::uint64_t seed() const noexcept { return seed_; }
  std::uint64_t stream() const noexcept { return stream_; }

  std::uint64_t next() noexcept;
  result_type operator()() noexcept { return next(); }
  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  /// Uniform double in [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

 private:
  Rng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t s_[4];
  std::uint64_t seed_;
  std::uint64_t stream_;
};

/// One SplitMix64 output for state x (the state is advanced by the golden gamma first).
std::uint64_t splitmix64(std::uint64_t x) noexcept;

}  // namespace chernoff
