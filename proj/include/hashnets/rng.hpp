#pragma once

#include <cstdint>

namespace hashnets {

/// Counter-based generator. Output i of a stream is a pure function of
/// (key, i), so streams can be split and replayed without shared state.
/// The key is derived from (seed, stream id) with a SplitMix64 finalizer.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream() const { return stream_; }
  std::uint64_t counter() const { return counter_; }

  /// Independent child stream; does not advance this generator.
  Rng derive(std::uint64_t child) const;

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, bound), unbiased. bound must be > 0.
  std::uint64_t below(std::uint64_t bound);
  /// Standard normal via Box-Muller; the second variate is cached.
  double normal();
  /// +1 or -1 with equal probability.
  double sign();

  static std::uint64_t mix(std::uint64_t z);

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace hashnets
