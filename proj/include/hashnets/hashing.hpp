#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "hashnets/rng.hpp"

namespace hashnets {

/// Degree-(t-1) polynomial over GF(p), p = 2^61 - 1, reduced mod B:
///   h(x) = ((sum_q a_q x^q) mod p) mod B.
/// Drawing the t coefficients uniformly gives a t-wise independent family
/// up to the B/p bias of the final reduction.
class KWiseHash {
 public:
  static constexpr std::uint64_t kPrime = (std::uint64_t{1} << 61) - 1;

  /// Throws InvalidInput for t, N or B of zero, CapacityError when the
  /// field cannot satisfy p > N and p > B^2 N.
  KWiseHash(std::size_t t, std::uint64_t domain, std::uint64_t range, Rng& rng);

  /// Fixed coefficients a_0 .. a_{t-1}; each must be < p.
  static KWiseHash from_coefficients(std::vector<std::uint64_t> coefficients, std::uint64_t domain, std::uint64_t range);

  std::size_t degree() const { return coefficients_.size(); }
  std::uint64_t domain() const { return domain_; }
  std::uint64_t range() const { return range_; }
  const std::vector<std::uint64_t>& coefficients() const { return coefficients_; }

  /// Throws OutOfDomain for x >= N.
  std::uint64_t operator()(std::uint64_t x) const;
  std::uint64_t eval_unchecked(std::uint64_t x) const;

  /// h(0), h(1), ..., h(N-1).
  std::vector<std::uint32_t> materialize() const;

  bool operator==(const KWiseHash&) const = default;

 private:
  KWiseHash(std::vector<std::uint64_t> coefficients, std::uint64_t domain, std::uint64_t range);

  std::vector<std::uint64_t> coefficients_;
  std::uint64_t domain_;
  std::uint64_t range_;
};

/// ceil(log2 N), at least 1.
std::size_t default_hash_degree(std::uint64_t domain);

/// 4-wise independent map [N] -> {-1, +1}.
class SignHash {
 public:
  SignHash(std::uint64_t domain, Rng& rng) : hash_(4, domain, 2, rng) {}
  explicit SignHash(KWiseHash hash);

  double operator()(std::uint64_t x) const { return hash_(x) == 0 ? -1.0 : 1.0; }
  const KWiseHash& hash() const { return hash_; }

 private:
  KWiseHash hash_;
};

struct BucketLoads {
  std::uint64_t buckets = 0;
  std::uint64_t domain = 0;
  std::vector<std::uint64_t> loads;

  double mean() const { return static_cast<double>(domain) / static_cast<double>(buckets); }
  std::uint64_t min_load() const;
  std::uint64_t max_load() const;
};

BucketLoads bucket_loads(const KWiseHash& h);
BucketLoads bucket_loads(std::span<const std::uint32_t> assignment, std::uint64_t buckets);

struct LoadCheck {
  bool pass = false;
  /// max_j |load_j - N/B| / (N/B)
  double worst_deviation = 0.0;
};

/// pass iff every load lies in [lo * N/B, hi * N/B].
LoadCheck load_band_check(const BucketLoads& loads, double lo, double hi);

/// The 0.9 / 1.1 concentration band.
LoadCheck concentration_check(const BucketLoads& loads);

/// The 1/2 / 2 band that the lifting sandwich needs.
inline LoadCheck lifting_band_check(const BucketLoads& loads) { return load_band_check(loads, 0.5, 2.0); }

/// Tail bounds for a sum X of n k-wise independent [0,1] variables with
/// mean mu: Pr[|X - mu| > a] is below both values (each clamped to [0,1]).
struct TailBounds {
  double moment_bound = 1.0;  // min(1, 8 ((k mu + k^2) / a^2)^(k/2))
  double count_bound = 1.0;   // min(1, 1.1 (n k / a^2)^(k/2))
};

/// Throws InvalidInput when k is odd or zero, or a <= 0.
TailBounds kwise_tail_bound(std::uint64_t n, std::uint64_t k, double mu, double a);

}  // namespace hashnets
