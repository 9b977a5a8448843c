#include "hashnets/hashing.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <string>

#include "hashnets/error.hpp"

namespace hashnets {

namespace {

constexpr std::uint64_t kP = KWiseHash::kPrime;

inline std::uint64_t mod_mersenne(__uint128_t v) {
  // 2^61 = 1 (mod p): fold the high bits down twice
  std::uint64_t r = static_cast<std::uint64_t>(v & kP) + static_cast<std::uint64_t>(v >> 61);
  r = (r & kP) + (r >> 61);
  return r >= kP ? r - kP : r;
}

void validate_shape(std::uint64_t domain, std::uint64_t range) {
  require(domain >= 1, "hash domain must be >= 1");
  require(range >= 1, "hash range must be >= 1");
  require<CapacityError>(domain < kP, "hash domain does not fit below the field prime");
  const __uint128_t b2n = static_cast<__uint128_t>(range) * range * domain;
  require<CapacityError>(range < kP && b2n < kP,
                         "no 61-bit prime satisfies p > B^2 N for B=" + std::to_string(range) + ", N=" + std::to_string(domain));
}

}  // namespace

KWiseHash::KWiseHash(std::vector<std::uint64_t> coefficients, std::uint64_t domain, std::uint64_t range)
    : coefficients_(std::move(coefficients)), domain_(domain), range_(range) {}

KWiseHash::KWiseHash(std::size_t t, std::uint64_t domain, std::uint64_t range, Rng& rng) : domain_(domain), range_(range) {
  require(t >= 1, "hash degree t must be >= 1");
  validate_shape(domain, range);
  coefficients_.resize(t);
  for (auto& a : coefficients_) a = rng.below(kP);
}

KWiseHash KWiseHash::from_coefficients(std::vector<std::uint64_t> coefficients, std::uint64_t domain, std::uint64_t range) {
  require(!coefficients.empty(), "hash needs at least one coefficient");
  validate_shape(domain, range);
  for (auto a : coefficients) require(a < kP, "hash coefficient outside the field");
  return KWiseHash(std::move(coefficients), domain, range);
}

std::uint64_t KWiseHash::eval_unchecked(std::uint64_t x) const {
  std::uint64_t acc = coefficients_.back();
  for (std::size_t q = coefficients_.size() - 1; q-- > 0;) {
    acc = mod_mersenne(static_cast<__uint128_t>(acc) * x + coefficients_[q]);
  }
  return acc % range_;
}

std::uint64_t KWiseHash::operator()(std::uint64_t x) const {
  if (x >= domain_) throw OutOfDomain("hash input " + std::to_string(x) + " outside domain [0, " + std::to_string(domain_) + ")");
  return eval_unchecked(x);
}

std::vector<std::uint32_t> KWiseHash::materialize() const {
  require<CapacityError>(range_ <= (std::uint64_t{1} << 32), "range too large to materialize as 32-bit buckets");
  std::vector<std::uint32_t> out(domain_);
  for (std::uint64_t x = 0; x < domain_; ++x) out[x] = static_cast<std::uint32_t>(eval_unchecked(x));
  return out;
}

std::size_t default_hash_degree(std::uint64_t domain) {
  if (domain <= 2) return 1;
  return static_cast<std::size_t>(std::bit_width(domain - 1));
}

SignHash::SignHash(KWiseHash hash) : hash_(std::move(hash)) {
  require(hash_.range() == 2, "sign hash needs range 2");
}

std::uint64_t BucketLoads::min_load() const { return loads.empty() ? 0 : *std::min_element(loads.begin(), loads.end()); }
std::uint64_t BucketLoads::max_load() const { return loads.empty() ? 0 : *std::max_element(loads.begin(), loads.end()); }

BucketLoads bucket_loads(const KWiseHash& h) {
  BucketLoads out{h.range(), h.domain(), std::vector<std::uint64_t>(h.range(), 0)};
  for (std::uint64_t x = 0; x < h.domain(); ++x) ++out.loads[h.eval_unchecked(x)];
  return out;
}

BucketLoads bucket_loads(std::span<const std::uint32_t> assignment, std::uint64_t buckets) {
  BucketLoads out{buckets, assignment.size(), std::vector<std::uint64_t>(buckets, 0)};
  for (auto b : assignment) {
    require(b < buckets, "bucket index outside range");
    ++out.loads[b];
  }
  return out;
}

LoadCheck load_band_check(const BucketLoads& loads, double lo, double hi) {
  const double mean = loads.mean();
  LoadCheck out{true, 0.0};
  for (auto l : loads.loads) {
    const auto v = static_cast<double>(l);
    out.worst_deviation = std::max(out.worst_deviation, std::abs(v - mean) / mean);
    if (v < lo * mean || v > hi * mean) out.pass = false;
  }
  return out;
}

LoadCheck concentration_check(const BucketLoads& loads) {
  require(loads.domain >= loads.buckets, "concentration check needs N/B >= 1");
  return load_band_check(loads, 0.9, 1.1);
}

TailBounds kwise_tail_bound(std::uint64_t n, std::uint64_t k, double mu, double a) {
  require(k >= 2 && k % 2 == 0, "tail bound needs an even k >= 2");
  require(a > 0.0, "tail bound needs a > 0");
  const double kd = static_cast<double>(k);
  const double half = kd / 2.0;
  auto clamp = [](double log_value) { return log_value >= 0.0 ? 1.0 : std::exp(log_value); };
  const double moment_base = (kd * mu + kd * kd) / (a * a);
  const double count_base = static_cast<double>(n) * kd / (a * a);
  TailBounds out;
  out.moment_bound = moment_base <= 0.0 ? 0.0 : clamp(std::log(8.0) + half * std::log(moment_base));
  out.count_bound = count_base <= 0.0 ? 0.0 : clamp(std::log(1.1) + half * std::log(count_base));
  return out;
}

}  // namespace hashnets
