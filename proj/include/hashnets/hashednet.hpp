#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "hashnets/activation.hpp"
#include "hashnets/hashing.hpp"
#include "hashnets/linalg.hpp"

namespace hashnets {

/// Bucket assignment h : [k] x [n] -> [B], flattened as (i, j) -> i * n + j.
class HashIndex {
 public:
  HashIndex(std::size_t n, std::size_t k, std::size_t buckets, KWiseHash hash);
  /// Explicit assignment (e.g. an injective relabeling); length k * n.
  HashIndex(std::size_t n, std::size_t k, std::size_t buckets, std::vector<std::uint32_t> assignment);

  /// Hash of degree t (0 means ceil(log2(k n))). With `balanced`, draws are
  /// repeated until every load lies in [kn/(2B), 2kn/B], the event the
  /// lifting sandwich relies on.
  static HashIndex random(std::size_t n, std::size_t k, std::size_t buckets, Rng& rng, std::size_t t = 0,
                          bool balanced = false);
  /// Identity map; requires buckets == k * n.
  static HashIndex injective(std::size_t n, std::size_t k);

  std::size_t inputs() const { return n_; }
  std::size_t hidden() const { return k_; }
  std::size_t buckets() const { return buckets_; }
  std::uint32_t operator()(std::size_t i, std::size_t j) const { return assignment_[i * n_ + j]; }
  const std::vector<std::uint32_t>& assignment() const { return assignment_; }
  const std::optional<KWiseHash>& hash() const { return hash_; }
  BucketLoads loads() const { return bucket_loads(assignment_, buckets_); }

 private:
  std::size_t n_, k_, buckets_;
  std::optional<KWiseHash> hash_;
  std::vector<std::uint32_t> assignment_;
};

/// Shared-weight layer: bucket values w in R^B plus the hash index.
struct HashedLayer {
  HashIndex index;
  DenseVector w;
};

/// k x n virtual matrix with entry (i, j) = w[h(i, j)].
DenseMatrix expand_virtual(const HashIndex& index, std::span<const double> w);
inline DenseMatrix expand_virtual(const HashedLayer& layer) { return expand_virtual(layer.index, layer.w.span()); }

/// b[i n + j] = a[h(i, j)].
DenseVector lift_vector(std::span<const double> a, const HashIndex& index);

/// The fixed part of the regression problem: hash, output weights, activation.
struct HashedProblem {
  HashIndex index;
  DenseVector v;
  Activation activation = Activation::relu();
};

/// Planted one-hidden-layer HashedNet y = sum_i v_i phi(<w_hat_i, x>).
struct TeacherSpec {
  HashedProblem problem;
  DenseVector w_star;
  /// Growth power of phi' used in the spectral upper bound.
  double growth_power = 0.0;

  std::size_t inputs() const { return problem.index.inputs(); }
  std::size_t hidden() const { return problem.index.hidden(); }
  std::size_t buckets() const { return problem.index.buckets(); }
};

struct TeacherOptions {
  std::size_t n = 8;
  std::size_t k = 3;
  std::size_t buckets = 12;
  Activation activation = Activation::relu();
  /// ones: v* = 1; signs: random +-1.
  enum class OutputWeights { Ones, Signs } output_weights = OutputWeights::Ones;
  bool balanced_hash = true;
  std::size_t hash_degree = 0;
};

/// Draws hash, w* ~ N(0, I_B) and v*. Retries until rank(W_hat*) = k
/// (sigma_k > 1e-6 sigma_1); throws RankDeficient if that never happens.
TeacherSpec make_teacher(const TeacherOptions& options, Rng& rng);

double teacher_label(const TeacherSpec& teacher, std::span<const double> x);

/// m samples; column c of `x` is sample c.
struct SampleSet {
  DenseMatrix x;
  DenseVector y;

  std::size_t size() const { return y.size(); }
  std::size_t dim() const { return x.rows(); }
};

/// x ~ N(0, I_n), labels from the teacher.
SampleSet sample_dataset(const TeacherSpec& teacher, std::size_t m, Rng& rng);

/// F_S(w) = 1/(2m) sum (sum_i v_i phi(<w_hat_i, x>) - y)^2.
double empirical_risk(std::span<const double> w, const SampleSet& samples, const HashedProblem& problem);

/// Analytic gradient of F_S with per-bucket accumulation.
DenseVector risk_gradient(std::span<const double> w, const SampleSet& samples, const HashedProblem& problem);

/// Hessian of F_S for piecewise-linear phi:
/// H_pq = 1/m sum u_p u_q with u_p = sum_i v_i phi'(z_i) sum_{j: h(i,j)=p} x_j.
/// Throws UnsupportedActivation for smooth activations.
DenseMatrix risk_hessian(std::span<const double> w, const SampleSet& samples, const HashedProblem& problem);

/// Same quadratic form for the unhashed network at virtual weights
/// `w_hat` (k x n): a (k n) x (k n) matrix indexed by i n + j.
DenseMatrix full_hessian(const DenseMatrix& w_hat, const SampleSet& samples, std::span<const double> v,
                         const Activation& activation);

/// max over `vectors` random a of the relative gap between a^T H_hash a
/// and lift(a)^T H_full lift(a), both at w*.
double hessian_reduction_check(const TeacherSpec& teacher, const SampleSet& samples, std::size_t vectors, Rng& rng);

/// Gaussian moments of phi' and the resulting rho(sigma).
struct RhoTerms {
  double alpha0 = 0.0, alpha1 = 0.0, alpha2 = 0.0;
  double beta0 = 0.0, beta2 = 0.0;
  double rho = 0.0;
};

/// alpha_q = E[phi'(sigma z) z^q], beta_q = E[phi'(sigma z)^2 z^q], z ~ N(0,1);
/// rho = min(beta0 - alpha0^2 - alpha1^2, beta2 - alpha1^2 - alpha2^2, alpha0 alpha2 - alpha1^2).
RhoTerms rho_terms(const Activation& activation, double sigma);
inline double rho(const Activation& activation, double sigma) { return rho_terms(activation, sigma).rho; }

struct SpectralParams {
  DenseVector sigma;  // singular values of W_hat*, descending
  double kappa = 1.0;
  double lambda = 1.0;
  double v_max = 0.0, v_min = 0.0, nu = 1.0;
  double rho = 0.0;
  double growth_power = 0.0;
  double a_min = 0.0;  // v_min^2 rho(sigma_k) / (kappa^2 lambda)
  double a_max = 0.0;  // k v_max^2 sigma_1^(2p)
  double m0 = 0.0;     // (k n / (2B)) a_min
  double big_m0 = 0.0; // (2 k n / B) a_max
};

/// Throws RankDeficient when sigma_k <= 1e-6 sigma_1.
SpectralParams spectrum_bounds(const TeacherSpec& teacher);

/// w* + fraction ||w*|| u with u uniform on the unit sphere.
DenseVector perturbed_init(std::span<const double> w_star, double fraction, Rng& rng);

struct RecoveryTrace {
  std::vector<double> sq_error;  // ||w_t - w*||^2, t = 0 .. steps_run
  std::vector<double> ratios;    // sq_error[t+1] / sq_error[t]
  double step_size = 0.0;
  double m0 = 0.0;
  double big_m0 = 0.0;
  bool diverged = false;

  std::size_t steps_run() const { return ratios.size(); }
  /// Fraction of steps with sq_error[t+1] <= sq_error[t].
  double non_increasing_fraction() const;
};

/// Full-batch gradient descent on F_S. step_size <= 0 selects 1/M0.
/// Stops early (diverged = true) once the error exceeds 10x its start.
RecoveryTrace gd_recover(const TeacherSpec& teacher, const SampleSet& samples, std::span<const double> w_init,
                         std::size_t steps, double step_size = 0.0);

}  // namespace hashnets
