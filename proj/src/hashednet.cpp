#include "hashnets/hashednet.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "hashnets/error.hpp"
#include "hashnets/parallel.hpp"

namespace hashnets {

namespace {
constexpr std::size_t kSampleChunk = 512;
constexpr int kMaxHashAttempts = 10000;
constexpr int kMaxTeacherAttempts = 100;
}  // namespace

HashIndex::HashIndex(std::size_t n, std::size_t k, std::size_t buckets, KWiseHash hash)
    : n_(n), k_(k), buckets_(buckets), hash_(std::move(hash)) {
  require(n >= 1 && k >= 1 && buckets >= 1, "hash index needs n, k, B >= 1");
  require(hash_->domain() == n * k && hash_->range() == buckets, "hash shape does not match k n -> B");
  assignment_ = hash_->materialize();
}

HashIndex::HashIndex(std::size_t n, std::size_t k, std::size_t buckets, std::vector<std::uint32_t> assignment)
    : n_(n), k_(k), buckets_(buckets), assignment_(std::move(assignment)) {
  require(n >= 1 && k >= 1 && buckets >= 1, "hash index needs n, k, B >= 1");
  require(assignment_.size() == n * k, "assignment length must be k n");
  for (auto b : assignment_) require(b < buckets, "assignment bucket out of range");
}

HashIndex HashIndex::random(std::size_t n, std::size_t k, std::size_t buckets, Rng& rng, std::size_t t, bool balanced) {
  const std::size_t domain = n * k;
  const std::size_t degree = t == 0 ? default_hash_degree(domain) : t;
  for (int attempt = 0; attempt < kMaxHashAttempts; ++attempt) {
    HashIndex idx(n, k, buckets, KWiseHash(degree, domain, buckets, rng));
    if (!balanced || lifting_band_check(idx.loads()).pass) return idx;
  }
  throw CapacityError("no balanced hash found for kn=" + std::to_string(domain) + ", B=" + std::to_string(buckets));
}

HashIndex HashIndex::injective(std::size_t n, std::size_t k) {
  std::vector<std::uint32_t> a(n * k);
  std::iota(a.begin(), a.end(), 0u);
  return HashIndex(n, k, n * k, std::move(a));
}

DenseMatrix expand_virtual(const HashIndex& index, std::span<const double> w) {
  require(w.size() == index.buckets(), "bucket vector length must equal B");
  DenseMatrix out(index.hidden(), index.inputs());
  for (std::size_t i = 0; i < index.hidden(); ++i)
    for (std::size_t j = 0; j < index.inputs(); ++j) out(i, j) = w[index(i, j)];
  return out;
}

DenseVector lift_vector(std::span<const double> a, const HashIndex& index) {
  require(a.size() == index.buckets(), "lift: vector length must equal B");
  DenseVector b(index.assignment().size());
  for (std::size_t q = 0; q < b.size(); ++q) b[q] = a[index.assignment()[q]];
  return b;
}

TeacherSpec make_teacher(const TeacherOptions& options, Rng& rng) {
  require(options.k <= options.n, "teacher rank k needs k <= n");
  for (int attempt = 0; attempt < kMaxTeacherAttempts; ++attempt) {
    HashIndex index = HashIndex::random(options.n, options.k, options.buckets, rng, options.hash_degree, options.balanced_hash);
    DenseVector w = gaussian_vector(options.buckets, rng);
    DenseVector v(options.k, 1.0);
    if (options.output_weights == TeacherOptions::OutputWeights::Signs)
      for (auto& x : v) x = rng.sign();
    const DenseVector sigma = singular_values(expand_virtual(index, w.span()));
    if (sigma[options.k - 1] > 1e-6 * sigma[0])
      return TeacherSpec{HashedProblem{std::move(index), std::move(v), options.activation}, std::move(w),
                         options.activation.growth_power()};
  }
  throw RankDeficient("could not draw a teacher with rank(W_hat*) = k");
}

namespace {

// z = W_hat x for one sample, returned as the pre-activations of the k units.
void pre_activations(const DenseMatrix& w_hat, std::span<const double> x, std::vector<double>& z) {
  std::fill(z.begin(), z.end(), 0.0);
  for (std::size_t j = 0; j < w_hat.cols(); ++j) {
    const double xj = x[j];
    const auto c = w_hat.col(j);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] += c[i] * xj;
  }
}

double network_output(std::span<const double> z, std::span<const double> v, const Activation& act) {
  double out = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) out += v[i] * act.value(z[i]);
  return out;
}

void check_problem(std::span<const double> w, const SampleSet& samples, const HashedProblem& problem) {
  require(w.size() == problem.index.buckets(), "w must have length B");
  require(samples.dim() == problem.index.inputs(), "sample dimension must equal n");
  require(problem.v.size() == problem.index.hidden(), "v must have length k");
  require(samples.size() >= 1, "need at least one sample");
}

DenseVector add(DenseVector a, const DenseVector& b) {
  for (std::size_t i = 0; i < a.size(); ++i) a[i] += b[i];
  return a;
}

DenseMatrix add(DenseMatrix a, const DenseMatrix& b) {
  auto as = a.span();
  auto bs = b.span();
  for (std::size_t i = 0; i < as.size(); ++i) as[i] += bs[i];
  return a;
}

}  // namespace

double teacher_label(const TeacherSpec& teacher, std::span<const double> x) {
  require(x.size() == teacher.inputs(), "label: input length must equal n");
  const DenseMatrix w_hat = expand_virtual(teacher.problem.index, teacher.w_star.span());
  std::vector<double> z(teacher.hidden());
  pre_activations(w_hat, x, z);
  return network_output(z, teacher.problem.v.span(), teacher.problem.activation);
}

SampleSet sample_dataset(const TeacherSpec& teacher, std::size_t m, Rng& rng) {
  require(m >= 1, "need m >= 1 samples");
  SampleSet s{gaussian_matrix(teacher.inputs(), m, rng), DenseVector(m)};
  const DenseMatrix w_hat = expand_virtual(teacher.problem.index, teacher.w_star.span());
  std::vector<double> z(teacher.hidden());
  for (std::size_t c = 0; c < m; ++c) {
    pre_activations(w_hat, s.x.col(c), z);
    s.y[c] = network_output(z, teacher.problem.v.span(), teacher.problem.activation);
  }
  return s;
}

double empirical_risk(std::span<const double> w, const SampleSet& samples, const HashedProblem& problem) {
  check_problem(w, samples, problem);
  const DenseMatrix w_hat = expand_virtual(problem.index, w);
  const double total = chunked_reduce(
      samples.size(), kSampleChunk,
      [&](std::size_t begin, std::size_t end) {
        std::vector<double> z(problem.index.hidden());
        double acc = 0.0;
        for (std::size_t c = begin; c < end; ++c) {
          pre_activations(w_hat, samples.x.col(c), z);
          const double r = network_output(z, problem.v.span(), problem.activation) - samples.y[c];
          acc += r * r;
        }
        return acc;
      },
      std::plus<>());
  return total / (2.0 * static_cast<double>(samples.size()));
}

DenseVector risk_gradient(std::span<const double> w, const SampleSet& samples, const HashedProblem& problem) {
  check_problem(w, samples, problem);
  const auto& index = problem.index;
  const DenseMatrix w_hat = expand_virtual(index, w);
  const std::size_t k = index.hidden();
  const std::size_t n = index.inputs();
  DenseVector g = chunked_reduce(
      samples.size(), kSampleChunk,
      [&](std::size_t begin, std::size_t end) {
        DenseVector acc(index.buckets());
        std::vector<double> z(k);
        for (std::size_t c = begin; c < end; ++c) {
          const auto x = samples.x.col(c);
          pre_activations(w_hat, x, z);
          const double r = network_output(z, problem.v.span(), problem.activation) - samples.y[c];
          for (std::size_t i = 0; i < k; ++i) {
            const double coef = r * problem.v[i] * problem.activation.derivative(z[i]);
            if (coef == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) acc[index(i, j)] += coef * x[j];
          }
        }
        return acc;
      },
      [](DenseVector a, DenseVector b) { return add(std::move(a), b); });
  const double inv_m = 1.0 / static_cast<double>(samples.size());
  for (auto& x : g) x *= inv_m;
  return g;
}

DenseMatrix risk_hessian(std::span<const double> w, const SampleSet& samples, const HashedProblem& problem) {
  check_problem(w, samples, problem);
  if (!problem.activation.piecewise_linear())
    throw UnsupportedActivation("Hessian formula needs a piecewise-linear activation, got " + problem.activation.name());
  const auto& index = problem.index;
  const DenseMatrix w_hat = expand_virtual(index, w);
  const std::size_t k = index.hidden();
  const std::size_t n = index.inputs();
  const std::size_t nb = index.buckets();
  DenseMatrix h = chunked_reduce(
      samples.size(), kSampleChunk,
      [&](std::size_t begin, std::size_t end) {
        DenseMatrix acc(nb, nb);
        std::vector<double> z(k), u(nb);
        for (std::size_t c = begin; c < end; ++c) {
          const auto x = samples.x.col(c);
          pre_activations(w_hat, x, z);
          std::fill(u.begin(), u.end(), 0.0);
          for (std::size_t i = 0; i < k; ++i) {
            const double coef = problem.v[i] * problem.activation.derivative(z[i]);
            if (coef == 0.0) continue;
            for (std::size_t j = 0; j < n; ++j) u[index(i, j)] += coef * x[j];
          }
          for (std::size_t q = 0; q < nb; ++q) {
            const double uq = u[q];
            if (uq == 0.0) continue;
            for (std::size_t p = 0; p <= q; ++p) acc(p, q) += u[p] * uq;
          }
        }
        return acc;
      },
      [](DenseMatrix a, DenseMatrix b) { return add(std::move(a), b); });
  const double inv_m = 1.0 / static_cast<double>(samples.size());
  for (std::size_t q = 0; q < nb; ++q)
    for (std::size_t p = 0; p <= q; ++p) {
      h(p, q) *= inv_m;
      h(q, p) = h(p, q);
    }
  return h;
}

DenseMatrix full_hessian(const DenseMatrix& w_hat, const SampleSet& samples, std::span<const double> v,
                         const Activation& activation) {
  require(w_hat.cols() == samples.dim(), "virtual matrix width must equal n");
  require(v.size() == w_hat.rows(), "v must have length k");
  if (!activation.piecewise_linear())
    throw UnsupportedActivation("Hessian formula needs a piecewise-linear activation, got " + activation.name());
  const std::size_t k = w_hat.rows();
  const std::size_t n = w_hat.cols();
  const std::size_t dim = k * n;
  DenseMatrix h = chunked_reduce(
      samples.size(), kSampleChunk,
      [&](std::size_t begin, std::size_t end) {
        DenseMatrix acc(dim, dim);
        std::vector<double> z(k), u(dim);
        for (std::size_t c = begin; c < end; ++c) {
          const auto x = samples.x.col(c);
          pre_activations(w_hat, x, z);
          for (std::size_t i = 0; i < k; ++i) {
            const double coef = v[i] * activation.derivative(z[i]);
            for (std::size_t j = 0; j < n; ++j) u[i * n + j] = coef * x[j];
          }
          for (std::size_t q = 0; q < dim; ++q) {
            const double uq = u[q];
            if (uq == 0.0) continue;
            for (std::size_t p = 0; p <= q; ++p) acc(p, q) += u[p] * uq;
          }
        }
        return acc;
      },
      [](DenseMatrix a, DenseMatrix b) { return add(std::move(a), b); });
  const double inv_m = 1.0 / static_cast<double>(samples.size());
  for (std::size_t q = 0; q < dim; ++q)
    for (std::size_t p = 0; p <= q; ++p) {
      h(p, q) *= inv_m;
      h(q, p) = h(p, q);
    }
  return h;
}

namespace {

double quadratic_form(const DenseMatrix& h, std::span<const double> a) {
  const DenseVector ha = matvec(h, a);
  return dot(a, ha.span());
}

}  // namespace

double hessian_reduction_check(const TeacherSpec& teacher, const SampleSet& samples, std::size_t vectors, Rng& rng) {
  const auto& problem = teacher.problem;
  const DenseMatrix h_hash = risk_hessian(teacher.w_star.span(), samples, problem);
  const DenseMatrix w_hat = expand_virtual(problem.index, teacher.w_star.span());
  const DenseMatrix h_full = full_hessian(w_hat, samples, problem.v.span(), problem.activation);
  double worst = 0.0;
  for (std::size_t r = 0; r < vectors; ++r) {
    const DenseVector a = gaussian_vector(teacher.buckets(), rng);
    const DenseVector b = lift_vector(a.span(), problem.index);
    const double lhs = quadratic_form(h_hash, a.span());
    const double rhs = quadratic_form(h_full, b.span());
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    if (scale > 0.0) worst = std::max(worst, std::abs(lhs - rhs) / scale);
  }
  return worst;
}

RhoTerms rho_terms(const Activation& activation, double sigma) {
  require(sigma > 0.0, "rho needs sigma > 0");
  using boost::math::quadrature::gauss_kronrod;
  const double inv_sqrt_2pi = 1.0 / std::sqrt(2.0 * M_PI);
  const double inf = std::numeric_limits<double>::infinity();
  // Integrate each half-line separately: phi' may jump at 0.
  auto expect = [&](auto&& g) {
    auto f = [&](double z) { return g(z) * std::exp(-0.5 * z * z) * inv_sqrt_2pi; };
    return gauss_kronrod<double, 61>::integrate(f, -inf, 0.0, 15, 1e-14) +
           gauss_kronrod<double, 61>::integrate(f, 0.0, inf, 15, 1e-14);
  };
  auto d = [&](double z) { return activation.derivative(sigma * z); };
  RhoTerms t;
  t.alpha0 = expect([&](double z) { return d(z); });
  t.alpha1 = expect([&](double z) { return d(z) * z; });
  t.alpha2 = expect([&](double z) { return d(z) * z * z; });
  t.beta0 = expect([&](double z) { return d(z) * d(z); });
  t.beta2 = expect([&](double z) { return d(z) * d(z) * z * z; });
  t.rho = std::min({t.beta0 - t.alpha0 * t.alpha0 - t.alpha1 * t.alpha1,
                    t.beta2 - t.alpha1 * t.alpha1 - t.alpha2 * t.alpha2, t.alpha0 * t.alpha2 - t.alpha1 * t.alpha1});
  return t;
}

SpectralParams spectrum_bounds(const TeacherSpec& teacher) {
  const auto& problem = teacher.problem;
  const std::size_t k = teacher.hidden();
  const std::size_t n = teacher.inputs();
  const double nb = static_cast<double>(teacher.buckets());
  SpectralParams p;
  p.sigma = singular_values(expand_virtual(problem.index, teacher.w_star.span()));
  require<RankDeficient>(p.sigma.size() >= k, "virtual matrix has fewer than k singular values");
  const double s1 = p.sigma[0];
  const double sk = p.sigma[k - 1];
  require<RankDeficient>(sk > 1e-6 * s1, "rank(W_hat*) < k: sigma_k = " + std::to_string(sk));
  p.kappa = s1 / sk;
  double log_lambda = 0.0;
  for (std::size_t i = 0; i < k; ++i) log_lambda += std::log(p.sigma[i] / sk);
  p.lambda = std::exp(log_lambda);
  p.v_max = 0.0;
  p.v_min = std::numeric_limits<double>::infinity();
  for (double v : problem.v) {
    p.v_max = std::max(p.v_max, std::abs(v));
    p.v_min = std::min(p.v_min, std::abs(v));
  }
  require(p.v_min > 0.0, "output weights must be nonzero");
  p.nu = p.v_max / p.v_min;
  p.rho = rho(problem.activation, sk);
  p.growth_power = teacher.growth_power;
  p.a_min = p.v_min * p.v_min * p.rho / (p.kappa * p.kappa * p.lambda);
  p.a_max = static_cast<double>(k) * p.v_max * p.v_max * std::pow(s1, 2.0 * p.growth_power);
  const double load = static_cast<double>(k * n) / nb;
  p.m0 = 0.5 * load * p.a_min;
  p.big_m0 = 2.0 * load * p.a_max;
  return p;
}

DenseVector perturbed_init(std::span<const double> w_star, double fraction, Rng& rng) {
  require(fraction >= 0.0, "perturbation fraction must be non-negative");
  DenseVector out(std::vector<double>(w_star.begin(), w_star.end()));
  if (fraction == 0.0) return out;
  const DenseVector dir = gaussian_vector(w_star.size(), rng);
  const double scale = fraction * norm2(w_star) / norm2(dir.span());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += scale * dir[i];
  return out;
}

double RecoveryTrace::non_increasing_fraction() const {
  if (ratios.empty()) return 1.0;
  std::size_t ok = 0;
  for (std::size_t t = 0; t < ratios.size(); ++t) ok += sq_error[t + 1] <= sq_error[t] ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(ratios.size());
}

RecoveryTrace gd_recover(const TeacherSpec& teacher, const SampleSet& samples, std::span<const double> w_init,
                         std::size_t steps, double step_size) {
  require(steps >= 1, "need at least one step");
  require(w_init.size() == teacher.buckets(), "initial point must have length B");
  const SpectralParams params = spectrum_bounds(teacher);
  RecoveryTrace trace;
  trace.m0 = params.m0;
  trace.big_m0 = params.big_m0;
  trace.step_size = step_size > 0.0 ? step_size : 1.0 / params.big_m0;

  auto sq_dist = [&](const DenseVector& w) {
    double s = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double d = w[i] - teacher.w_star[i];
      s += d * d;
    }
    return s;
  };

  DenseVector w(std::vector<double>(w_init.begin(), w_init.end()));
  trace.sq_error.push_back(sq_dist(w));
  const double start = trace.sq_error.front();
  for (std::size_t t = 0; t < steps; ++t) {
    const DenseVector g = risk_gradient(w.span(), samples, teacher.problem);
    for (std::size_t i = 0; i < w.size(); ++i) w[i] -= trace.step_size * g[i];
    const double e = sq_dist(w);
    const double prev = trace.sq_error.back();
    trace.ratios.push_back(prev > 0.0 ? e / prev : (e > 0.0 ? std::numeric_limits<double>::infinity() : 1.0));
    trace.sq_error.push_back(e);
    // squared error 100x above its start means ||w - w*|| grew 10x
    if (!std::isfinite(e) || e > 100.0 * start) {
      trace.diverged = true;
      break;
    }
  }
  return trace;
}

}  // namespace hashnets
