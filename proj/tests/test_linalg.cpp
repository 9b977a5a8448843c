#include <doctest.h>

#include <cmath>
#include <limits>

#include "hashnets/error.hpp"
#include "hashnets/linalg.hpp"
#include "hashnets/parallel.hpp"
#include "oracles.hpp"

using namespace hashnets;

namespace {

DenseMatrix reconstruct(const SvdResult& r) {
  DenseMatrix out(r.u.rows(), r.v.rows());
  for (std::size_t k = 0; k < r.singular_values.size(); ++k)
    for (std::size_t j = 0; j < out.cols(); ++j)
      for (std::size_t i = 0; i < out.rows(); ++i) out(i, j) += r.u(i, k) * r.singular_values[k] * r.v(j, k);
  return out;
}

double orthonormality_error(const DenseMatrix& q) {
  const DenseMatrix g = matmul_tn(q, q);
  double worst = 0.0;
  for (std::size_t j = 0; j < g.cols(); ++j)
    for (std::size_t i = 0; i < g.rows(); ++i) worst = std::max(worst, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
  return worst;
}

DenseMatrix random_symmetric(std::size_t n, Rng& rng) {
  DenseMatrix a = gaussian_matrix(n, n, rng);
  DenseMatrix s(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) s(i, j) = 0.5 * (a(i, j) + a(j, i));
  return s;
}

}  // namespace

TEST_CASE("svd of a diagonal matrix returns its entries") {
  const auto r = svd(DenseMatrix::diagonal({3, 2, 1}));
  CHECK(r.singular_values[0] == doctest::Approx(3).epsilon(1e-14));
  CHECK(r.singular_values[1] == doctest::Approx(2).epsilon(1e-14));
  CHECK(r.singular_values[2] == doctest::Approx(1).epsilon(1e-14));
}

TEST_CASE("svd of the identity is all ones") {
  const auto s = singular_values(DenseMatrix::identity(4));
  for (double v : s) CHECK(v == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("squared singular values match Gram eigenvalues from QR iteration") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(seed);
    const DenseMatrix a = gaussian_matrix(6, 3, rng);
    const auto s = svd(a).singular_values;
    const auto eig = oracle::qr_eigenvalues(oracle::gram(oracle::to_rows(a)));
    REQUIRE(eig.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) CHECK(oracle::rel_diff(s[i] * s[i], eig[i]) <= 1e-8);
  }
}

TEST_CASE("svd reconstructs and has orthonormal factors") {
  Rng rng(11);
  for (auto [m, n] : {std::pair<std::size_t, std::size_t>{7, 4}, {4, 7}, {9, 9}, {1, 5}, {5, 1}}) {
    const DenseMatrix a = gaussian_matrix(m, n, rng);
    const auto r = svd(a);
    const DenseMatrix back = reconstruct(r);
    double diff = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) diff += std::pow(a.span()[i] - back.span()[i], 2);
    CHECK(std::sqrt(diff) <= 1e-10 * frobenius_norm(a));
    CHECK(orthonormality_error(r.u) <= 1e-8);
    CHECK(orthonormality_error(r.v) <= 1e-8);
    for (std::size_t i = 0; i + 1 < r.singular_values.size(); ++i) CHECK(r.singular_values[i] >= r.singular_values[i + 1]);
    CHECK(r.singular_values[r.singular_values.size() - 1] >= 0.0);
  }
}

TEST_CASE("svd of a rank-deficient matrix keeps orthonormal U") {
  DenseMatrix a(5, 3);
  for (std::size_t i = 0; i < 5; ++i) a(i, 0) = a(i, 1) = static_cast<double>(i + 1);
  const auto r = svd(a);
  CHECK(r.singular_values[2] <= 1e-12);
  CHECK(orthonormality_error(r.u) <= 1e-8);
}

TEST_CASE("svd rejects non-finite input") {
  DenseMatrix a(2, 2, 1.0);
  a(0, 1) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(svd(a), InvalidInput);
  CHECK_THROWS_AS(singular_values(DenseMatrix(0, 3)), InvalidInput);
}

TEST_CASE("sym_eig small cases") {
  const auto d = sym_eig(DenseMatrix::diagonal({5, -1}));
  CHECK(d[0] == doctest::Approx(5));
  CHECK(d[1] == doctest::Approx(-1));
  const auto e = sym_eig(DenseMatrix{{2, 1}, {1, 2}});
  CHECK(e[0] == doctest::Approx(3).epsilon(1e-14));
  CHECK(e[1] == doctest::Approx(1).epsilon(1e-14));
}

TEST_CASE("sym_eig matches QR iteration, trace and determinant") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    Rng rng(100 + seed);
    const DenseMatrix h = random_symmetric(8, rng);
    const auto e = sym_eig(h);
    const auto ref = oracle::qr_eigenvalues(oracle::to_rows(h));
    double trace = 0.0, sum = 0.0, prod = 1.0, scale = 0.0;
    for (std::size_t i = 0; i < 8; ++i) {
      CHECK(std::abs(e[i] - ref[i]) <= 1e-8 * std::max(1.0, std::abs(ref[i])));
      trace += h(i, i);
      sum += e[i];
      prod *= e[i];
      scale += std::abs(e[i]);
    }
    CHECK(std::abs(sum - trace) <= 1e-8 * scale);
    CHECK(oracle::rel_diff(prod, oracle::determinant(oracle::to_rows(h))) <= 1e-6);
    for (std::size_t i = 0; i + 1 < 8; ++i) CHECK(e[i] >= e[i + 1]);
  }
}

TEST_CASE("sym_eig rejects asymmetric and non-square input") {
  CHECK_THROWS_AS(sym_eig(DenseMatrix{{1, 2}, {0, 1}}), InvalidInput);
  CHECK_THROWS_AS(sym_eig(DenseMatrix(2, 3)), InvalidInput);
}

TEST_CASE("gaussian sampling is reproducible and standard normal") {
  Rng a(42), b(42);
  CHECK(gaussian_vector(100, a) == gaussian_vector(100, b));
  Rng rng(7);
  const DenseVector g = gaussian_vector(1000000, rng);
  double mean = 0.0, positive = 0.0;
  for (double v : g) {
    mean += v;
    positive += v > 0 ? 1.0 : 0.0;
  }
  mean /= static_cast<double>(g.size());
  double var = 0.0;
  for (double v : g) var += (v - mean) * (v - mean);
  var /= static_cast<double>(g.size() - 1);
  CHECK(std::abs(mean) <= 0.01);
  CHECK(std::abs(var - 1.0) <= 0.01);
  CHECK(std::abs(positive / static_cast<double>(g.size()) - 0.5) <= 0.005);
}

TEST_CASE("rng streams are reproducible and distinct") {
  Rng a(5, 1), b(5, 1), c(5, 2), d(6, 1);
  bool same_ac = true, same_ad = true;
  for (int i = 0; i < 32; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    same_ac = same_ac && x == c.next_u64();
    same_ad = same_ad && x == d.next_u64();
  }
  CHECK_FALSE(same_ac);
  CHECK_FALSE(same_ad);
  Rng base(9);
  Rng d0 = base.derive(0), d1 = base.derive(1), d0b = base.derive(0);
  CHECK(d0.next_u64() == d0b.next_u64());
  CHECK(d0.next_u64() != d1.next_u64());
}

TEST_CASE("rng below stays in range and uniform is in [0, 1)") {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    CHECK(rng.below(7) < 7);
    const double u = rng.uniform();
    CHECK(u >= 0.0);
    CHECK(u < 1.0);
  }
}

TEST_CASE("random_orthonormal has orthonormal columns") {
  Rng rng(1);
  CHECK(orthonormality_error(random_orthonormal(50, 6, rng)) <= 1e-12);
}

TEST_CASE("matrix kernels agree with hand values") {
  const DenseMatrix a{{1, 2}, {3, 4}};
  const DenseMatrix b{{0, 1}, {1, 0}};
  CHECK(matmul(a, b) == DenseMatrix{{2, 1}, {4, 3}});
  CHECK(matmul_tn(a, b) == DenseMatrix{{3, 1}, {4, 2}});
  CHECK(matvec(a, DenseVector{1, 1}.span()) == DenseVector{3, 7});
  CHECK(matvec_t(a, DenseVector{1, 1}.span()) == DenseVector{4, 6});
  CHECK(a.transpose() == DenseMatrix{{1, 3}, {2, 4}});
  CHECK(frobenius_norm(a) == doctest::Approx(std::sqrt(30.0)));
  CHECK(norm2(DenseVector{3, 4}.span()) == doctest::Approx(5.0));
  CHECK(approx_equal(1.0, 1.0 + 1e-10));
  CHECK_FALSE(approx_equal(1.0, 1.001));
}

TEST_CASE("chunked_reduce is independent of the worker count") {
  auto sum = [] {
    return chunked_reduce(
        100000, 128,
        [](std::size_t b, std::size_t e) {
          double s = 0.0;
          for (std::size_t i = b; i < e; ++i) s += 1.0 / static_cast<double>(i + 1);
          return s;
        },
        std::plus<>());
  };
  setenv("HASHNETS_THREADS", "1", 1);
  const double one = sum();
  setenv("HASHNETS_THREADS", "4", 1);
  const double four = sum();
  unsetenv("HASHNETS_THREADS");
  CHECK(one == four);
}

TEST_CASE("parallel_map keeps index order and rethrows") {
  const auto v = parallel_map(50, [](std::size_t i) { return i * i; });
  for (std::size_t i = 0; i < 50; ++i) CHECK(v[i] == i * i);
  CHECK_THROWS_AS(parallel_map(10, [](std::size_t i) -> int {
                    if (i == 3) throw InvalidInput("boom");
                    return 0;
                  }),
                  InvalidInput);
}
