#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "hashnets/error.hpp"
#include "hashnets/sketch.hpp"

using namespace hashnets;

TEST_CASE("count-sketch has one +-1 per column and is seed-deterministic") {
  Rng a(4), b(4);
  const auto s1 = SketchMatrix::count_sketch(10, 200, a);
  const auto s2 = SketchMatrix::count_sketch(10, 200, b);
  for (std::size_t j = 0; j < 200; ++j) {
    REQUIRE(s1.column(j).size() == 1);
    CHECK(std::abs(s1.column(j)[0].value) == 1.0);
    CHECK(s1.column(j)[0].row < 10);
    CHECK(s1.column(j)[0].row == s2.column(j)[0].row);
    CHECK(s1.column(j)[0].value == s2.column(j)[0].value);
  }
}

TEST_CASE("single-row count-sketch sums signed coordinates") {
  Rng rng(1);
  const auto s = SketchMatrix::count_sketch(1, 5, rng);
  const DenseVector x{1, 2, 3, 4, 5};
  double expect = 0.0;
  for (std::size_t j = 0; j < 5; ++j) expect += s.column(j)[0].value * x[j];
  CHECK(s.apply(x.span())[0] == expect);
}

TEST_CASE("sparse embedding structure") {
  Rng rng(8);
  const auto one = SketchMatrix::sparse_embedding(6, 30, 1, rng);
  for (std::size_t j = 0; j < 30; ++j) CHECK(std::abs(one.column(j)[0].value) == 1.0);
  const auto two = SketchMatrix::sparse_embedding(4, 50, 2, rng);
  for (std::size_t j = 0; j < 50; ++j) {
    const auto col = two.column(j);
    REQUIRE(col.size() == 2);
    CHECK(col[0].row != col[1].row);
    for (const auto& e : col) CHECK(std::abs(e.value) == doctest::Approx(1.0 / std::sqrt(2.0)).epsilon(1e-15));
  }
  const auto many = SketchMatrix::sparse_embedding(40, 100, 7, rng);
  for (std::size_t j = 0; j < 100; ++j) {
    double sq = 0.0;
    std::set<std::uint32_t> rows;
    for (const auto& e : many.column(j)) {
      sq += e.value * e.value;
      rows.insert(e.row);
    }
    CHECK(sq == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(rows.size() == 7);
  }
  CHECK_THROWS_AS(SketchMatrix::sparse_embedding(3, 10, 4, rng), InvalidInput);
}

TEST_CASE("sketch_apply on a hand-built count-sketch") {
  using E = SketchMatrix::Entry;
  const auto s = SketchMatrix::from_columns(2, 4, {{E{1, 1.0}}, {E{0, -1.0}}, {E{0, 1.0}}, {E{1, -1.0}}});
  const auto y = sketch_apply(s, DenseVector{1, 1, 1, 1}.span());
  CHECK(y == DenseVector{0, 0});
  CHECK(sketch_apply(s, DenseVector(4).span()) == DenseVector(2));
  CHECK_THROWS_AS(s.apply(DenseVector(3).span()), InvalidInput);
}

TEST_CASE("count-sketch preserves squared norm in expectation") {
  Rng xr(99);
  const DenseVector x = gaussian_vector(64, xr);
  const double target = squared_norm(x.span());
  double mean = 0.0;
  constexpr int kSeeds = 10000;
  for (int seed = 0; seed < kSeeds; ++seed) {
    Rng rng(static_cast<std::uint64_t>(seed), 3);
    mean += squared_norm(SketchMatrix::count_sketch(16, 64, rng).apply(x.span()).span());
  }
  mean /= kSeeds;
  CHECK(std::abs(mean / target - 1.0) <= 0.05);
}

TEST_CASE("sketch_apply_matrix is column-wise sketch_apply") {
  Rng rng(12);
  const auto s = SketchMatrix::sparse_embedding(8, 20, 3, rng);
  const DenseMatrix u = gaussian_matrix(20, 4, rng);
  const DenseMatrix su = sketch_apply_matrix(s, u);
  for (std::size_t c = 0; c < 4; ++c) {
    const auto col = s.apply(u.col(c));
    for (std::size_t i = 0; i < 8; ++i) CHECK(su(i, c) == col[i]);
  }
  CHECK(sketch_apply_matrix(s, DenseMatrix(20, 4)) == DenseMatrix(8, 4));
  CHECK(sketch_apply_matrix(SketchMatrix::identity(20), u) == u);
}

TEST_CASE("S^T S is symmetric and gram_apply matches the dense product") {
  Rng rng(6);
  const auto s = SketchMatrix::count_sketch(12, 40, rng);
  const DenseMatrix d = s.to_dense();
  const DenseMatrix g = matmul_tn(d, d);
  CHECK(g == g.transpose());
  const DenseVector x = gaussian_vector(40, rng);
  const auto fast = s.gram_apply(x.span());
  const auto slow = matvec(g, x.span());
  for (std::size_t i = 0; i < 40; ++i) CHECK(fast[i] == doctest::Approx(slow[i]).epsilon(1e-12));
}

TEST_CASE("distortion of the identity sketch is zero") {
  Rng rng(2);
  const auto basis = SubspaceBasis::random(64, 5, rng);
  const auto d = distortion(SketchMatrix::identity(64), basis, 500, rng);
  CHECK(d.norm == 0.0);
  CHECK(d.inner == 0.0);
}

TEST_CASE("one-dimensional distortion is the single-direction error") {
  Rng rng(21);
  const auto basis = SubspaceBasis::random(100, 1, rng);
  const auto s = SketchMatrix::count_sketch(10, 100, rng);
  const double direct = std::abs(squared_norm(s.apply(basis.matrix().col(0)).span()) - 1.0);
  const auto d = distortion(s, basis, 50, rng);
  CHECK(d.norm == doctest::Approx(direct).epsilon(1e-12));
}

TEST_CASE("subspace basis validation") {
  CHECK_THROWS_AS(SubspaceBasis(DenseMatrix{{1, 1}, {0, 1}}), InvalidInput);
  CHECK_NOTHROW(SubspaceBasis(DenseMatrix::identity(3)));
}

TEST_CASE("median distortion does not increase as rows double") {
  const std::vector<std::size_t> sizes{64, 128, 256, 512, 1024};
  std::vector<double> medians;
  for (auto s : sizes) {
    std::vector<double> d;
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      Rng rng(seed, 5);
      const auto basis = SubspaceBasis::random(2048, 4, rng);
      Rng sk(seed * 1000 + s, 6);
      d.push_back(distortion(SketchMatrix::count_sketch(s, 2048, sk), basis, 500, rng).norm);
    }
    std::nth_element(d.begin(), d.begin() + 10, d.end());
    medians.push_back(d[10]);
  }
  for (std::size_t i = 1; i < medians.size(); ++i) CHECK(medians[i] <= medians[i - 1]);
}

TEST_CASE("suggested sketch rows") {
  CHECK(suggest_sketch_rows(SketchKind::CountSketch, 5, 0.25, 0.1) == 4000);
  CHECK(suggest_sketch_rows(SketchKind::CountSketch, 5, 0.125, 0.1) == 16000);
  CHECK(suggest_sketch_rows(SketchKind::CountSketch, 5, 0.25, 0.1, 2.0) == 8000);
  const double l = std::log(5.0 / (0.25 * 0.1));
  CHECK(suggest_sketch_rows(SketchKind::SparseEmbedding, 5, 0.25, 0.1) ==
        static_cast<std::size_t>(std::ceil(5.0 * l * l / 0.0625)));
  std::size_t prev = 0;
  for (std::size_t d = 1; d <= 64; d *= 2) {
    const auto s = suggest_sketch_rows(SketchKind::SparseEmbedding, d, 0.25, 0.1);
    CHECK(s >= 2 * prev);
    prev = s;
  }
  CHECK_THROWS_AS(suggest_sketch_rows(SketchKind::CountSketch, 5, 1.5, 0.1), InvalidInput);
  CHECK_THROWS_AS(suggest_sketch_rows(SketchKind::Identity, 5, 0.5, 0.1), InvalidInput);
}

TEST_CASE("sketch kind names round-trip") {
  for (auto k : {SketchKind::CountSketch, SketchKind::SparseEmbedding, SketchKind::Identity})
    CHECK(parse_sketch_kind(to_string(k)) == k);
  CHECK_THROWS_AS(parse_sketch_kind("gaussian"), InvalidInput);
}
