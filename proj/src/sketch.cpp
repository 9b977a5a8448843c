#include "hashnets/sketch.hpp"

#include <cmath>
#include <numeric>

#include "hashnets/error.hpp"
#include "hashnets/hashing.hpp"
#include "hashnets/parallel.hpp"

namespace hashnets {

std::string to_string(SketchKind kind) {
  switch (kind) {
    case SketchKind::CountSketch: return "count-sketch";
    case SketchKind::SparseEmbedding: return "sparse-embedding";
    case SketchKind::Identity: return "identity";
    case SketchKind::Custom: return "custom";
  }
  return "?";
}

SketchKind parse_sketch_kind(const std::string& name) {
  if (name == "count-sketch") return SketchKind::CountSketch;
  if (name == "sparse-embedding") return SketchKind::SparseEmbedding;
  if (name == "identity") return SketchKind::Identity;
  throw InvalidInput("unknown sketch kind '" + name + "'");
}

SketchMatrix SketchMatrix::count_sketch(std::size_t s, std::size_t n, Rng& rng) {
  require(s >= 1 && n >= 1, "count-sketch needs s >= 1 and n >= 1");
  const KWiseHash rows(2, n, s, rng);
  const SignHash signs(n, rng);
  SketchMatrix out(SketchKind::CountSketch, s, n);
  out.offsets_.resize(n + 1);
  out.entries_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.offsets_[i] = i;
    out.entries_.push_back({static_cast<std::uint32_t>(rows.eval_unchecked(i)), signs(i)});
  }
  out.offsets_[n] = n;
  return out;
}

SketchMatrix SketchMatrix::sparse_embedding(std::size_t s, std::size_t n, std::size_t t, Rng& rng) {
  require(s >= 1 && n >= 1, "sparse embedding needs s >= 1 and n >= 1");
  require(t >= 1 && t <= s, "sparse embedding needs 1 <= t <= s");
  SketchMatrix out(SketchKind::SparseEmbedding, s, n);
  const double mag = 1.0 / std::sqrt(static_cast<double>(t));
  std::vector<std::uint32_t> work(s);
  std::iota(work.begin(), work.end(), 0u);
  std::vector<std::size_t> pivots(t);
  out.offsets_.resize(n + 1);
  out.entries_.reserve(n * t);
  for (std::size_t i = 0; i < n; ++i) {
    out.offsets_[i] = i * t;
    for (std::size_t j = 0; j < t; ++j) {
      const std::size_t ell = j + rng.below(s - j);
      pivots[j] = ell;
      std::swap(work[j], work[ell]);
      out.entries_.push_back({work[j], rng.sign() * mag});
    }
    // undo the swaps so every column starts from the same permutation
    for (std::size_t j = t; j-- > 0;) std::swap(work[j], work[pivots[j]]);
  }
  out.offsets_[n] = n * t;
  return out;
}

SketchMatrix SketchMatrix::identity(std::size_t n) {
  require(n >= 1, "identity sketch needs n >= 1");
  SketchMatrix out(SketchKind::Identity, n, n);
  out.offsets_.resize(n + 1);
  out.entries_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.offsets_[i] = i;
    out.entries_.push_back({static_cast<std::uint32_t>(i), 1.0});
  }
  out.offsets_[n] = n;
  return out;
}

SketchMatrix SketchMatrix::from_columns(std::size_t s, std::size_t n, const std::vector<std::vector<Entry>>& columns) {
  require(columns.size() == n, "from_columns: need one entry list per column");
  SketchMatrix out(SketchKind::Custom, s, n);
  out.offsets_.push_back(0);
  for (const auto& col : columns) {
    for (const auto& e : col) {
      require(e.row < s, "from_columns: row index out of range");
      out.entries_.push_back(e);
    }
    out.offsets_.push_back(out.entries_.size());
  }
  return out;
}

DenseVector SketchMatrix::apply(std::span<const double> x) const {
  require(x.size() == cols_, "sketch apply: expected length " + std::to_string(cols_) + ", got " + std::to_string(x.size()));
  DenseVector y(rows_);
  for (std::size_t j = 0; j < cols_; ++j) {
    const double xj = x[j];
    for (std::size_t e = offsets_[j]; e < offsets_[j + 1]; ++e) y[entries_[e].row] += entries_[e].value * xj;
  }
  return y;
}

DenseVector SketchMatrix::apply_transpose(std::span<const double> y) const {
  require(y.size() == rows_, "sketch transpose apply: dimension mismatch");
  DenseVector x(cols_);
  for (std::size_t j = 0; j < cols_; ++j) {
    double acc = 0.0;
    for (std::size_t e = offsets_[j]; e < offsets_[j + 1]; ++e) acc += entries_[e].value * y[entries_[e].row];
    x[j] = acc;
  }
  return x;
}

DenseVector SketchMatrix::gram_apply(std::span<const double> x) const {
  const DenseVector sx = apply(x);
  return apply_transpose(sx.span());
}

DenseMatrix SketchMatrix::apply(const DenseMatrix& u) const {
  require(u.rows() == cols_, "sketch apply: matrix row count does not match sketch columns");
  DenseMatrix out(rows_, u.cols());
  for (std::size_t c = 0; c < u.cols(); ++c) {
    const DenseVector y = apply(u.col(c));
    std::copy(y.begin(), y.end(), out.col(c).begin());
  }
  return out;
}

DenseMatrix SketchMatrix::to_dense() const {
  require(cols_ <= 256, "to_dense is limited to n <= 256");
  DenseMatrix d(rows_, cols_);
  for (std::size_t j = 0; j < cols_; ++j)
    for (const auto& e : column(j)) d(e.row, j) += e.value;
  return d;
}

SubspaceBasis::SubspaceBasis(DenseMatrix u) : u_(std::move(u)) {
  require(u_.cols() >= 1 && u_.cols() <= u_.rows(), "subspace basis needs 1 <= d <= n");
  const DenseMatrix g = matmul_tn(u_, u_);
  for (std::size_t j = 0; j < g.cols(); ++j)
    for (std::size_t i = 0; i < g.rows(); ++i)
      require(std::abs(g(i, j) - (i == j ? 1.0 : 0.0)) <= 1e-8, "subspace basis columns are not orthonormal");
}

SubspaceBasis SubspaceBasis::random(std::size_t n, std::size_t d, Rng& rng) { return SubspaceBasis(random_orthonormal(n, d, rng)); }

namespace {

double quad_form(const DenseMatrix& g, std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t j = 0; j < g.cols(); ++j) {
    double col = 0.0;
    for (std::size_t i = 0; i < g.rows(); ++i) col += a[i] * g(i, j);
    s += col * b[j];
  }
  return s;
}

}  // namespace

Distortion distortion(const SketchMatrix& s, const SubspaceBasis& basis, std::size_t pairs, Rng& rng) {
  require(s.cols() == basis.ambient_dim(), "distortion: sketch columns do not match basis rows");
  const DenseMatrix& u = basis.matrix();
  const std::size_t d = basis.dim();
  // For x = Uz: <Sx, Sx'> = z^T (SU)^T (SU) z' and <x, x'> = z^T U^T U z'.
  const DenseMatrix su = s.apply(u);
  const DenseMatrix sketched = matmul_tn(su, su);
  const DenseMatrix exact = matmul_tn(u, u);
  const Rng base(rng.next_u64());

  constexpr std::size_t kChunk = 256;
  return chunked_reduce(
      pairs, kChunk,
      [&](std::size_t begin, std::size_t end) {
        Distortion part;
        DenseVector z(d), w(d);
        for (std::size_t p = begin; p < end; ++p) {
          Rng local = base.derive(p);
          for (std::size_t i = 0; i < d; ++i) z[i] = local.normal();
          for (std::size_t i = 0; i < d; ++i) w[i] = local.normal();
          const double zz = quad_form(exact, z.span(), z.span());
          const double ww = quad_form(exact, w.span(), w.span());
          const double zw = quad_form(exact, z.span(), w.span());
          const double szz = quad_form(sketched, z.span(), z.span());
          const double sww = quad_form(sketched, w.span(), w.span());
          const double szw = quad_form(sketched, z.span(), w.span());
          part.norm = std::max({part.norm, std::abs(szz / zz - 1.0), std::abs(sww / ww - 1.0)});
          part.inner = std::max(part.inner, std::abs(szw - zw) / std::sqrt(zz * ww));
        }
        return part;
      },
      [](Distortion a, Distortion b) { return Distortion{std::max(a.norm, b.norm), std::max(a.inner, b.inner)}; });
}

std::size_t suggest_sketch_rows(SketchKind kind, std::size_t d, double eps, double delta, double c) {
  require(eps > 0.0 && eps < 1.0, "eps must lie in (0, 1)");
  require(delta > 0.0 && delta < 1.0, "delta must lie in (0, 1)");
  require(c > 0.0, "row constant must be positive");
  const double dd = static_cast<double>(d);
  double rows = 0.0;
  switch (kind) {
    case SketchKind::CountSketch: rows = c * dd * dd / (delta * eps * eps); break;
    case SketchKind::SparseEmbedding: {
      const double l = std::log(dd / (eps * delta));
      rows = c * dd * l * l / (eps * eps);
      break;
    }
    default: throw InvalidInput("row suggestion only exists for count-sketch and sparse-embedding");
  }
  // absorb last-ulp noise of the products so exact integers do not round up
  return static_cast<std::size_t>(std::max(1.0, std::ceil(rows * (1.0 - 1e-12))));
}

}  // namespace hashnets
