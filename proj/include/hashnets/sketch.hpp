#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hashnets/linalg.hpp"
#include "hashnets/rng.hpp"

namespace hashnets {

enum class SketchKind { CountSketch, SparseEmbedding, Identity, Custom };

std::string to_string(SketchKind kind);
SketchKind parse_sketch_kind(const std::string& name);

/// Sparse s x n sketching matrix stored by column.
class SketchMatrix {
 public:
  struct Entry {
    std::uint32_t row;
    double value;
  };

  /// Count-Sketch: row h(i) with sign sigma(i) in column i; h pairwise
  /// independent, sigma 4-wise independent.
  static SketchMatrix count_sketch(std::size_t s, std::size_t n, Rng& rng);
  /// t distinct rows per column (partial Fisher-Yates), values +-1/sqrt(t).
  static SketchMatrix sparse_embedding(std::size_t s, std::size_t n, std::size_t t, Rng& rng);
  static SketchMatrix identity(std::size_t n);
  /// Arbitrary column entries; used for hand-built projectors in tests.
  static SketchMatrix from_columns(std::size_t s, std::size_t n, const std::vector<std::vector<Entry>>& columns);

  SketchKind kind() const { return kind_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t nonzeros() const { return entries_.size(); }
  std::span<const Entry> column(std::size_t j) const {
    return {entries_.data() + offsets_[j], offsets_[j + 1] - offsets_[j]};
  }

  /// S x. Throws InvalidInput on length mismatch.
  DenseVector apply(std::span<const double> x) const;
  /// S^T y.
  DenseVector apply_transpose(std::span<const double> y) const;
  /// S^T S x without forming S^T S.
  DenseVector gram_apply(std::span<const double> x) const;
  /// S U, column by column.
  DenseMatrix apply(const DenseMatrix& u) const;

  /// Dense copy; limited to n <= 256.
  DenseMatrix to_dense() const;

 private:
  SketchMatrix(SketchKind kind, std::size_t s, std::size_t n) : kind_(kind), rows_(s), cols_(n) {}

  SketchKind kind_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<std::size_t> offsets_;
  std::vector<Entry> entries_;
};

inline DenseVector sketch_apply(const SketchMatrix& s, std::span<const double> x) { return s.apply(x); }
inline DenseMatrix sketch_apply_matrix(const SketchMatrix& s, const DenseMatrix& u) { return s.apply(u); }

/// n x d matrix with orthonormal columns (U^T U = I to 1e-8).
class SubspaceBasis {
 public:
  explicit SubspaceBasis(DenseMatrix u);
  static SubspaceBasis random(std::size_t n, std::size_t d, Rng& rng);

  const DenseMatrix& matrix() const { return u_; }
  std::size_t ambient_dim() const { return u_.rows(); }
  std::size_t dim() const { return u_.cols(); }

 private:
  DenseMatrix u_;
};

struct Distortion {
  double norm = 0.0;   // max | ||Sx||^2 - 1 | over sampled unit x
  double inner = 0.0;  // max | <Sx,Sx'> - <x,x'> | over sampled unit pairs
};

/// Monte Carlo distortion of S on colspan(U) over `pairs` random pairs of
/// unit vectors x = U z with z uniform on the sphere.
Distortion distortion(const SketchMatrix& s, const SubspaceBasis& basis, std::size_t pairs, Rng& rng);

/// Suggested row counts with hidden constant `c`:
/// count-sketch c d^2/(delta eps^2), sparse-embedding c d ln^2(d/(eps delta))/eps^2.
std::size_t suggest_sketch_rows(SketchKind kind, std::size_t d, double eps, double delta, double c = 1.0);

}  // namespace hashnets
