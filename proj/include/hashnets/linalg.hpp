#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "hashnets/rng.hpp"

namespace hashnets {

class DenseVector {
 public:
  DenseVector() = default;
  explicit DenseVector(std::size_t n, double fill = 0.0) : data_(n, fill) {}
  DenseVector(std::initializer_list<double> values) : data_(values) {}
  explicit DenseVector(std::vector<double> values) : data_(std::move(values)) {}

  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }
  double& operator[](std::size_t i) { return data_[i]; }
  double operator[](std::size_t i) const { return data_[i]; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }
  const std::vector<double>& values() const { return data_; }
  auto begin() { return data_.begin(); }
  auto end() { return data_.end(); }
  auto begin() const { return data_.begin(); }
  auto end() const { return data_.end(); }

  bool operator==(const DenseVector&) const = default;

 private:
  std::vector<double> data_;
};

/// Column-major dense matrix.
class DenseMatrix {
 public:
  DenseMatrix() = default;
  DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  /// Row-major nested literal, e.g. {{1, 2}, {3, 4}}.
  DenseMatrix(std::initializer_list<std::initializer_list<double>> rows);

  static DenseMatrix identity(std::size_t n);
  static DenseMatrix diagonal(const DenseVector& d);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[j * rows_ + i]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[j * rows_ + i]; }

  std::span<double> col(std::size_t j) { return {data_.data() + j * rows_, rows_}; }
  std::span<const double> col(std::size_t j) const { return {data_.data() + j * rows_, rows_}; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  std::span<double> span() { return data_; }
  std::span<const double> span() const { return data_; }

  DenseMatrix transpose() const;

  bool operator==(const DenseMatrix&) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// ---- tolerances -----------------------------------------------------------

inline constexpr double kDefaultAtol = 1e-12;
inline constexpr double kDefaultRtol = 1e-8;

/// |a - b| <= atol + rtol * max(|a|, |b|)
bool approx_equal(double a, double b, double atol = kDefaultAtol, double rtol = kDefaultRtol);

bool all_finite(std::span<const double> values);

// ---- BLAS-like kernels ----------------------------------------------------

double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);
double norm2(std::span<const double> a);
double frobenius_norm(const DenseMatrix& a);

/// y = A x
DenseVector matvec(const DenseMatrix& a, std::span<const double> x);
/// y = A^T x
DenseVector matvec_t(const DenseMatrix& a, std::span<const double> x);
/// C = A B
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
/// C = A^T B
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);

// ---- factorizations -------------------------------------------------------

struct SvdResult {
  DenseVector singular_values;  // descending, length r = min(rows, cols)
  DenseMatrix u;                // rows x r, orthonormal columns
  DenseMatrix v;                // cols x r, orthonormal columns
};

/// Thin SVD by one-sided (Hestenes) Jacobi rotations.
/// Throws InvalidInput on non-finite entries or an empty matrix.
SvdResult svd(const DenseMatrix& a);

/// Singular values only (descending); skips accumulation of V.
DenseVector singular_values(const DenseMatrix& a);

/// Eigenvalues of a symmetric matrix in descending order, by cyclic Jacobi.
/// Throws InvalidInput if `h` is not square or is asymmetric beyond
/// 1e-8 relative to its largest entry.
DenseVector sym_eig(const DenseMatrix& h);

// ---- sampling -------------------------------------------------------------

DenseVector gaussian_vector(std::size_t n, Rng& rng);
DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng);

/// n x d matrix with orthonormal columns spanning a uniformly random subspace.
DenseMatrix random_orthonormal(std::size_t n, std::size_t d, Rng& rng);

}  // namespace hashnets
