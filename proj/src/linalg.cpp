#include "hashnets/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hashnets/error.hpp"

namespace hashnets {

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = rows.size();
  cols_ = rows_ == 0 ? 0 : rows.begin()->size();
  data_.assign(rows_ * cols_, 0.0);
  std::size_t i = 0;
  for (const auto& row : rows) {
    require(row.size() == cols_, "ragged matrix literal");
    std::size_t j = 0;
    for (double v : row) (*this)(i, j++) = v;
    ++i;
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::diagonal(const DenseVector& d) {
  DenseMatrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

DenseMatrix DenseMatrix::transpose() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t j = 0; j < cols_; ++j)
    for (std::size_t i = 0; i < rows_; ++i) t(j, i) = (*this)(i, j);
  return t;
}

bool approx_equal(double a, double b, double atol, double rtol) {
  return std::abs(a - b) <= atol + rtol * std::max(std::abs(a), std::abs(b));
}

bool all_finite(std::span<const double> values) {
  return std::all_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); });
}

double dot(std::span<const double> a, std::span<const double> b) {
  require(a.size() == b.size(), "dot: length mismatch");
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double squared_norm(std::span<const double> a) { return dot(a, a); }

double norm2(std::span<const double> a) {
  // scaled accumulation so huge or tiny entries do not overflow/underflow
  double scale = 0.0;
  for (double v : a) scale = std::max(scale, std::abs(v));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double s = 0.0;
  for (double v : a) {
    const double r = v / scale;
    s += r * r;
  }
  return scale * std::sqrt(s);
}

double frobenius_norm(const DenseMatrix& a) { return norm2(a.span()); }

DenseVector matvec(const DenseMatrix& a, std::span<const double> x) {
  require(x.size() == a.cols(), "matvec: dimension mismatch");
  DenseVector y(a.rows());
  for (std::size_t j = 0; j < a.cols(); ++j) {
    const double xj = x[j];
    if (xj == 0.0) continue;
    const auto c = a.col(j);
    for (std::size_t i = 0; i < a.rows(); ++i) y[i] += c[i] * xj;
  }
  return y;
}

DenseVector matvec_t(const DenseMatrix& a, std::span<const double> x) {
  require(x.size() == a.rows(), "matvec_t: dimension mismatch");
  DenseVector y(a.cols());
  for (std::size_t j = 0; j < a.cols(); ++j) y[j] = dot(a.col(j), x);
  return y;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.cols() == b.rows(), "matmul: dimension mismatch");
  DenseMatrix c(a.rows(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j) {
    double* cj = c.col(j).data();
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double bkj = b(k, j);
      if (bkj == 0.0) continue;
      const double* ak = a.col(k).data();
      for (std::size_t i = 0; i < a.rows(); ++i) cj[i] += ak[i] * bkj;
    }
  }
  return c;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.rows() == b.rows(), "matmul_tn: dimension mismatch");
  DenseMatrix c(a.cols(), b.cols());
  for (std::size_t j = 0; j < b.cols(); ++j)
    for (std::size_t i = 0; i < a.cols(); ++i) c(i, j) = dot(a.col(i), b.col(j));
  return c;
}

namespace {

constexpr int kMaxSweeps = 80;
constexpr double kJacobiTol = 1e-15;

// Orthogonalizes the columns of `g` (m x n, m >= n) in place, accumulating
// the rotations into `v` when it is non-null.
void hestenes(DenseMatrix& g, DenseMatrix* v) {
  const std::size_t n = g.cols();
  const std::size_t m = g.rows();
  const double fro2 = squared_norm(g.span());
  if (fro2 == 0.0) return;
  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    bool rotated = false;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        double* gp = g.col(p).data();
        double* gq = g.col(q).data();
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
          alpha += gp[i] * gp[i];
          beta += gq[i] * gq[i];
          gamma += gp[i] * gq[i];
        }
        if (gamma == 0.0) continue;
        if (std::abs(gamma) <= kJacobiTol * std::sqrt(alpha * beta)) continue;
        // columns below working precision relative to the whole matrix
        if (alpha * beta <= 1e-300 * fro2 * fro2) continue;
        rotated = true;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (std::size_t i = 0; i < m; ++i) {
          const double x = gp[i];
          const double y = gq[i];
          gp[i] = c * x - s * y;
          gq[i] = s * x + c * y;
        }
        if (v) {
          double* vp = v->col(p).data();
          double* vq = v->col(q).data();
          for (std::size_t i = 0; i < v->rows(); ++i) {
            const double x = vp[i];
            const double y = vq[i];
            vp[i] = c * x - s * y;
            vq[i] = s * x + c * y;
          }
        }
      }
    }
    if (!rotated) return;
  }
}

// Fills column `j` of `u` with a unit vector orthogonal to columns [0, j).
void complete_column(DenseMatrix& u, std::size_t j) {
  const std::size_t m = u.rows();
  for (std::size_t e = 0; e < m; ++e) {
    std::vector<double> cand(m, 0.0);
    cand[e] = 1.0;
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        const double proj = dot(u.col(k), cand);
        const auto uk = u.col(k);
        for (std::size_t i = 0; i < m; ++i) cand[i] -= proj * uk[i];
      }
    }
    const double nrm = norm2(cand);
    if (nrm > 0.5) {
      auto uj = u.col(j);
      for (std::size_t i = 0; i < m; ++i) uj[i] = cand[i] / nrm;
      return;
    }
  }
}

void validate_svd_input(const DenseMatrix& a) {
  require(a.rows() >= 1 && a.cols() >= 1, "svd: empty matrix");
  require(all_finite(a.span()), "svd: non-finite entries");
}

}  // namespace

SvdResult svd(const DenseMatrix& a) {
  validate_svd_input(a);
  const bool flip = a.rows() < a.cols();
  DenseMatrix g = flip ? a.transpose() : a;
  const std::size_t n = g.cols();
  DenseMatrix v = DenseMatrix::identity(n);
  hestenes(g, &v);

  std::vector<double> sigma(n);
  for (std::size_t j = 0; j < n; ++j) sigma[j] = norm2(g.col(j));
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return sigma[x] > sigma[y]; });

  const double smax = sigma[order[0]];
  DenseVector s(n);
  DenseMatrix u(g.rows(), n);
  DenseMatrix vs(n, n);
  std::vector<std::size_t> deficient;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t j = order[k];
    s[k] = sigma[j];
    std::copy(v.col(j).begin(), v.col(j).end(), vs.col(k).begin());
    if (sigma[j] > 0.0 && sigma[j] > 1e-300 && sigma[j] >= smax * 1e-15) {
      auto src = g.col(j);
      auto dst = u.col(k);
      for (std::size_t i = 0; i < g.rows(); ++i) dst[i] = src[i] / sigma[j];
    } else {
      deficient.push_back(k);
    }
  }
  for (std::size_t k : deficient) complete_column(u, k);

  if (flip) return {std::move(s), std::move(vs), std::move(u)};
  return {std::move(s), std::move(u), std::move(vs)};
}

DenseVector singular_values(const DenseMatrix& a) {
  validate_svd_input(a);
  DenseMatrix g = a.rows() < a.cols() ? a.transpose() : a;
  hestenes(g, nullptr);
  std::vector<double> sigma(g.cols());
  for (std::size_t j = 0; j < g.cols(); ++j) sigma[j] = norm2(g.col(j));
  std::sort(sigma.begin(), sigma.end(), std::greater<>());
  return DenseVector(std::move(sigma));
}

DenseVector sym_eig(const DenseMatrix& h) {
  require(h.rows() == h.cols(), "sym_eig: matrix is not square");
  require(all_finite(h.span()), "sym_eig: non-finite entries");
  const std::size_t n = h.rows();
  double maxabs = 0.0;
  for (double x : h.span()) maxabs = std::max(maxabs, std::abs(x));
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = j + 1; i < n; ++i)
      require(std::abs(h(i, j) - h(j, i)) <= 1e-8 * maxabs, "sym_eig: matrix is not symmetric");

  DenseMatrix a = h;
  // symmetrize exactly so rotations act on a truly symmetric matrix
  for (std::size_t j = 0; j < n; ++j)
    for (std::size_t i = j + 1; i < n; ++i) a(i, j) = a(j, i) = 0.5 * (h(i, j) + h(j, i));

  for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
    double off = 0.0;
    double diag = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      diag += a(j, j) * a(j, j);
      for (std::size_t i = j + 1; i < n; ++i) off += a(i, j) * a(i, j);
    }
    if (off <= 1e-32 * (diag + off) || off == 0.0) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        if (std::abs(apq) <= 1e-300 + 1e-18 * std::sqrt(std::abs(app * aqq))) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = std::copysign(1.0, theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (std::size_t k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
      }
    }
  }
  std::vector<double> ev(n);
  for (std::size_t i = 0; i < n; ++i) ev[i] = a(i, i);
  std::sort(ev.begin(), ev.end(), std::greater<>());
  return DenseVector(std::move(ev));
}

DenseVector gaussian_vector(std::size_t n, Rng& rng) {
  DenseVector v(n);
  for (auto& x : v) x = rng.normal();
  return v;
}

DenseMatrix gaussian_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  DenseMatrix m(rows, cols);
  for (auto& x : m.span()) x = rng.normal();
  return m;
}

DenseMatrix random_orthonormal(std::size_t n, std::size_t d, Rng& rng) {
  require(d >= 1 && d <= n, "random_orthonormal: need 1 <= d <= n");
  DenseMatrix q = gaussian_matrix(n, d, rng);
  for (std::size_t j = 0; j < d; ++j) {
    auto qj = q.col(j);
    // two passes of modified Gram-Schmidt
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t k = 0; k < j; ++k) {
        const double proj = dot(q.col(k), qj);
        const auto qk = q.col(k);
        for (std::size_t i = 0; i < n; ++i) qj[i] -= proj * qk[i];
      }
    }
    const double nrm = norm2(qj);
    for (auto& x : qj) x /= nrm;
  }
  return q;
}

}  // namespace hashnets
