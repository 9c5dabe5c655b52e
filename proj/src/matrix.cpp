#include "vrclt/matrix.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>
#include <numeric>

#include "vrclt/errors.hpp"

namespace vrclt {

Vector vec_add(const Vector& a, const Vector& b) {
  assert(a.size() == b.size());
  Vector r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] + b[i];
  return r;
}

Vector vec_sub(const Vector& a, const Vector& b) {
  assert(a.size() == b.size());
  Vector r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] - b[i];
  return r;
}

Vector vec_scale(const Vector& a, double s) {
  Vector r(a.size());
  for (size_t i = 0; i < a.size(); ++i) r[i] = a[i] * s;
  return r;
}

double vec_dot(const Vector& a, const Vector& b) {
  assert(a.size() == b.size());
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double vec_norm(const Vector& a) { return std::sqrt(vec_dot(a, a)); }

Vector vec_concat(const Vector& a, const Vector& b) {
  Vector r = a;
  r.insert(r.end(), b.begin(), b.end());
  return r;
}

Matrix::Matrix(int rows, int cols)
    : rows_(rows), cols_(cols), data_(static_cast<size_t>(rows) * cols, 0.0) {
  assert(rows >= 0 && cols >= 0);
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows) {
  rows_ = static_cast<int>(rows.size());
  cols_ = rows_ > 0 ? static_cast<int>(rows.begin()->size()) : 0;
  data_.reserve(static_cast<size_t>(rows_) * cols_);
  for (const auto& r : rows) {
    assert(static_cast<int>(r.size()) == cols_);
    data_.insert(data_.end(), r.begin(), r.end());
  }
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diag(const Vector& d) {
  Matrix m(static_cast<int>(d.size()), static_cast<int>(d.size()));
  for (size_t i = 0; i < d.size(); ++i) m(static_cast<int>(i), static_cast<int>(i)) = d[i];
  return m;
}

Matrix Matrix::assemble2x2(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& d) {
  assert(a.rows() == b.rows() && c.rows() == d.rows());
  assert(a.cols() == c.cols() && b.cols() == d.cols());
  Matrix m(a.rows() + c.rows(), a.cols() + b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
    for (int j = 0; j < b.cols(); ++j) m(i, a.cols() + j) = b(i, j);
  }
  for (int i = 0; i < c.rows(); ++i) {
    for (int j = 0; j < c.cols(); ++j) m(a.rows() + i, j) = c(i, j);
    for (int j = 0; j < d.cols(); ++j) m(a.rows() + i, a.cols() + j) = d(i, j);
  }
  return m;
}

Matrix Matrix::outer(const Vector& u, const Vector& v) {
  Matrix m(static_cast<int>(u.size()), static_cast<int>(v.size()));
  for (size_t i = 0; i < u.size(); ++i)
    for (size_t j = 0; j < v.size(); ++j) m(static_cast<int>(i), static_cast<int>(j)) = u[i] * v[j];
  return m;
}

Matrix Matrix::transpose() const {
  Matrix m(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) m(j, i) = (*this)(i, j);
  return m;
}

Matrix Matrix::operator+(const Matrix& o) const {
  assert(rows_ == o.rows_ && cols_ == o.cols_);
  Matrix m(rows_, cols_);
  for (size_t i = 0; i < data_.size(); ++i) m.data_[i] = data_[i] + o.data_[i];
  return m;
}

Matrix Matrix::operator-(const Matrix& o) const {
  assert(rows_ == o.rows_ && cols_ == o.cols_);
  Matrix m(rows_, cols_);
  for (size_t i = 0; i < data_.size(); ++i) m.data_[i] = data_[i] - o.data_[i];
  return m;
}

Matrix Matrix::operator*(const Matrix& o) const {
  assert(cols_ == o.rows_);
  Matrix m(rows_, o.cols_);
  for (int i = 0; i < rows_; ++i) {
    for (int k = 0; k < cols_; ++k) {
      const double a = (*this)(i, k);
      if (a == 0.0) continue;
      for (int j = 0; j < o.cols_; ++j) m(i, j) += a * o(k, j);
    }
  }
  return m;
}

Vector Matrix::operator*(const Vector& v) const {
  assert(cols_ == static_cast<int>(v.size()));
  Vector r(rows_, 0.0);
  for (int i = 0; i < rows_; ++i) {
    double s = 0.0;
    for (int j = 0; j < cols_; ++j) s += (*this)(i, j) * v[j];
    r[i] = s;
  }
  return r;
}

Matrix Matrix::scaled(double s) const {
  Matrix m(rows_, cols_);
  for (size_t i = 0; i < data_.size(); ++i) m.data_[i] = data_[i] * s;
  return m;
}

Matrix Matrix::block(int i0, int j0, int r, int c) const {
  assert(i0 >= 0 && j0 >= 0 && i0 + r <= rows_ && j0 + c <= cols_);
  Matrix m(r, c);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < c; ++j) m(i, j) = (*this)(i0 + i, j0 + j);
  return m;
}

double Matrix::frobenius_norm() const {
  double s = 0.0;
  for (double v : data_) s += v * v;
  return std::sqrt(s);
}

double Matrix::max_abs() const {
  double s = 0.0;
  for (double v : data_) s = std::max(s, std::fabs(v));
  return s;
}

double Matrix::trace() const {
  assert(rows_ == cols_);
  double s = 0.0;
  for (int i = 0; i < rows_; ++i) s += (*this)(i, i);
  return s;
}

bool Matrix::is_symmetric(double tol) const {
  if (rows_ != cols_) return false;
  for (int i = 0; i < rows_; ++i)
    for (int j = i + 1; j < cols_; ++j)
      if (std::fabs((*this)(i, j) - (*this)(j, i)) > tol) return false;
  return true;
}

Vector CholeskyFactor::solve(const Vector& b) const {
  const int n = lower.rows();
  assert(static_cast<int>(b.size()) == n);
  Vector y(n), x(n);
  for (int i = 0; i < n; ++i) {
    double s = b[i];
    for (int j = 0; j < i; ++j) s -= lower(i, j) * y[j];
    y[i] = s / lower(i, i);
  }
  for (int i = n - 1; i >= 0; --i) {
    double s = y[i];
    for (int j = i + 1; j < n; ++j) s -= lower(j, i) * x[j];
    x[i] = s / lower(i, i);
  }
  return x;
}

double CholeskyFactor::log_det() const {
  double s = 0.0;
  for (int i = 0; i < lower.rows(); ++i) s += std::log(lower(i, i));
  return 2.0 * s;
}

Matrix CholeskyFactor::reconstruct() const { return lower * lower.transpose(); }

CholeskyFactor cholesky(const Matrix& a, double pivot_tol) {
  const int n = a.rows();
  if (n != a.cols()) throw NotPositiveDefinite("cholesky: matrix not square");
  double max_diag = 0.0;
  for (int i = 0; i < n; ++i) max_diag = std::max(max_diag, std::fabs(a(i, i)));
  const double floor = pivot_tol * std::max(max_diag, 1e-300);
  Matrix l(n, n);
  for (int j = 0; j < n; ++j) {
    double d = a(j, j);
    for (int k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > floor)) throw NotPositiveDefinite("cholesky: pivot " + std::to_string(d) + " at column " + std::to_string(j));
    l(j, j) = std::sqrt(d);
    for (int i = j + 1; i < n; ++i) {
      double s = a(i, j);
      for (int k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / l(j, j);
    }
  }
  return CholeskyFactor{l};
}

SymmetricEigen sym_eig(const Matrix& a, int max_sweeps) {
  const int n = a.rows();
  assert(n == a.cols());
  Matrix d = a;  // driven to diagonal in place
  Matrix v = Matrix::identity(n);
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += d(i, j) * d(i, j);
    if (off <= 1e-300) break;
    double scale = 0.0;
    for (int i = 0; i < n; ++i) scale = std::max(scale, std::fabs(d(i, i)));
    if (std::sqrt(off) <= 1e-15 * std::max(scale, 1e-300)) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = d(p, q);
        if (std::fabs(apq) <= 1e-300) continue;
        const double app = d(p, p), aqq = d(q, q);
        const double tau = (aqq - app) / (2.0 * apq);
        const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::fabs(tau) + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = t * c;
        for (int k = 0; k < n; ++k) {
          const double dkp = d(k, p), dkq = d(k, q);
          d(k, p) = c * dkp - s * dkq;
          d(k, q) = s * dkp + c * dkq;
        }
        for (int k = 0; k < n; ++k) {
          const double dpk = d(p, k), dqk = d(q, k);
          d(p, k) = c * dpk - s * dqk;
          d(q, k) = s * dpk + c * dqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
    if (sweep == max_sweeps - 1) throw NoConvergence("sym_eig: Jacobi sweeps exhausted");
  }
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int i, int j) { return d(i, i) > d(j, j); });
  SymmetricEigen e;
  e.values.resize(n);
  e.vectors = Matrix(n, n);
  for (int c = 0; c < n; ++c) {
    e.values[c] = d(order[c], order[c]);
    for (int r = 0; r < n; ++r) e.vectors(r, c) = v(r, order[c]);
  }
  return e;
}

double spectral_norm(const Matrix& a, double tol, int max_iters) {
  const int n = a.cols();
  if (n == 0 || a.rows() == 0) return 0.0;
  // Gram matrix keeps the iteration symmetric PSD.
  Matrix b = a.transpose() * a;
  if (b.max_abs() == 0.0) return 0.0;
  Vector v(n);
  // Fixed LCG fill: deterministic start with no preferred alignment.
  unsigned long long state = 0x9e3779b97f4a7c15ull;
  for (int i = 0; i < n; ++i) {
    state = state * 6364136223846793005ull + 1442695040888963407ull;
    v[i] = 0.5 + static_cast<double>(state >> 11) / 9007199254740992.0;
  }
  double inv = 1.0 / vec_norm(v);
  for (auto& x : v) x *= inv;
  double lambda = 0.0;
  for (int it = 0; it < max_iters; ++it) {
    Vector w = b * v;
    const double nw = vec_norm(w);
    if (nw == 0.0) return 0.0;
    const double next = vec_dot(v, w);  // Rayleigh quotient, monotone for PSD
    for (size_t i = 0; i < w.size(); ++i) v[i] = w[i] / nw;
    if (it > 0 && std::fabs(next - lambda) <= tol * std::max(next, 1e-300)) {
      return std::sqrt(next);
    }
    lambda = next;
  }
  throw NoConvergence("spectral_norm: power iteration stalled");
}

double spectral_radius(const Matrix& a, double tol) {
  const int n = a.rows();
  assert(n == a.cols());
  if (n == 0) return 0.0;
  Matrix b = a;
  double nf = b.frobenius_norm();
  if (nf == 0.0) return 0.0;
  b = b.scaled(1.0 / nf);
  double log_scale = std::log(nf);  // log ||A^{2^j}|| tracked outside the matrix
  double est_prev = 0.0;
  for (int j = 1; j <= 64; ++j) {
    b = b * b;
    nf = b.frobenius_norm();
    if (nf == 0.0) return 0.0;  // nilpotent
    b = b.scaled(1.0 / nf);
    log_scale = 2.0 * log_scale + std::log(nf);
    const double est = std::exp(log_scale / std::exp2(j));
    if (j >= 8 && std::fabs(est - est_prev) <= tol * std::max(1.0, est)) return est;
    est_prev = est;
  }
  return est_prev;
}

}  // namespace vrclt
