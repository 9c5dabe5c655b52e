#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

namespace vrclt {

using Vector = std::vector<double>;

// Elementwise vector helpers; sizes must match.
Vector vec_add(const Vector& a, const Vector& b);
Vector vec_sub(const Vector& a, const Vector& b);
Vector vec_scale(const Vector& a, double s);
double vec_dot(const Vector& a, const Vector& b);
double vec_norm(const Vector& a);
Vector vec_concat(const Vector& a, const Vector& b);

// Dense row-major matrix sized for m <= a few dozen.
class Matrix {
 public:
  Matrix() = default;
  Matrix(int rows, int cols);  // zero-initialized
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(int n);
  static Matrix diag(const Vector& d);
  // [[a, b], [c, d]] from equally sized blocks.
  static Matrix assemble2x2(const Matrix& a, const Matrix& b, const Matrix& c, const Matrix& d);
  static Matrix outer(const Vector& u, const Vector& v);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  double& operator()(int i, int j) { return data_[static_cast<size_t>(i) * cols_ + j]; }
  double operator()(int i, int j) const { return data_[static_cast<size_t>(i) * cols_ + j]; }

  Matrix transpose() const;
  Matrix operator+(const Matrix& o) const;
  Matrix operator-(const Matrix& o) const;
  Matrix operator*(const Matrix& o) const;
  Vector operator*(const Vector& v) const;
  Matrix scaled(double s) const;
  Matrix block(int i0, int j0, int r, int c) const;

  double frobenius_norm() const;
  double max_abs() const;
  double trace() const;
  bool is_symmetric(double tol) const;

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<double> data_;
};

// Lower-triangular factor of an SPD matrix, A = L L'.
struct CholeskyFactor {
  Matrix lower;
  Vector solve(const Vector& b) const;  // A^{-1} b via two triangular solves
  double log_det() const;               // log det A
  Matrix reconstruct() const;           // L L'
};

// Rejects matrices whose pivot falls below pivot_tol * max diagonal.
CholeskyFactor cholesky(const Matrix& a, double pivot_tol = 1e-12);

// Eigenvalues (descending) and orthonormal eigenvectors (columns) of a
// symmetric matrix, by cyclic Jacobi rotations.
struct SymmetricEigen {
  Vector values;
  Matrix vectors;
};
SymmetricEigen sym_eig(const Matrix& a, int max_sweeps = 100);

// Largest singular value, by power iteration on A'A from a fixed
// pseudo-random start. Deterministic for a given input.
double spectral_norm(const Matrix& a, double tol = 1e-12, int max_iters = 100000);

// Largest eigenvalue magnitude, by Gelfand's formula with repeated squaring
// and per-step normalization. Handles non-normal (and defective) matrices.
double spectral_radius(const Matrix& a, double tol = 1e-10);

}  // namespace vrclt
