#pragma once

#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace predtrig {

using Vector = std::vector<double>;

/// Dense row-major matrix. Sizes in this project are tiny (the reference
/// scenarios are scalar), so there is no blocking or sparse storage.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
  /// Throws DimensionError unless entries.size() == rows * cols.
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries);
  Matrix(std::initializer_list<std::initializer_list<double>> rows);

  static Matrix identity(std::size_t n);
  static Matrix zeros(std::size_t rows, std::size_t cols) { return Matrix(rows, cols); }
  static Matrix scalar(double value) { return Matrix(1, 1, value); }
  static Matrix diagonal(std::span<const double> diag);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool is_square() const noexcept { return rows_ == cols_; }
  bool empty() const noexcept { return entries_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return entries_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return entries_[i * cols_ + j]; }

  std::span<const double> entries() const noexcept { return entries_; }
  std::span<double> entries() noexcept { return entries_; }

  Matrix transpose() const;
  bool all_finite() const noexcept;
  std::string shape() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> entries_;
};

// Elementwise arithmetic. Shapes must agree (DimensionError otherwise).
Matrix operator+(const Matrix& a, const Matrix& b);
Matrix operator-(const Matrix& a, const Matrix& b);
Matrix operator*(double s, const Matrix& a);

Matrix multiply(const Matrix& a, const Matrix& b);
Vector multiply(const Matrix& a, std::span<const double> x);

/// a * b * a^T, the congruence used by every covariance propagation.
Matrix congruence(const Matrix& a, const Matrix& b);

double trace(const Matrix& p);
double frobenius_norm(const Matrix& a);

/// Smallest eigenvalue of the symmetric part of p (cyclic Jacobi sweeps).
double smallest_eigenvalue(const Matrix& p);

/// True when the smallest eigenvalue is >= -1e-10 * |trace(p)|.
bool is_psd(const Matrix& p);

/// (p + p^T) / 2 followed by the PSD check. Throws NumericError when the
/// result is indefinite beyond tolerance.
Matrix symmetrize(const Matrix& p);

/// Lower-triangular L with L L^T = p. Pivots that vanish within tolerance
/// (singular PSD input) yield a zero column. Indefinite input is rejected
/// with the smallest eigenvalue in the message.
Matrix cholesky(const Matrix& p);

/// Solves s * x = b for symmetric positive definite s. Rejects s when the
/// reciprocal condition estimate drops below 1e-14.
Matrix solve_spd(const Matrix& s, const Matrix& b);

// Vector helpers.
Vector add(std::span<const double> a, std::span<const double> b);
Vector subtract(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> v);

}  // namespace predtrig
