#include "predtrig/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "predtrig/errors.hpp"

namespace predtrig {
namespace {

constexpr double kPsdTolerance = 1e-10;
constexpr double kMinReciprocalCondition = 1e-14;

void require_finite(const Matrix& m, const char* op) {
  if (!m.all_finite()) {
    throw NumericError(std::string(op) + ": non-finite entry in result " + m.shape());
  }
}

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape() + " vs " + b.shape());
  }
}

void require_square(const Matrix& p, const char* op) {
  if (!p.is_square()) {
    throw DimensionError(std::string(op) + ": expected a square matrix, got " + p.shape());
  }
}

double psd_floor(const Matrix& p) { return -kPsdTolerance * std::abs(trace(p)); }

}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), entries_(rows * cols, fill) {}

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> entries)
    : rows_(rows), cols_(cols), entries_(std::move(entries)) {
  if (entries_.size() != rows_ * cols_) {
    throw DimensionError("matrix " + shape() + " needs " + std::to_string(rows_ * cols_) +
                         " entries, got " + std::to_string(entries_.size()));
  }
}

Matrix::Matrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  entries_.reserve(rows_ * cols_);
  for (const auto& row : rows) {
    if (row.size() != cols_) throw DimensionError("ragged matrix literal");
    entries_.insert(entries_.end(), row.begin(), row.end());
  }
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::diagonal(std::span<const double> diag) {
  Matrix m(diag.size(), diag.size());
  for (std::size_t i = 0; i < diag.size(); ++i) m(i, i) = diag[i];
  return m;
}

Matrix Matrix::transpose() const {
  Matrix t(cols_, rows_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  return t;
}

bool Matrix::all_finite() const noexcept {
  return std::all_of(entries_.begin(), entries_.end(), [](double v) { return std::isfinite(v); });
}

std::string Matrix::shape() const {
  return std::to_string(rows_) + "x" + std::to_string(cols_);
}

Matrix operator+(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  Matrix c = a;
  auto out = c.entries();
  auto rhs = b.entries();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += rhs[i];
  require_finite(c, "add");
  return c;
}

Matrix operator-(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "subtract");
  Matrix c = a;
  auto out = c.entries();
  auto rhs = b.entries();
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= rhs[i];
  require_finite(c, "subtract");
  return c;
}

Matrix operator*(double s, const Matrix& a) {
  Matrix c = a;
  for (double& v : c.entries()) v *= s;
  require_finite(c, "scale");
  return c;
}

Matrix multiply(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) {
    throw DimensionError("multiply: inner dimensions differ, " + a.shape() + " * " + b.shape());
  }
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t k = 0; k < a.cols(); ++k) {
      const double aik = a(i, k);
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  }
  require_finite(c, "multiply");
  return c;
}

Vector multiply(const Matrix& a, std::span<const double> x) {
  if (a.cols() != x.size()) {
    throw DimensionError("multiply: " + a.shape() + " times vector of length " +
                         std::to_string(x.size()));
  }
  Vector y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double acc = 0.0;
    for (std::size_t j = 0; j < a.cols(); ++j) acc += a(i, j) * x[j];
    if (!std::isfinite(acc)) throw NumericError("multiply: non-finite entry in result");
    y[i] = acc;
  }
  return y;
}

Matrix congruence(const Matrix& a, const Matrix& b) { return multiply(multiply(a, b), a.transpose()); }

double trace(const Matrix& p) {
  require_square(p, "trace");
  double t = 0.0;
  for (std::size_t i = 0; i < p.rows(); ++i) t += p(i, i);
  return t;
}

double frobenius_norm(const Matrix& a) {
  double s = 0.0;
  for (double v : a.entries()) s += v * v;
  return std::sqrt(s);
}

double smallest_eigenvalue(const Matrix& p) {
  require_square(p, "smallest_eigenvalue");
  const std::size_t n = p.rows();
  if (n == 0) return 0.0;
  if (n == 1) return p(0, 0);
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) a(i, j) = 0.5 * (p(i, j) + p(j, i));

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) off += a(i, j) * a(i, j);
    if (off <= 1e-300 || off <= 1e-30 * frobenius_norm(a) * frobenius_norm(a)) break;
    for (std::size_t pi = 0; pi < n; ++pi) {
      for (std::size_t q = pi + 1; q < n; ++q) {
        const double apq = a(pi, q);
        if (apq == 0.0) continue;
        const double theta = (a(q, q) - a(pi, pi)) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t r = 0; r < n; ++r) {
          const double arp = a(r, pi);
          const double arq = a(r, q);
          a(r, pi) = c * arp - s * arq;
          a(r, q) = s * arp + c * arq;
        }
        for (std::size_t r = 0; r < n; ++r) {
          const double apr = a(pi, r);
          const double aqr = a(q, r);
          a(pi, r) = c * apr - s * aqr;
          a(q, r) = s * apr + c * aqr;
        }
      }
    }
  }
  double smallest = a(0, 0);
  for (std::size_t i = 1; i < n; ++i) smallest = std::min(smallest, a(i, i));
  return smallest;
}

bool is_psd(const Matrix& p) { return smallest_eigenvalue(p) >= psd_floor(p); }

Matrix symmetrize(const Matrix& p) {
  require_square(p, "symmetrize");
  Matrix s(p.rows(), p.cols());
  for (std::size_t i = 0; i < p.rows(); ++i)
    for (std::size_t j = 0; j < p.cols(); ++j) s(i, j) = (p(i, j) + p(j, i)) / 2.0;
  require_finite(s, "symmetrize");
  const double lambda = smallest_eigenvalue(s);
  if (lambda < psd_floor(s)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "symmetrize: result is indefinite (smallest eigenvalue " << lambda << ")";
    throw NumericError(msg.str());
  }
  return s;
}

Matrix cholesky(const Matrix& p) {
  require_square(p, "cholesky");
  const std::size_t n = p.rows();
  const double scale = std::max(std::abs(trace(p)), 0.0);
  const double pivot_tol = 1e-14 * scale;
  Matrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double d = p(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (d < -kPsdTolerance * scale) {
      std::ostringstream msg;
      msg.precision(17);
      msg << "cholesky: matrix is indefinite (smallest eigenvalue " << smallest_eigenvalue(p)
          << ")";
      throw NumericError(msg.str());
    }
    if (d <= pivot_tol) {
      // Singular direction: leave the column zero.
      continue;
    }
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = p(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / ljj;
    }
  }
  require_finite(l, "cholesky");
  return l;
}

Matrix solve_spd(const Matrix& s, const Matrix& b) {
  require_square(s, "solve_spd");
  if (s.rows() != b.rows()) {
    throw DimensionError("solve_spd: " + s.shape() + " against right-hand side " + b.shape());
  }
  const std::size_t n = s.rows();
  Matrix l(n, n);
  double dmin = 0.0;
  double dmax = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    double d = s(j, j);
    for (std::size_t k = 0; k < j; ++k) d -= l(j, k) * l(j, k);
    if (!(d > 0.0)) {
      throw NumericError("solve_spd: system matrix is not positive definite (pivot " +
                         std::to_string(d) + ")");
    }
    dmin = j == 0 ? d : std::min(dmin, d);
    dmax = j == 0 ? d : std::max(dmax, d);
    const double ljj = std::sqrt(d);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double v = s(i, j);
      for (std::size_t k = 0; k < j; ++k) v -= l(i, k) * l(j, k);
      l(i, j) = v / ljj;
    }
  }
  if (n > 0 && dmin / dmax < kMinReciprocalCondition) {
    std::ostringstream msg;
    msg << "solve_spd: ill-conditioned system (reciprocal condition estimate " << dmin / dmax
        << ")";
    throw NumericError(msg.str());
  }
  // Forward then backward substitution, column by column.
  Matrix x = b;
  for (std::size_t c = 0; c < b.cols(); ++c) {
    for (std::size_t i = 0; i < n; ++i) {
      double v = x(i, c);
      for (std::size_t k = 0; k < i; ++k) v -= l(i, k) * x(k, c);
      x(i, c) = v / l(i, i);
    }
    for (std::size_t ii = n; ii-- > 0;) {
      double v = x(ii, c);
      for (std::size_t k = ii + 1; k < n; ++k) v -= l(k, ii) * x(k, c);
      x(ii, c) = v / l(ii, ii);
    }
  }
  require_finite(x, "solve_spd");
  return x;
}

Vector add(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("vector add: length mismatch");
  Vector c(a.begin(), a.end());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] += b[i];
  return c;
}

Vector subtract(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("vector subtract: length mismatch");
  Vector c(a.begin(), a.end());
  for (std::size_t i = 0; i < c.size(); ++i) c[i] -= b[i];
  return c;
}

double squared_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

}  // namespace predtrig
