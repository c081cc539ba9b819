#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "predtrig/errors.hpp"
#include "predtrig/matrix.hpp"
#include "support/oracle.hpp"

using namespace predtrig;

namespace {

constexpr double kTight = 1e-12;

Matrix random_psd_rank_deficient(oracle::Gen& gen, std::size_t n, std::size_t rank) {
  const Matrix b = gen.matrix(n, rank);
  Matrix s = multiply(b, b.transpose());
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) s(i, j) = s(j, i);
  return s;
}

}  // namespace

TEST(Matrix, ConstructionAndShape) {
  const Matrix m{{1, 2, 3}, {4, 5, 6}};
  EXPECT_EQ(m.rows(), 2u);
  EXPECT_EQ(m.cols(), 3u);
  EXPECT_EQ(m(1, 2), 6.0);
  EXPECT_EQ(m.shape(), "2x3");
  EXPECT_THROW(Matrix(2, 2, std::vector<double>{1, 2, 3}), DimensionError);
  EXPECT_THROW((Matrix{{1, 2}, {3}}), DimensionError);
  EXPECT_EQ(Matrix::identity(3)(2, 2), 1.0);
  EXPECT_EQ(Matrix::identity(3)(0, 2), 0.0);
}

TEST(Matrix, ProductKnownValues) {
  const Matrix a{{1, 2}, {3, 4}};
  const Matrix b{{0, 1}, {1, 0}};
  EXPECT_EQ(multiply(a, b), (Matrix{{2, 1}, {4, 3}}));
  EXPECT_EQ(multiply(a, std::vector<double>{1, 1}), (Vector{3, 7}));
  EXPECT_EQ(congruence(a, Matrix::identity(2)), (Matrix{{5, 11}, {11, 25}}));
  EXPECT_THROW(multiply(a, Matrix(3, 1)), DimensionError);
  EXPECT_THROW(a + Matrix(2, 3), DimensionError);
  EXPECT_DOUBLE_EQ(trace(a), 5.0);
  EXPECT_THROW(trace(Matrix(2, 3)), DimensionError);
}

TEST(Matrix, NonFiniteProductRejected) {
  const Matrix big = Matrix::scalar(1e300);
  EXPECT_THROW(multiply(big, big), NumericError);
  Matrix nan = Matrix::scalar(std::numeric_limits<double>::quiet_NaN());
  EXPECT_FALSE(nan.all_finite());
  EXPECT_THROW(multiply(nan, Matrix::scalar(1.0)), NumericError);
}

TEST(MatrixProperty, ProductIsAssociative) {
  oracle::Gen gen(11);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = gen.size(1, 4), m = gen.size(1, 4), p = gen.size(1, 4), q = gen.size(1, 4);
    const Matrix a = gen.matrix(n, m), b = gen.matrix(m, p), c = gen.matrix(p, q);
    const Matrix left = multiply(multiply(a, b), c);
    const Matrix right = multiply(a, multiply(b, c));
    const double scale = 1.0 + frobenius_norm(left);
    EXPECT_LE(oracle::max_abs_diff(left, right), kTight * scale) << "trial " << trial;
  }
}

TEST(MatrixProperty, TraceOfProductCommutes) {
  oracle::Gen gen(12);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = gen.size(1, 5), m = gen.size(1, 5);
    const Matrix a = gen.matrix(n, m), b = gen.matrix(m, n);
    const double ab = trace(multiply(a, b)), ba = trace(multiply(b, a));
    EXPECT_NEAR(ab, ba, kTight * (1.0 + std::abs(ab)));
  }
}

TEST(MatrixProperty, SymmetrizeIsIdempotent) {
  oracle::Gen gen(13);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = gen.size(1, 5);
    Matrix p = gen.spd(n);
    p(0, n - 1) += 1e-9;  // small asymmetry
    const Matrix once = symmetrize(p);
    EXPECT_EQ(symmetrize(once), once);
    EXPECT_EQ(once, once.transpose());
  }
}

TEST(Matrix, SymmetrizeRejectsIndefinite) {
  EXPECT_THROW(symmetrize(Matrix{{1, 0}, {0, -1}}), NumericError);
  // Rounding-level negativity is tolerated.
  EXPECT_NO_THROW(symmetrize(Matrix{{1, 0}, {0, -1e-13}}));
}

TEST(MatrixProperty, CholeskyReconstructs) {
  oracle::Gen gen(14);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = gen.size(1, 6);
    const Matrix p = gen.spd(n, 1e-3);
    const Matrix l = cholesky(p);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = i + 1; j < n; ++j) EXPECT_EQ(l(i, j), 0.0);
    EXPECT_LE(oracle::max_abs_diff(multiply(l, l.transpose()), p), 1e-12 * (1.0 + trace(p)));
  }
}

TEST(MatrixProperty, CholeskyOfSingularPsdReconstructs) {
  oracle::Gen gen(15);
  for (int trial = 0; trial < 100; ++trial) {
    const std::size_t n = gen.size(2, 5);
    const Matrix p = random_psd_rank_deficient(gen, n, n - 1);
    const Matrix l = cholesky(p);
    EXPECT_LE(oracle::max_abs_diff(multiply(l, l.transpose()), p), 1e-9 * (1.0 + trace(p)));
  }
  // Exact zero variance in one coordinate.
  const Matrix l = cholesky(Matrix{{0, 0}, {0, 4}});
  EXPECT_EQ(l, (Matrix{{0, 0}, {0, 2}}));
}

TEST(Matrix, CholeskyRejectsIndefinite) {
  try {
    cholesky(Matrix{{1, 2}, {2, 1}});
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_NE(std::string(e.what()).find("eigenvalue"), std::string::npos);
  }
}

TEST(MatrixProperty, SolveSpdResidual) {
  oracle::Gen gen(16);
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t n = gen.size(1, 5), k = gen.size(1, 3);
    const Matrix s = gen.spd(n, 0.5);
    const Matrix b = gen.matrix(n, k);
    const Matrix x = solve_spd(s, b);
    EXPECT_LE(oracle::max_abs_diff(multiply(s, x), b), 1e-10 * (1.0 + frobenius_norm(b)));
  }
}

TEST(Matrix, SolveSpdRejectsIllConditioned) {
  EXPECT_THROW(solve_spd(Matrix{{1, 0}, {0, 1e-16}}, Matrix(2, 1, 1.0)), NumericError);
  EXPECT_THROW(solve_spd(Matrix{{1, 0}, {0, 0}}, Matrix(2, 1, 1.0)), NumericError);
  EXPECT_THROW(solve_spd(Matrix{{1, 2}, {2, 1}}, Matrix(2, 1, 1.0)), NumericError);
}

TEST(Matrix, SmallestEigenvalue) {
  EXPECT_NEAR(smallest_eigenvalue(Matrix{{2, 1}, {1, 2}}), 1.0, kTight);
  EXPECT_NEAR(smallest_eigenvalue(Matrix{{4, 0, 0}, {0, -3, 0}, {0, 0, 1}}), -3.0, kTight);
  EXPECT_TRUE(is_psd(Matrix{{1, 1}, {1, 1}}));
  EXPECT_FALSE(is_psd(Matrix{{1, 2}, {2, 1}}));
}

TEST(Matrix, VectorHelpers) {
  const Vector a{1, 2}, b{3, 5};
  EXPECT_EQ(add(a, b), (Vector{4, 7}));
  EXPECT_EQ(subtract(b, a), (Vector{2, 3}));
  EXPECT_EQ(squared_norm(b), 34.0);
  EXPECT_THROW(add(a, Vector{1}), DimensionError);
}
