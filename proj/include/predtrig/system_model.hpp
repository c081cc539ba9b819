#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "predtrig/matrix.hpp"
#include "predtrig/rng.hpp"

namespace predtrig {

/// Linear Gaussian plant and sensor
///
///   x_k = A_{k-1} x_{k-1} + v_{k-1},   v ~ N(0, Q_{k-1})
///   y_k = H_k x_k + w_k,               w ~ N(0, R_k)
///
/// Every matrix is a total function of the time index k >= 0. Shapes are
/// checked on every query; Q and R are checked for symmetry and PSD.
class ModelProvider {
 public:
  using MatrixFn = std::function<Matrix(std::size_t)>;

  ModelProvider(std::size_t state_dim, std::size_t measurement_dim, MatrixFn A, MatrixFn H,
                MatrixFn Q, MatrixFn R);

  /// Time-invariant model; matrices are validated once here.
  static ModelProvider lti(Matrix A, Matrix H, Matrix Q, Matrix R);

  std::size_t state_dim() const noexcept { return nx_; }
  std::size_t measurement_dim() const noexcept { return ny_; }
  bool is_time_invariant() const noexcept { return lti_.has_value(); }

  Matrix A(std::size_t k) const;
  Matrix H(std::size_t k) const;
  Matrix Q(std::size_t k) const;
  Matrix R(std::size_t k) const;

 private:
  struct Constant {
    Matrix A, H, Q, R;
  };

  std::size_t nx_;
  std::size_t ny_;
  MatrixFn a_, h_, q_, r_;
  std::optional<Constant> lti_;
};

struct Prior {
  Vector mean;
  Matrix cov;
};

/// Checks prior dimensions against the model; throws DimensionError.
void validate_prior(const ModelProvider& model, const Prior& prior);

/// x_0 plus states x_1..x_K and measurements y_1..y_K (index j holds time j+1).
struct Trajectory {
  Vector initial_state;
  std::vector<Vector> states;
  std::vector<Vector> measurements;

  std::size_t horizon() const noexcept { return states.size(); }
  const Vector& state(std::size_t k) const { return k == 0 ? initial_state : states.at(k - 1); }
  const Vector& measurement(std::size_t k) const { return measurements.at(k - 1); }
};

/// mean + L z with z standard normal and L = cholesky(cov). Always consumes
/// exactly mean.size() normals, even for a zero covariance.
Vector sample_gaussian(std::span<const double> mean, const Matrix& cov, RngStream& rng);

/// Noise is drawn in the fixed order x_0, v_0, w_1, v_1, w_2, ..., v_{K-1}, w_K.
Trajectory simulate_trajectory(const ModelProvider& model, const Prior& prior, std::size_t steps,
                               RngStream& rng);

/// A_{k2} A_{k2-1} ... A_{k1}; the identity when k2 == k1 - 1.
Matrix transition_product(const ModelProvider& model, std::int64_t k1, std::int64_t k2);

}  // namespace predtrig
