#include "predtrig/system_model.hpp"

#include "predtrig/errors.hpp"

namespace predtrig {
namespace {

Matrix checked(Matrix m, std::size_t rows, std::size_t cols, const char* name, std::size_t k) {
  if (m.rows() != rows || m.cols() != cols) {
    throw DimensionError(std::string("model matrix ") + name + "(" + std::to_string(k) +
                         ") has shape " + m.shape() + ", expected " + std::to_string(rows) + "x" +
                         std::to_string(cols));
  }
  if (!m.all_finite()) {
    throw NumericError(std::string("model matrix ") + name + "(" + std::to_string(k) +
                       ") has non-finite entries");
  }
  return m;
}

Matrix checked_covariance(Matrix m, std::size_t n, const char* name, std::size_t k) {
  m = checked(std::move(m), n, n, name, k);
  if (!(symmetrize(m) == m)) {
    throw NumericError(std::string("model matrix ") + name + "(" + std::to_string(k) +
                       ") is not symmetric");
  }
  return m;
}

}  // namespace

ModelProvider::ModelProvider(std::size_t state_dim, std::size_t measurement_dim, MatrixFn A,
                             MatrixFn H, MatrixFn Q, MatrixFn R)
    : nx_(state_dim), ny_(measurement_dim), a_(std::move(A)), h_(std::move(H)),
      q_(std::move(Q)), r_(std::move(R)) {
  if (nx_ == 0 || ny_ == 0) throw DimensionError("model dimensions must be positive");
  if (!a_ || !h_ || !q_ || !r_) throw Error("model matrix function is empty");
}

ModelProvider ModelProvider::lti(Matrix A, Matrix H, Matrix Q, Matrix R) {
  const std::size_t nx = A.rows();
  const std::size_t ny = H.rows();
  Constant c{checked(std::move(A), nx, nx, "A", 0), checked(std::move(H), ny, nx, "H", 0),
             checked_covariance(std::move(Q), nx, "Q", 0),
             checked_covariance(std::move(R), ny, "R", 0)};
  ModelProvider model(
      nx, ny, [m = c.A](std::size_t) { return m; }, [m = c.H](std::size_t) { return m; },
      [m = c.Q](std::size_t) { return m; }, [m = c.R](std::size_t) { return m; });
  model.lti_ = std::move(c);
  return model;
}

Matrix ModelProvider::A(std::size_t k) const {
  return lti_ ? lti_->A : checked(a_(k), nx_, nx_, "A", k);
}

Matrix ModelProvider::H(std::size_t k) const {
  return lti_ ? lti_->H : checked(h_(k), ny_, nx_, "H", k);
}

Matrix ModelProvider::Q(std::size_t k) const {
  return lti_ ? lti_->Q : checked_covariance(q_(k), nx_, "Q", k);
}

Matrix ModelProvider::R(std::size_t k) const {
  return lti_ ? lti_->R : checked_covariance(r_(k), ny_, "R", k);
}

void validate_prior(const ModelProvider& model, const Prior& prior) {
  const std::size_t n = model.state_dim();
  if (prior.mean.size() != n || prior.cov.rows() != n || prior.cov.cols() != n) {
    throw DimensionError("prior has mean length " + std::to_string(prior.mean.size()) +
                         " and covariance " + prior.cov.shape() + ", model state dimension is " +
                         std::to_string(n));
  }
  if (!(symmetrize(prior.cov) == prior.cov)) throw NumericError("prior covariance is not symmetric");
}

Vector sample_gaussian(std::span<const double> mean, const Matrix& cov, RngStream& rng) {
  if (cov.rows() != mean.size() || cov.cols() != mean.size()) {
    throw DimensionError("sample_gaussian: mean length " + std::to_string(mean.size()) +
                         " with covariance " + cov.shape());
  }
  const Matrix l = cholesky(cov);
  Vector z(mean.size());
  for (double& v : z) v = rng.standard_normal();
  return add(mean, multiply(l, z));
}

Trajectory simulate_trajectory(const ModelProvider& model, const Prior& prior, std::size_t steps,
                               RngStream& rng) {
  if (steps == 0) throw RangeError("simulate_trajectory: horizon must be at least 1");
  validate_prior(model, prior);
  const Vector zero_x(model.state_dim(), 0.0);
  const Vector zero_y(model.measurement_dim(), 0.0);

  Trajectory traj;
  traj.initial_state = sample_gaussian(prior.mean, prior.cov, rng);
  traj.states.reserve(steps);
  traj.measurements.reserve(steps);
  Vector x = traj.initial_state;
  for (std::size_t k = 1; k <= steps; ++k) {
    const Vector v = sample_gaussian(zero_x, model.Q(k - 1), rng);
    x = add(multiply(model.A(k - 1), x), v);
    const Vector w = sample_gaussian(zero_y, model.R(k), rng);
    traj.measurements.push_back(add(multiply(model.H(k), x), w));
    traj.states.push_back(x);
  }
  return traj;
}

Matrix transition_product(const ModelProvider& model, std::int64_t k1, std::int64_t k2) {
  if (k2 < k1 - 1) {
    throw RangeError("transition_product: k2 = " + std::to_string(k2) + " precedes k1 - 1 = " +
                     std::to_string(k1 - 1));
  }
  if (k1 < 0) throw RangeError("transition_product: negative time index");
  Matrix phi = Matrix::identity(model.state_dim());
  for (std::int64_t k = k1; k <= k2; ++k) {
    phi = multiply(model.A(static_cast<std::size_t>(k)), phi);
  }
  return phi;
}

}  // namespace predtrig
