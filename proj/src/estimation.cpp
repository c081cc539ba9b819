#include "predtrig/estimation.hpp"

#include "predtrig/errors.hpp"

namespace predtrig {

FilterState FilterState::initial(const Prior& prior) {
  FilterState s;
  s.k = 0;
  s.posterior = {prior.mean, prior.cov};
  s.prior = s.posterior;
  return s;
}

RemoteState RemoteState::initial(const Prior& prior) { return RemoteState{0, prior.mean, 0}; }

Matrix open_loop_step(const ModelProvider& model, std::size_t k, const Matrix& p) {
  return symmetrize(congruence(model.A(k), p) + model.Q(k));
}

Matrix open_loop_covariance(const ModelProvider& model, std::size_t k, std::size_t steps,
                            const Matrix& p) {
  Matrix out = p;
  for (std::size_t j = 0; j < steps; ++j) out = open_loop_step(model, k + j, out);
  return out;
}

CovarianceUpdate covariance_update(const ModelProvider& model, std::size_t k,
                                   const Matrix& prior_cov) {
  const Matrix h = model.H(k);
  const Matrix ph_t = multiply(prior_cov, h.transpose());
  const Matrix innovation_cov = symmetrize(multiply(h, ph_t) + model.R(k));
  // S L^T = H P^-  (S symmetric), so L = P^- H^T S^{-1} without inversion.
  Matrix gain = solve_spd(innovation_cov, ph_t.transpose()).transpose();
  const Matrix i_minus_lh = Matrix::identity(model.state_dim()) - multiply(gain, h);
  Matrix posterior = symmetrize(multiply(i_minus_lh, prior_cov));
  return {std::move(gain), std::move(posterior)};
}

GaussianBelief kf_predict(const FilterState& state, const ModelProvider& model) {
  const Matrix a = model.A(state.k);
  return {multiply(a, state.posterior.mean), open_loop_step(model, state.k, state.posterior.cov)};
}

FilterState kf_update(const GaussianBelief& prior, std::span<const double> y,
                      const ModelProvider& model, std::size_t k) {
  if (y.size() != model.measurement_dim()) {
    throw DimensionError("kf_update: measurement of length " + std::to_string(y.size()) +
                         ", model expects " + std::to_string(model.measurement_dim()));
  }
  if (k == 0) throw RangeError("kf_update: measurements start at k = 1");
  auto [gain, posterior_cov] = covariance_update(model, k, prior.cov);
  const Vector innovation = subtract(y, multiply(model.H(k), prior.mean));
  FilterState s;
  s.k = k;
  s.prior = prior;
  s.posterior = {add(prior.mean, multiply(gain, innovation)), std::move(posterior_cov)};
  s.gain = std::move(gain);
  return s;
}

GaussianBelief predict_m_steps(const FilterState& state, const ModelProvider& model,
                               std::size_t steps) {
  GaussianBelief out = state.posterior;
  for (std::size_t j = 0; j < steps; ++j) {
    const std::size_t t = state.k + j;
    out.mean = multiply(model.A(t), out.mean);
    out.cov = open_loop_step(model, t, out.cov);
  }
  return out;
}

VarianceSchedule::VarianceSchedule(const ModelProvider& model, const Prior& prior,
                                   std::size_t horizon) {
  validate_prior(model, prior);
  prior_.reserve(horizon + 1);
  posterior_.reserve(horizon + 1);
  prior_.push_back(prior.cov);  // unused slot for k = 0
  posterior_.push_back(prior.cov);
  for (std::size_t k = 1; k <= horizon; ++k) {
    prior_.push_back(open_loop_step(model, k - 1, posterior_.back()));
    posterior_.push_back(covariance_update(model, k, prior_.back()).posterior);
  }
}

const Matrix& VarianceSchedule::prior(std::size_t k) const {
  if (k == 0 || k > horizon()) {
    throw RangeError("variance schedule: prior covariance at k = " + std::to_string(k) +
                     " outside [1, " + std::to_string(horizon()) + "]");
  }
  return prior_[k];
}

const Matrix& VarianceSchedule::posterior(std::size_t k) const {
  if (k > horizon()) {
    throw RangeError("variance schedule: posterior covariance at k = " + std::to_string(k) +
                     " beyond horizon " + std::to_string(horizon()));
  }
  return posterior_[k];
}

VarianceSchedule variance_schedule(const ModelProvider& model, const Prior& prior,
                                   std::size_t horizon) {
  if (horizon == 0) throw RangeError("variance_schedule: horizon must be at least 1");
  return VarianceSchedule(model, prior, horizon);
}

RemoteState remote_step(const RemoteState& state, bool transmit,
                        const std::optional<Vector>& payload, const ModelProvider& model) {
  if (transmit != payload.has_value()) {
    throw Error(transmit ? "remote_step: transmission without payload"
                         : "remote_step: payload supplied without transmission");
  }
  RemoteState next;
  next.k = state.k + 1;
  if (transmit) {
    if (payload->size() != model.state_dim()) {
      throw DimensionError("remote_step: payload length " + std::to_string(payload->size()));
    }
    next.estimate = *payload;
    next.last_transmit = next.k;
  } else {
    next.estimate = multiply(model.A(state.k), state.estimate);
    next.last_transmit = state.last_transmit;
  }
  return next;
}

}  // namespace predtrig
