#pragma once

#include <cstddef>
#include <optional>
#include <vector>

#include "predtrig/matrix.hpp"
#include "predtrig/system_model.hpp"

namespace predtrig {

struct GaussianBelief {
  Vector mean;
  Matrix cov;
};

/// Local full-information Kalman filter at time k.
struct FilterState {
  std::size_t k = 0;
  GaussianBelief posterior;  // x^F_k, P^F_k
  GaussianBelief prior;      // x^F_{k|k-1}, P^F_{k|k-1}
  Matrix gain;               // L_k (empty at k = 0)

  /// Time 0: the posterior is the initial prior N(x0_mean, X0).
  static FilterState initial(const Prior& prior);
};

/// Remote estimator state after step k.
struct RemoteState {
  std::size_t k = 0;
  Vector estimate;
  std::size_t last_transmit = 0;

  /// Time 0: the remote starts from the prior mean with no transmission yet.
  static RemoteState initial(const Prior& prior);
};

/// Open-loop covariance map V_o^k(P) = A_k P A_k^T + Q_k, symmetrized.
Matrix open_loop_step(const ModelProvider& model, std::size_t k, const Matrix& p);

/// V_o^{k+steps-1} o ... o V_o^{k} applied to p; p itself when steps == 0.
Matrix open_loop_covariance(const ModelProvider& model, std::size_t k, std::size_t steps,
                            const Matrix& p);

/// Measurement update of a covariance: returns (gain, posterior covariance).
/// Shared by the filter and the offline schedule so both agree bitwise.
struct CovarianceUpdate {
  Matrix gain;
  Matrix posterior;
};
CovarianceUpdate covariance_update(const ModelProvider& model, std::size_t k,
                                   const Matrix& prior_cov);

/// Time update from state.k to state.k + 1.
GaussianBelief kf_predict(const FilterState& state, const ModelProvider& model);

/// Measurement update at time k with measurement y.
FilterState kf_update(const GaussianBelief& prior, std::span<const double> y,
                      const ModelProvider& model, std::size_t k);

/// (x_{k+M} | Y_k): open-loop mean and covariance propagation from the posterior.
GaussianBelief predict_m_steps(const FilterState& state, const ModelProvider& model,
                               std::size_t steps);

/// Deterministic KF covariance recursion; needs no measurements.
class VarianceSchedule {
 public:
  VarianceSchedule(const ModelProvider& model, const Prior& prior, std::size_t horizon);

  std::size_t horizon() const noexcept { return posterior_.size() - 1; }
  /// P^F_{k|k-1}, 1 <= k <= horizon.
  const Matrix& prior(std::size_t k) const;
  /// P^F_k, 0 <= k <= horizon (k = 0 is X_0).
  const Matrix& posterior(std::size_t k) const;

 private:
  std::vector<Matrix> prior_;
  std::vector<Matrix> posterior_;
};

VarianceSchedule variance_schedule(const ModelProvider& model, const Prior& prior,
                                   std::size_t horizon);

/// Advances the remote estimator from state.k to state.k + 1. With transmit
/// set, the payload (the local posterior mean) replaces the estimate;
/// otherwise the estimate is propagated through A.
RemoteState remote_step(const RemoteState& state, bool transmit,
                        const std::optional<Vector>& payload, const ModelProvider& model);

}  // namespace predtrig
