#include "predtrig/triggering.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "predtrig/errors.hpp"

namespace predtrig {
namespace {

void require_cost(double c, const char* where) {
  if (!std::isfinite(c) || c < 0.0) {
    throw ConfigError(std::string(where) + ": communication cost must be finite and >= 0, got " +
                      std::to_string(c));
  }
}

void require_time(const FilterState& filter, const RemoteState& remote_prev, std::size_t k,
                  const char* where) {
  if (k == 0) throw RangeError(std::string(where) + ": decisions start at k = 1");
  if (filter.k != k) {
    throw RangeError(std::string(where) + ": filter is at time " + std::to_string(filter.k) +
                     ", expected " + std::to_string(k));
  }
  if (remote_prev.k + 1 != k) {
    throw RangeError(std::string(where) + ": remote state is at time " +
                     std::to_string(remote_prev.k) + ", expected " + std::to_string(k - 1));
  }
}

// Gap between open-loop and closed-loop covariance traces. Negative values
// within rounding are clamped.
double covariance_gap(const Matrix& open_loop, const Matrix& closed_loop) {
  const double gap = trace(open_loop) - trace(closed_loop);
  const double tol = 1e-10 * std::max(1.0, std::abs(trace(open_loop)));
  if (gap < -tol) {
    throw NumericError("variance signal is negative (" + std::to_string(gap) +
                       "): open-loop covariance below closed-loop covariance");
  }
  return std::max(gap, 0.0);
}

}  // namespace

CostSchedule CostSchedule::constant(double cost) {
  require_cost(cost, "CostSchedule::constant");
  CostSchedule c;
  c.constant_ = cost;
  return c;
}

CostSchedule CostSchedule::table(std::vector<double> costs) {
  if (costs.empty()) throw ConfigError("cost table is empty");
  for (double c : costs) require_cost(c, "CostSchedule::table");
  CostSchedule s;
  s.table_ = std::move(costs);
  return s;
}

double CostSchedule::at(std::size_t k) const {
  if (table_.empty()) return constant_;
  if (k == 0) throw RangeError("cost schedule is indexed from k = 1");
  return table_[std::min(k, table_.size()) - 1];
}

double CostSchedule::constant_value() const noexcept {
  return table_.empty() ? constant_ : std::numeric_limits<double>::quiet_NaN();
}

void DecisionLedger::commit(std::size_t t, bool transmit) {
  if (t != bits_.size() + 1) {
    throw RangeError("ledger: committing gamma_" + std::to_string(t) + " with frontier at " +
                     std::to_string(bits_.size()));
  }
  bits_.push_back(transmit);
  if (transmit) triggers_.push_back(t);
}

bool DecisionLedger::decision(std::size_t t) const {
  if (t == 0 || t > bits_.size()) {
    throw RangeError("ledger: gamma_" + std::to_string(t) + " not committed (frontier " +
                     std::to_string(bits_.size()) + ")");
  }
  return bits_[t - 1];
}

std::optional<std::size_t> DecisionLedger::last_scheduled(std::size_t t) const {
  if (t > bits_.size()) {
    throw RangeError("ledger: kappa at " + std::to_string(t) + " beyond frontier " +
                     std::to_string(bits_.size()));
  }
  auto it = std::upper_bound(triggers_.begin(), triggers_.end(), t);
  if (it == triggers_.begin()) return std::nullopt;
  return *std::prev(it);
}

std::string to_string(TriggerKind kind) {
  switch (kind) {
    case TriggerKind::Event: return "et";
    case TriggerKind::Predictive: return "pt";
    case TriggerKind::Self: return "st";
  }
  return "?";
}

TriggerKind parse_trigger_kind(const std::string& name) {
  if (name == "et") return TriggerKind::Event;
  if (name == "pt") return TriggerKind::Predictive;
  if (name == "st") return TriggerKind::Self;
  throw ConfigError("unknown trigger kind '" + name + "' (expected et, pt or st)");
}

TriggerSpec TriggerSpec::event(CostSchedule cost) {
  TriggerSpec s;
  s.kind = TriggerKind::Event;
  s.cost = std::move(cost);
  return s;
}

TriggerSpec TriggerSpec::predictive(CostSchedule cost, std::size_t horizon) {
  if (horizon < 1) throw ConfigError("predictive trigger needs a horizon M >= 1");
  TriggerSpec s;
  s.kind = TriggerKind::Predictive;
  s.horizon = horizon;
  s.cost = std::move(cost);
  return s;
}

TriggerSpec TriggerSpec::predictive_zero_horizon(CostSchedule cost) {
  TriggerSpec s;
  s.kind = TriggerKind::Predictive;
  s.horizon = 0;
  s.cost = std::move(cost);
  return s;
}

TriggerSpec TriggerSpec::self(CostSchedule cost, std::size_t max_horizon) {
  if (max_horizon < 1) throw ConfigError("self trigger needs M_max >= 1");
  TriggerSpec s;
  s.kind = TriggerKind::Self;
  s.cost = std::move(cost);
  s.max_horizon = max_horizon;
  return s;
}

GaussianBelief error_I_distribution(std::size_t k, std::size_t horizon, const FilterState& filter,
                                    const RemoteState& remote_prev, const DecisionLedger& ledger,
                                    const ModelProvider& model, const VarianceSchedule& schedule) {
  require_time(filter, remote_prev, k, "error_I_distribution");
  if (ledger.frontier() + 1 < k + horizon) {
    throw RangeError("error_I_distribution: ledger frontier " + std::to_string(ledger.frontier()) +
                     " does not cover k + M - 1 = " + std::to_string(k + horizon - 1));
  }
  const auto kappa = ledger.last_scheduled(k + horizon - 1);
  if (!kappa || k > *kappa) {
    const Vector propagated_remote = multiply(model.A(k - 1), remote_prev.estimate);
    const Matrix phi = transition_product(model, static_cast<std::int64_t>(k),
                                          static_cast<std::int64_t>(k + horizon) - 1);
    return {multiply(phi, subtract(filter.posterior.mean, propagated_remote)),
            open_loop_covariance(model, k, horizon, filter.posterior.cov)};
  }
  const std::size_t delta = k + horizon - *kappa;
  return {Vector(model.state_dim(), 0.0),
          open_loop_covariance(model, *kappa, delta, schedule.posterior(*kappa))};
}

GaussianBelief error_II_distribution(std::size_t k, std::size_t horizon,
                                     const VarianceSchedule& schedule) {
  const Matrix& p = schedule.posterior(k + horizon);
  return {Vector(p.rows(), 0.0), p};
}

double mean_signal(std::size_t k, std::size_t horizon, const FilterState& filter,
                   const RemoteState& remote_prev, const ModelProvider& model) {
  require_time(filter, remote_prev, k, "mean_signal");
  // Phi_{(k-1):l} x^F_l equals the remote's propagated estimate A_{k-1} x_{k-1}.
  const Vector discrepancy =
      subtract(filter.posterior.mean, multiply(model.A(k - 1), remote_prev.estimate));
  const Matrix phi = transition_product(model, static_cast<std::int64_t>(k),
                                        static_cast<std::int64_t>(k + horizon) - 1);
  return squared_norm(multiply(phi, discrepancy));
}

double variance_signal(std::size_t k, std::size_t horizon, const Matrix& posterior_k,
                       const VarianceSchedule& schedule, const ModelProvider& model) {
  const Matrix& closed_loop = schedule.posterior(k + horizon);
  return covariance_gap(open_loop_covariance(model, k, horizon, posterior_k), closed_loop);
}

TriggerSignals event_signals(std::size_t k, const FilterState& filter,
                             const RemoteState& remote_prev, const CostSchedule& cost,
                             const ModelProvider& model) {
  TriggerSignals s;
  s.mean = mean_signal(k, 0, filter, remote_prev, model);
  s.combined = s.mean;
  s.threshold = cost.at(k);
  return s;
}

TriggerDecision event_trigger(std::size_t k, const FilterState& filter,
                              const RemoteState& remote_prev, const CostSchedule& cost,
                              const ModelProvider& model) {
  const TriggerSignals s = event_signals(k, filter, remote_prev, cost, model);
  return {k, s.fires(), s};
}

TriggerSignals predictive_signals(std::size_t k, std::size_t horizon, const FilterState& filter,
                                  const RemoteState& remote_prev, const DecisionLedger& ledger,
                                  const CostSchedule& cost, const VarianceSchedule& schedule,
                                  const ModelProvider& model) {
  require_time(filter, remote_prev, k, "predictive_trigger");
  if (ledger.frontier() + 1 < k + horizon) {
    throw RangeError("predictive_trigger: ledger gap, frontier " +
                     std::to_string(ledger.frontier()) + " before k + M - 1 = " +
                     std::to_string(k + horizon - 1));
  }
  TriggerSignals s;
  s.threshold = cost.at(k + horizon);
  const auto kappa = horizon == 0 ? ledger.last_scheduled(k - 1)
                                  : ledger.last_scheduled(k + horizon - 1);
  if (!kappa || k > *kappa) {
    // Last scheduled trigger is in the past: data-dependent branch.
    s.mean = mean_signal(k, horizon, filter, remote_prev, model);
    s.variance = variance_signal(k, horizon, filter.posterior.cov, schedule, model);
    s.combined = s.mean + s.variance;
  } else {
    // A trigger is scheduled at kappa in [k, k+M-1]: variance prediction from kappa.
    const std::size_t delta = k + horizon - *kappa;
    s.variance = variance_signal(*kappa, delta, schedule.posterior(*kappa), schedule, model);
    s.combined = s.variance;
  }
  return s;
}

TriggerDecision predictive_trigger(std::size_t k, std::size_t horizon, const FilterState& filter,
                                   const RemoteState& remote_prev, DecisionLedger& ledger,
                                   const CostSchedule& cost, const VarianceSchedule& schedule,
                                   const ModelProvider& model) {
  if (ledger.frontier() + 1 != k + horizon) {
    throw RangeError("predictive_trigger: expected ledger frontier " +
                     std::to_string(k + horizon - 1) + ", found " +
                     std::to_string(ledger.frontier()));
  }
  const TriggerSignals s =
      predictive_signals(k, horizon, filter, remote_prev, ledger, cost, schedule, model);
  ledger.commit(k + horizon, s.fires());
  return {k + horizon, s.fires(), s};
}

DecisionLedger predictive_warm_up(std::size_t horizon, const CostSchedule& cost,
                                  const VarianceSchedule& schedule, const ModelProvider& model) {
  DecisionLedger ledger;
  ledger.commit(1, true);
  for (std::size_t t = 2; t <= horizon; ++t) {
    const std::size_t kappa = *ledger.last_scheduled(t - 1);
    const std::size_t delta = t - kappa;
    const double gap = variance_signal(kappa, delta, schedule.posterior(kappa), schedule, model);
    ledger.commit(t, gap >= cost.at(t));
  }
  return ledger;
}

std::optional<std::size_t> self_trigger(std::size_t last_transmit, const VarianceSchedule& schedule,
                                        const CostSchedule& cost, std::size_t max_horizon,
                                        const ModelProvider& model) {
  if (max_horizon < 1) throw RangeError("self_trigger: M_max must be at least 1");
  if (schedule.horizon() < last_transmit + max_horizon) {
    throw RangeError("self_trigger: schedule horizon " + std::to_string(schedule.horizon()) +
                     " does not reach l + M_max = " + std::to_string(last_transmit + max_horizon));
  }
  Matrix open_loop = schedule.posterior(last_transmit);
  for (std::size_t m = 1; m <= max_horizon; ++m) {
    open_loop = open_loop_step(model, last_transmit + m - 1, open_loop);
    const double gap = covariance_gap(open_loop, schedule.posterior(last_transmit + m));
    if (gap >= cost.at(last_transmit + m)) return m;
  }
  return std::nullopt;
}

Matrix steady_state_posterior(const ModelProvider& model, const SteadyStateOptions& options) {
  if (!model.is_time_invariant()) {
    throw Error("steady_state_posterior: model is not time-invariant");
  }
  Matrix p = Matrix::zeros(model.state_dim(), model.state_dim());
  for (std::size_t it = 0; it < options.max_iterations; ++it) {
    Matrix next = covariance_update(model, 1, open_loop_step(model, 0, p)).posterior;
    const double change = frobenius_norm(next - p);
    p = std::move(next);
    if (change < options.tolerance) return p;
  }
  throw NumericError("steady_state_posterior: Riccati iteration did not converge within " +
                     std::to_string(options.max_iterations) + " iterations");
}

double steady_state_gap(const ModelProvider& model, const Matrix& steady_posterior,
                        std::size_t steps) {
  return covariance_gap(open_loop_covariance(model, 0, steps, steady_posterior), steady_posterior);
}

std::optional<std::size_t> steady_state_period(const ModelProvider& model,
                                               const Matrix& steady_posterior, double cost,
                                               std::size_t max_horizon) {
  require_cost(cost, "steady_state_period");
  Matrix open_loop = steady_posterior;
  for (std::size_t m = 1; m <= max_horizon; ++m) {
    open_loop = open_loop_step(model, 0, open_loop);
    if (covariance_gap(open_loop, steady_posterior) >= cost) return m;
  }
  return std::nullopt;
}

std::optional<std::size_t> steady_state_period(const ModelProvider& model, double cost,
                                               std::size_t max_horizon) {
  return steady_state_period(model, steady_state_posterior(model), cost, max_horizon);
}

}  // namespace predtrig
