#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "predtrig/estimation.hpp"
#include "predtrig/matrix.hpp"
#include "predtrig/system_model.hpp"

namespace predtrig {

/// Communication cost C_k, either constant or tabulated. A table lists
/// C_1, C_2, ...; queries past its end return the last entry.
class CostSchedule {
 public:
  static CostSchedule constant(double cost);
  static CostSchedule table(std::vector<double> costs);

  double at(std::size_t k) const;
  bool is_constant() const noexcept { return table_.empty(); }
  /// The constant value, or NaN for a table.
  double constant_value() const noexcept;

 private:
  CostSchedule() = default;

  double constant_ = 0.0;
  std::vector<double> table_;
};

/// Committed transmit decisions gamma_1..gamma_F, F being the frontier.
class DecisionLedger {
 public:
  std::size_t frontier() const noexcept { return bits_.size(); }

  /// Appends gamma_t; t must be frontier() + 1.
  void commit(std::size_t t, bool transmit);

  bool decision(std::size_t t) const;

  /// kappa(Gamma, t): last t' <= t with gamma_t' = 1.
  std::optional<std::size_t> last_scheduled(std::size_t t) const;

  /// ell_k, the last transmit at or before k; 0 when there has been none.
  std::size_t last_executed(std::size_t k) const { return last_scheduled(k).value_or(0); }

  const std::vector<bool>& decisions() const noexcept { return bits_; }

 private:
  std::vector<bool> bits_;
  std::vector<std::size_t> triggers_;
};

/// The two components of the expected estimation cost and the threshold
/// they are compared against. Ties fire.
struct TriggerSignals {
  double mean = 0.0;
  double variance = 0.0;
  double combined = 0.0;
  double threshold = 0.0;

  bool fires() const noexcept { return combined >= threshold; }
};

struct TriggerDecision {
  std::size_t target = 0;  // the time the decision is about
  bool transmit = false;
  TriggerSignals signals;
};

enum class TriggerKind { Event, Predictive, Self };

enum class WarmUpPolicy { ForcedInitialTransmit };

std::string to_string(TriggerKind kind);
/// "et" | "pt" | "st"; throws ConfigError otherwise.
TriggerKind parse_trigger_kind(const std::string& name);

struct TriggerSpec {
  TriggerKind kind = TriggerKind::Event;
  std::size_t horizon = 0;  // PT prediction horizon M
  CostSchedule cost = CostSchedule::constant(0.0);
  std::size_t max_horizon = 10000;  // ST search cap
  WarmUpPolicy warm_up = WarmUpPolicy::ForcedInitialTransmit;

  static TriggerSpec event(CostSchedule cost);
  /// Throws unless horizon >= 1.
  static TriggerSpec predictive(CostSchedule cost, std::size_t horizon);
  /// PT with M = 0. Reduces to the event trigger; used for equivalence checks.
  static TriggerSpec predictive_zero_horizon(CostSchedule cost);
  static TriggerSpec self(CostSchedule cost, std::size_t max_horizon = 10000);
};

// ---------------------------------------------------------------------------
// Predicted error distributions.
//
// `remote_prev` is always the remote state entering step k (time k - 1), so
// that A_{k-1} x_{k-1} is the remote's propagated estimate.

/// Distribution of e^I_{k+M} given Y_k. The ledger must be committed
/// through k + M - 1.
GaussianBelief error_I_distribution(std::size_t k, std::size_t horizon, const FilterState& filter,
                                    const RemoteState& remote_prev, const DecisionLedger& ledger,
                                    const ModelProvider& model, const VarianceSchedule& schedule);

/// Distribution of e^II_{k+M} given Y_k: N(0, P^F_{k+M}).
GaussianBelief error_II_distribution(std::size_t k, std::size_t horizon,
                                     const VarianceSchedule& schedule);

/// || Phi_{(k+M-1):k} (x^F_k - A_{k-1} x_{k-1}) ||^2
double mean_signal(std::size_t k, std::size_t horizon, const FilterState& filter,
                   const RemoteState& remote_prev, const ModelProvider& model);

/// trace(P^F_{k+M|k} - P^F_{k+M}) with P^F_{k+M|k} propagated open-loop from
/// `posterior_k`. Non-negative; tiny negative rounding is clamped to zero,
/// anything beyond tolerance throws NumericError.
double variance_signal(std::size_t k, std::size_t horizon, const Matrix& posterior_k,
                       const VarianceSchedule& schedule, const ModelProvider& model);

// ---------------------------------------------------------------------------
// Triggers.

TriggerSignals event_signals(std::size_t k, const FilterState& filter,
                             const RemoteState& remote_prev, const CostSchedule& cost,
                             const ModelProvider& model);

/// gamma_k = 1 iff ||x^F_k - A_{k-1} x_{k-1}||^2 >= C_k.
TriggerDecision event_trigger(std::size_t k, const FilterState& filter,
                              const RemoteState& remote_prev, const CostSchedule& cost,
                              const ModelProvider& model);

/// Signals for the decision on gamma_{k+M}, without committing it.
TriggerSignals predictive_signals(std::size_t k, std::size_t horizon, const FilterState& filter,
                                  const RemoteState& remote_prev, const DecisionLedger& ledger,
                                  const CostSchedule& cost, const VarianceSchedule& schedule,
                                  const ModelProvider& model);

/// Decides gamma_{k+M} and commits it. Requires ledger.frontier() == k+M-1.
TriggerDecision predictive_trigger(std::size_t k, std::size_t horizon, const FilterState& filter,
                                   const RemoteState& remote_prev, DecisionLedger& ledger,
                                   const CostSchedule& cost, const VarianceSchedule& schedule,
                                   const ModelProvider& model);

/// Ledger before the first measurement: gamma_1 = 1, then gamma_2..gamma_M
/// from the measurement-independent branch.
DecisionLedger predictive_warm_up(std::size_t horizon, const CostSchedule& cost,
                                  const VarianceSchedule& schedule, const ModelProvider& model);

/// Smallest M in [1, max_horizon] with trace(P^F_{l+M|l} - P^F_{l+M}) >= C_{l+M};
/// nullopt when there is none (no finite trigger). The schedule must reach
/// l + max_horizon.
std::optional<std::size_t> self_trigger(std::size_t last_transmit, const VarianceSchedule& schedule,
                                        const CostSchedule& cost, std::size_t max_horizon,
                                        const ModelProvider& model);

// ---------------------------------------------------------------------------
// Steady-state analysis (time-invariant models only).

struct SteadyStateOptions {
  double tolerance = 1e-12;
  std::size_t max_iterations = 1000000;
};

/// Fixed point of the predict + update covariance map, by iteration from zero.
Matrix steady_state_posterior(const ModelProvider& model, const SteadyStateOptions& options = {});

/// trace(V_o^M(P) - P) for the steady-state posterior P.
double steady_state_gap(const ModelProvider& model, const Matrix& steady_posterior,
                        std::size_t steps);

/// Smallest M with trace(V_o^M(P) - P) >= cost; nullopt when none <= max_horizon.
std::optional<std::size_t> steady_state_period(const ModelProvider& model, double cost,
                                               std::size_t max_horizon = 10000);
std::optional<std::size_t> steady_state_period(const ModelProvider& model,
                                               const Matrix& steady_posterior, double cost,
                                               std::size_t max_horizon = 10000);

}  // namespace predtrig
