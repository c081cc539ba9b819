#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <vector>

#include "predtrig/estimation.hpp"
#include "predtrig/system_model.hpp"
#include "predtrig/triggering.hpp"

namespace predtrig {

struct TraceStep {
  std::size_t k = 0;
  Vector state;
  Vector measurement;
  Vector filter_estimate;
  Vector remote_estimate;
  bool transmit = false;
  TriggerSignals signals;  // signals evaluated at step k

  Vector filter_error() const { return subtract(state, filter_estimate); }
  Vector remote_error() const { return subtract(state, remote_estimate); }
};

struct SimulationTrace {
  TriggerSpec spec;
  std::vector<TraceStep> steps;

  std::size_t horizon() const noexcept { return steps.size(); }
  std::vector<bool> decisions() const;
};

struct RunMetrics {
  double mean_squared_error = 0.0;  // average of e_k^T e_k over k = 1..K
  double communication = 0.0;       // fraction of steps with gamma_k = 1
};

RunMetrics run_metrics(const SimulationTrace& trace);

struct TradeoffPoint {
  TriggerKind kind = TriggerKind::Event;
  std::size_t horizon = 0;
  double cost = 0.0;  // NaN for tabulated costs
  std::size_t runs = 0;
  std::size_t steps = 0;
  std::uint64_t seed = 0;
  double comm_mean = 0.0;
  double err_mean = 0.0;
  double err_std = 0.0;  // per-run sample standard deviation

  double err_standard_error() const;
};

/// Schedule long enough for a closed loop of `steps` steps under `spec`.
VarianceSchedule closed_loop_schedule(const ModelProvider& model, const Prior& prior,
                                      const TriggerSpec& spec, std::size_t steps);

/// Sensor + trigger + remote estimator over a given realization. Per step:
/// filter the measurement, evaluate the trigger, apply gamma_k at the remote.
/// gamma_1 = 1 is forced for every trigger kind.
SimulationTrace run_closed_loop(const ModelProvider& model, const Prior& prior,
                                const TriggerSpec& spec, const Trajectory& trajectory,
                                const VarianceSchedule& schedule);

/// Draws a trajectory from `rng`, then runs the closed loop.
SimulationTrace run_closed_loop(const ModelProvider& model, const Prior& prior,
                                const TriggerSpec& spec, std::size_t steps, RngStream& rng);

/// The realization used for run `run_index`; shared by every trigger and cost.
Trajectory paired_trajectory(const ModelProvider& model, const Prior& prior, std::size_t steps,
                             std::uint64_t base_seed, std::uint64_t run_index);

struct MonteCarloOptions {
  std::size_t workers = 1;
};

/// n_runs independent closed loops on streams (base_seed, run index). The
/// reduction is ordered by run index, so results do not depend on workers.
TradeoffPoint monte_carlo(const ModelProvider& model, const Prior& prior, const TriggerSpec& spec,
                          std::size_t steps, std::size_t runs, std::uint64_t base_seed,
                          const MonteCarloOptions& options = {});

/// One trade-off point per cost, each using `spec` with its cost replaced.
std::vector<TradeoffPoint> sweep(const ModelProvider& model, const Prior& prior,
                                 const TriggerSpec& spec, std::span<const double> costs,
                                 std::size_t steps, std::size_t runs, std::uint64_t base_seed,
                                 const MonteCarloOptions& options = {});

/// Smallest p with gamma_{k+p} = gamma_k over the post-transient part; the
/// window must hold at least two periods.
std::optional<std::size_t> detect_period(const std::vector<bool>& decisions,
                                         std::size_t transient = 50);

/// Fraction of trace pairs whose post-transient decision sequences agree.
double determinism_metric(std::span<const SimulationTrace> traces, std::size_t transient = 50);

// CSV output; floating point with 17 significant digits.
void write_trace_csv(std::ostream& out, const SimulationTrace& trace);
void write_sweep_csv(std::ostream& out, std::span<const TradeoffPoint> points);
std::string format_double(double value);

}  // namespace predtrig
