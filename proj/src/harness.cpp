#include "predtrig/harness.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "predtrig/errors.hpp"

namespace predtrig {

std::vector<bool> SimulationTrace::decisions() const {
  std::vector<bool> out;
  out.reserve(steps.size());
  for (const auto& s : steps) out.push_back(s.transmit);
  return out;
}

RunMetrics run_metrics(const SimulationTrace& trace) {
  if (trace.steps.empty()) throw RangeError("run_metrics: empty trace");
  double err = 0.0;
  std::size_t transmits = 0;
  for (const auto& s : trace.steps) {
    err += squared_norm(s.remote_error());
    transmits += s.transmit ? 1 : 0;
  }
  const double n = static_cast<double>(trace.steps.size());
  return {err / n, static_cast<double>(transmits) / n};
}

double TradeoffPoint::err_standard_error() const {
  return runs == 0 ? 0.0 : err_std / std::sqrt(static_cast<double>(runs));
}

VarianceSchedule closed_loop_schedule(const ModelProvider& model, const Prior& prior,
                                      const TriggerSpec& spec, std::size_t steps) {
  const std::size_t lookahead = spec.kind == TriggerKind::Predictive ? spec.horizon : 0;
  return VarianceSchedule(model, prior, steps + lookahead);
}

SimulationTrace run_closed_loop(const ModelProvider& model, const Prior& prior,
                                const TriggerSpec& spec, const Trajectory& trajectory,
                                const VarianceSchedule& schedule) {
  const std::size_t steps = trajectory.horizon();
  if (steps == 0) throw RangeError("run_closed_loop: empty trajectory");
  const std::size_t lookahead = spec.kind == TriggerKind::Predictive ? spec.horizon : 0;
  if (schedule.horizon() < steps + lookahead) {
    throw RangeError("run_closed_loop: variance schedule is shorter than K + M");
  }

  SimulationTrace out;
  out.spec = spec;
  out.steps.reserve(steps);

  FilterState filter = FilterState::initial(prior);
  RemoteState remote = RemoteState::initial(prior);

  DecisionLedger ledger;
  if (spec.kind == TriggerKind::Predictive) {
    ledger = predictive_warm_up(spec.horizon, spec.cost, schedule, model);
  }

  // Self trigger bookkeeping: next planned transmit and the open-loop
  // covariance propagated from the last transmit.
  std::optional<std::size_t> next_self_trigger = 1;
  Matrix open_loop_cov = schedule.posterior(0);

  for (std::size_t k = 1; k <= steps; ++k) {
    filter = kf_update(kf_predict(filter, model), trajectory.measurement(k), model, k);
    const RemoteState remote_prev = remote;

    TriggerSignals signals;
    bool transmit = false;
    switch (spec.kind) {
      case TriggerKind::Event: {
        signals = event_signals(k, filter, remote_prev, spec.cost, model);
        transmit = k == 1 || signals.fires();
        break;
      }
      case TriggerKind::Predictive: {
        if (ledger.frontier() >= k + spec.horizon) {
          // gamma_{k+M} was fixed during warm-up (only k = 1 with M = 0).
          signals = predictive_signals(k, spec.horizon, filter, remote_prev, ledger, spec.cost,
                                       schedule, model);
        } else {
          signals = predictive_trigger(k, spec.horizon, filter, remote_prev, ledger, spec.cost,
                                       schedule, model)
                        .signals;
        }
        transmit = ledger.decision(k);
        break;
      }
      case TriggerKind::Self: {
        open_loop_cov = open_loop_step(model, k - 1, open_loop_cov);
        signals.variance = std::max(0.0, trace(open_loop_cov) - trace(schedule.posterior(k)));
        signals.combined = signals.variance;
        signals.threshold = spec.cost.at(k);
        transmit = next_self_trigger == k;
        if (transmit) {
          open_loop_cov = schedule.posterior(k);
          // Triggers beyond the horizon are equivalent to no further trigger.
          const std::size_t cap = std::min(spec.max_horizon, steps - k);
          next_self_trigger.reset();
          if (cap > 0) {
            if (auto m = self_trigger(k, schedule, spec.cost, cap, model)) next_self_trigger = k + *m;
          }
        }
        break;
      }
    }

    remote = remote_step(remote_prev, transmit,
                         transmit ? std::optional<Vector>(filter.posterior.mean) : std::nullopt,
                         model);

    TraceStep step;
    step.k = k;
    step.state = trajectory.state(k);
    step.measurement = trajectory.measurement(k);
    step.filter_estimate = filter.posterior.mean;
    step.remote_estimate = remote.estimate;
    step.transmit = transmit;
    step.signals = signals;
    out.steps.push_back(std::move(step));
  }
  return out;
}

SimulationTrace run_closed_loop(const ModelProvider& model, const Prior& prior,
                                const TriggerSpec& spec, std::size_t steps, RngStream& rng) {
  const Trajectory trajectory = simulate_trajectory(model, prior, steps, rng);
  return run_closed_loop(model, prior, spec, trajectory,
                         closed_loop_schedule(model, prior, spec, steps));
}

Trajectory paired_trajectory(const ModelProvider& model, const Prior& prior, std::size_t steps,
                             std::uint64_t base_seed, std::uint64_t run_index) {
  RngStream rng = RngStream::for_run(base_seed, run_index, StreamPurpose::Trajectory);
  return simulate_trajectory(model, prior, steps, rng);
}

TradeoffPoint monte_carlo(const ModelProvider& model, const Prior& prior, const TriggerSpec& spec,
                          std::size_t steps, std::size_t runs, std::uint64_t base_seed,
                          const MonteCarloOptions& options) {
  if (runs == 0) throw RangeError("monte_carlo: need at least one run");
  if (steps == 0) throw RangeError("monte_carlo: horizon must be at least 1");
  const VarianceSchedule schedule = closed_loop_schedule(model, prior, spec, steps);

  std::vector<RunMetrics> results(runs);
  std::vector<std::exception_ptr> failures(runs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < runs; i = next.fetch_add(1)) {
      try {
        const Trajectory traj = paired_trajectory(model, prior, steps, base_seed, i);
        results[i] = run_metrics(run_closed_loop(model, prior, spec, traj, schedule));
      } catch (...) {
        failures[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::clamp<std::size_t>(options.workers, 1, runs);
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  for (std::size_t i = 0; i < runs; ++i) {
    if (!failures[i]) continue;
    std::string reason = "unknown error";
    try {
      std::rethrow_exception(failures[i]);
    } catch (const std::exception& e) {
      reason = e.what();
    } catch (...) {
    }
    throw Error("monte_carlo: run " + std::to_string(i) + " (seed " + std::to_string(base_seed) +
                ") failed: " + reason);
  }

  TradeoffPoint point;
  point.kind = spec.kind;
  point.horizon = spec.horizon;
  point.cost = spec.cost.constant_value();
  point.runs = runs;
  point.steps = steps;
  point.seed = base_seed;
  double comm = 0.0;
  double err = 0.0;
  for (const auto& r : results) {
    comm += r.communication;
    err += r.mean_squared_error;
  }
  const double n = static_cast<double>(runs);
  point.comm_mean = comm / n;
  point.err_mean = err / n;
  if (runs > 1) {
    double ss = 0.0;
    for (const auto& r : results) {
      const double d = r.mean_squared_error - point.err_mean;
      ss += d * d;
    }
    point.err_std = std::sqrt(ss / (n - 1.0));
  }
  return point;
}

std::vector<TradeoffPoint> sweep(const ModelProvider& model, const Prior& prior,
                                 const TriggerSpec& spec, std::span<const double> costs,
                                 std::size_t steps, std::size_t runs, std::uint64_t base_seed,
                                 const MonteCarloOptions& options) {
  if (costs.empty()) throw RangeError("sweep: empty cost grid");
  std::vector<TradeoffPoint> points;
  points.reserve(costs.size());
  for (double c : costs) {
    TriggerSpec s = spec;
    s.cost = CostSchedule::constant(c);
    points.push_back(monte_carlo(model, prior, s, steps, runs, base_seed, options));
  }
  return points;
}

std::optional<std::size_t> detect_period(const std::vector<bool>& decisions,
                                         std::size_t transient) {
  if (decisions.size() <= transient + 1) return std::nullopt;
  const std::size_t n = decisions.size() - transient;
  auto tail = decisions.begin() + static_cast<std::ptrdiff_t>(transient);
  // A period must repeat at least twice within the window.
  for (std::size_t p = 1; 2 * p <= n; ++p) {
    bool periodic = true;
    for (std::size_t i = 0; i + p < n && periodic; ++i) periodic = tail[i] == tail[i + p];
    if (periodic) return p;
  }
  return std::nullopt;
}

double determinism_metric(std::span<const SimulationTrace> traces, std::size_t transient) {
  if (traces.size() < 2) throw RangeError("determinism_metric: need at least two traces");
  const std::size_t length = traces.front().horizon();
  for (const auto& t : traces) {
    if (t.horizon() != length) throw RangeError("determinism_metric: traces differ in length");
  }
  if (length <= transient) throw RangeError("determinism_metric: traces shorter than transient");
  std::vector<std::vector<bool>> tails;
  tails.reserve(traces.size());
  for (const auto& t : traces) {
    auto d = t.decisions();
    tails.emplace_back(d.begin() + static_cast<std::ptrdiff_t>(transient), d.end());
  }
  std::size_t agree = 0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i < tails.size(); ++i) {
    for (std::size_t j = i + 1; j < tails.size(); ++j) {
      ++pairs;
      agree += tails[i] == tails[j] ? 1 : 0;
    }
  }
  return static_cast<double>(agree) / static_cast<double>(pairs);
}

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::general, 17);
  if (ec != std::errc()) throw Error("format_double: conversion failed");
  return std::string(buf, ptr);
}

namespace {

void write_vector(std::ostream& out, const Vector& v) {
  for (double x : v) out << ',' << format_double(x);
}

void write_vector_header(std::ostream& out, const char* name, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out << ',' << name << '[' << i << ']';
}

}  // namespace

void write_trace_csv(std::ostream& out, const SimulationTrace& trace) {
  const std::size_t nx = trace.steps.empty() ? 0 : trace.steps.front().state.size();
  const std::size_t ny = trace.steps.empty() ? 0 : trace.steps.front().measurement.size();
  out << 'k';
  write_vector_header(out, "x", nx);
  write_vector_header(out, "y", ny);
  write_vector_header(out, "xhatF", nx);
  write_vector_header(out, "xhat", nx);
  out << ",gamma,Emean,Evar,E,cost\n";
  for (const auto& s : trace.steps) {
    out << s.k;
    write_vector(out, s.state);
    write_vector(out, s.measurement);
    write_vector(out, s.filter_estimate);
    write_vector(out, s.remote_estimate);
    out << ',' << (s.transmit ? 1 : 0) << ',' << format_double(s.signals.mean) << ','
        << format_double(s.signals.variance) << ',' << format_double(s.signals.combined) << ','
        << format_double(s.signals.threshold) << '\n';
  }
}

void write_sweep_csv(std::ostream& out, std::span<const TradeoffPoint> points) {
  out << "trigger,M,C,runs,K,seed,comm_mean,err_mean,err_std\n";
  for (const auto& p : points) {
    out << to_string(p.kind) << ',' << p.horizon << ',' << format_double(p.cost) << ',' << p.runs
        << ',' << p.steps << ',' << p.seed << ',' << format_double(p.comm_mean) << ','
        << format_double(p.err_mean) << ',' << format_double(p.err_std) << '\n';
  }
}

}  // namespace predtrig
