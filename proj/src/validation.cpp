#include "predtrig/validation.hpp"

#include <algorithm>
#include <cmath>

#include "predtrig/errors.hpp"
#include "predtrig/estimation.hpp"
#include "predtrig/harness.hpp"

namespace predtrig {
namespace {

/// Running first and second moments of a vector-valued sample.
class MomentAccumulator {
 public:
  explicit MomentAccumulator(std::size_t dim) : sum_(dim, 0.0), outer_(dim, dim) {}

  void add(const Vector& v) {
    ++count_;
    for (std::size_t i = 0; i < v.size(); ++i) {
      sum_[i] += v[i];
      for (std::size_t j = 0; j < v.size(); ++j) outer_(i, j) += v[i] * v[j];
    }
  }

  Vector mean() const {
    Vector m = sum_;
    for (double& x : m) x /= static_cast<double>(count_);
    return m;
  }

  Matrix covariance() const {
    const Vector m = mean();
    const double n = static_cast<double>(count_);
    Matrix c(m.size(), m.size());
    for (std::size_t i = 0; i < m.size(); ++i)
      for (std::size_t j = 0; j < m.size(); ++j)
        c(i, j) = (outer_(i, j) - n * m[i] * m[j]) / (n - 1.0);
    return c;
  }

 private:
  std::size_t count_ = 0;
  Vector sum_;
  Matrix outer_;
};

struct Scenario {
  std::string label;
  DecisionLedger ledger;
  RemoteState remote_prev;  // time k - 1
  RemoteState remote_now;   // time k, after gamma_k
};

struct RolloutMoments {
  MomentAccumulator error_I;
  MomentAccumulator error_II;
  double cost_sum = 0.0;
  double cost_sq_sum = 0.0;
  std::size_t n = 0;
};

RolloutMoments conditional_rollouts(const ModelProvider& model, const FilterState& filter,
                                    const Scenario& scenario, std::size_t horizon,
                                    std::size_t rollouts, std::uint64_t seed,
                                    std::uint64_t stream_offset) {
  const std::size_t k = filter.k;
  RolloutMoments out{MomentAccumulator(model.state_dim()), MomentAccumulator(model.state_dim())};
  const Vector zero_x(model.state_dim(), 0.0);
  const Vector zero_y(model.measurement_dim(), 0.0);
  for (std::size_t r = 0; r < rollouts; ++r) {
    RngStream rng = RngStream::for_run(seed, stream_offset + r, StreamPurpose::ConditionalRollout);
    // x_k | Y_k ~ N(x^F_k, P^F_k).
    Vector x = sample_gaussian(filter.posterior.mean, filter.posterior.cov, rng);
    FilterState f = filter;
    RemoteState remote = scenario.remote_now;
    for (std::size_t j = 1; j < horizon; ++j) {
      const std::size_t t = k + j;
      x = add(multiply(model.A(t - 1), x), sample_gaussian(zero_x, model.Q(t - 1), rng));
      const Vector y = add(multiply(model.H(t), x), sample_gaussian(zero_y, model.R(t), rng));
      f = kf_update(kf_predict(f, model), y, model, t);
      const bool transmit = scenario.ledger.decision(t);
      remote = remote_step(remote, transmit,
                           transmit ? std::optional<Vector>(f.posterior.mean) : std::nullopt, model);
    }
    const std::size_t t = k + horizon;
    Vector e_I, e_II;
    if (horizon == 0) {
      e_I = subtract(x, multiply(model.A(k - 1), scenario.remote_prev.estimate));
      e_II = subtract(x, f.posterior.mean);
    } else {
      x = add(multiply(model.A(t - 1), x), sample_gaussian(zero_x, model.Q(t - 1), rng));
      const Vector y = add(multiply(model.H(t), x), sample_gaussian(zero_y, model.R(t), rng));
      f = kf_update(kf_predict(f, model), y, model, t);
      e_I = subtract(x, multiply(model.A(t - 1), remote.estimate));
      e_II = subtract(x, f.posterior.mean);
    }
    out.error_I.add(e_I);
    out.error_II.add(e_II);
    const double cost = squared_norm(e_I) - squared_norm(e_II);
    out.cost_sum += cost;
    out.cost_sq_sum += cost * cost;
    ++out.n;
  }
  return out;
}

CheckResult mean_check(const std::string& name, const MomentAccumulator& acc,
                       const GaussianBelief& predicted, std::size_t n, double z_limit) {
  const Vector m = acc.mean();
  CheckResult c{name, 0.0, 0.0, 0.0, CheckStatus::Pass};
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double se = std::sqrt(std::max(predicted.cov(i, i), 0.0) / static_cast<double>(n));
    const double diff = m[i] - predicted.mean[i];
    const double z = se > 0.0 ? diff / se : (diff == 0.0 ? 0.0 : INFINITY);
    if (std::abs(z) >= std::abs(c.z)) c = {name, m[i], predicted.mean[i], z, CheckStatus::Pass};
  }
  c.status = std::abs(c.z) <= z_limit ? CheckStatus::Pass : CheckStatus::Fail;
  return c;
}

CheckResult trace_check(const std::string& name, const MomentAccumulator& acc,
                        double predicted_trace, const Matrix& predicted_cov, std::size_t n,
                        double z_limit) {
  const double observed = trace(acc.covariance());
  // Var(trace S) = 2 trace(Sigma^2) / (n - 1) for Gaussian samples.
  const double se =
      std::sqrt(2.0 * trace(multiply(predicted_cov, predicted_cov)) / static_cast<double>(n - 1));
  const double z = se > 0.0 ? (observed - predicted_trace) / se : 0.0;
  return {name, observed, predicted_trace, z,
          std::abs(z) <= z_limit ? CheckStatus::Pass : CheckStatus::Fail};
}

}  // namespace

std::string to_string(CheckStatus status) {
  switch (status) {
    case CheckStatus::Pass: return "PASS";
    case CheckStatus::Fail: return "FAIL";
    case CheckStatus::Inconclusive: return "INCONCLUSIVE";
  }
  return "?";
}

CheckStatus ValidationReport::overall() const {
  bool inconclusive = false;
  for (const auto& c : checks) {
    if (c.status == CheckStatus::Fail) return CheckStatus::Fail;
    inconclusive = inconclusive || c.status == CheckStatus::Inconclusive;
  }
  return inconclusive ? CheckStatus::Inconclusive : CheckStatus::Pass;
}

ValidationReport run_validation(const ModelProvider& model, const Prior& prior,
                                const ValidationOptions& options) {
  if (options.rollouts < 2) throw RangeError("validation needs at least two rollouts");
  if (options.horizon == 0) throw RangeError("validation horizon must be at least 1");
  const std::size_t M = options.horizon;
  const std::size_t k = std::max<std::size_t>(options.anchor_step, M + 4);

  // Fix Y_k: one realization up to the anchor step, filtered.
  RngStream rng = RngStream::for_run(options.seed, 0, StreamPurpose::Trajectory);
  const Trajectory traj = simulate_trajectory(model, prior, k, rng);
  const VarianceSchedule schedule(model, prior, k + M);
  std::vector<FilterState> filters{FilterState::initial(prior)};
  for (std::size_t t = 1; t <= k; ++t) {
    filters.push_back(kf_update(kf_predict(filters.back(), model), traj.measurement(t), model, t));
  }
  const FilterState& filter = filters.back();

  // Ledgers for the two prediction branches: the last trigger lies in the past
  // (k - 3), or one is scheduled now or later within the horizon.
  auto make_scenario = [&](std::string label, std::vector<std::size_t> triggers) {
    Scenario s{std::move(label), {}, RemoteState::initial(prior), RemoteState::initial(prior)};
    for (std::size_t t = 1; t <= k + M - 1; ++t) {
      s.ledger.commit(t, std::find(triggers.begin(), triggers.end(), t) != triggers.end());
    }
    RemoteState remote = RemoteState::initial(prior);
    for (std::size_t t = 1; t <= k; ++t) {
      if (t == k) s.remote_prev = remote;
      const bool transmit = s.ledger.decision(t);
      remote = remote_step(remote, transmit,
                           transmit ? std::optional<Vector>(filters[t].posterior.mean)
                                    : std::nullopt,
                           model);
    }
    s.remote_now = remote;
    return s;
  };
  std::vector<Scenario> scenarios;
  scenarios.push_back(make_scenario("past_trigger", {1, k - 3}));
  scenarios.push_back(make_scenario("trigger_now", {1, k - 3, k}));
  if (M >= 2) scenarios.push_back(make_scenario("trigger_ahead", {1, k - 3, k + M - 1}));

  ValidationReport report;
  const bool powered = options.rollouts >= options.min_rollouts;
  auto finish = [&](CheckResult c) {
    if (!powered) c.status = CheckStatus::Inconclusive;
    report.checks.push_back(std::move(c));
  };

  std::uint64_t stream_offset = 0;
  for (const auto& sc : scenarios) {
    const auto moments = conditional_rollouts(model, filter, sc, M, options.rollouts,
                                              options.seed, stream_offset);
    stream_offset += options.rollouts;
    const std::size_t n = moments.n;

    const GaussianBelief e1 =
        error_I_distribution(k, M, filter, sc.remote_prev, sc.ledger, model, schedule);
    const GaussianBelief e2 = error_II_distribution(k, M, schedule);

    // Predicted trace of Cov(e^I) through the variance signal:
    // trace(P^I) = Evar + trace(P^F_{k+M}).
    const auto kappa = sc.ledger.last_scheduled(k + M - 1);
    const bool past = !kappa || k > *kappa;
    double evar = past ? variance_signal(k, M, filter.posterior.cov, schedule, model)
                       : variance_signal(*kappa, k + M - *kappa, schedule.posterior(*kappa),
                                         schedule, model);
    evar *= options.variance_signal_scale;
    const double predicted_trace_I = evar + trace(e2.cov);

    const std::string prefix = "error_I_" + sc.label;
    finish(mean_check(prefix + "_mean", moments.error_I, e1, n, options.z_limit));
    finish(trace_check(prefix + "_cov", moments.error_I, predicted_trace_I, e1.cov, n,
                       options.z_limit));
    if (&sc == &scenarios.front()) {
      // e^II does not depend on the ledger; one scenario suffices.
      finish(mean_check("error_II_mean", moments.error_II, e2, n, options.z_limit));
      finish(trace_check("error_II_cov", moments.error_II, trace(e2.cov), e2.cov, n,
                         options.z_limit));
    }

    // Expected estimation cost E[e_I'e_I - e_II'e_II | Y_k].
    const double emean = past ? mean_signal(k, M, filter, sc.remote_prev, model) : 0.0;
    const double predicted_cost = emean + evar;
    const double nn = static_cast<double>(n);
    const double cost_mean = moments.cost_sum / nn;
    const double cost_var = (moments.cost_sq_sum - nn * cost_mean * cost_mean) / (nn - 1.0);
    const double se = std::sqrt(std::max(cost_var, 0.0) / nn);
    const double z = se > 0.0 ? (cost_mean - predicted_cost) / se : 0.0;
    finish({"expected_cost_" + sc.label, cost_mean, predicted_cost, z,
            std::abs(z) <= options.z_limit ? CheckStatus::Pass : CheckStatus::Fail});
  }

  // ET and PT(M = 0) on shared realizations: decisions must agree exactly.
  {
    const auto cost = CostSchedule::constant(options.equivalence_cost);
    const TriggerSpec et = TriggerSpec::event(cost);
    const TriggerSpec pt0 = TriggerSpec::predictive_zero_horizon(cost);
    const VarianceSchedule sched = closed_loop_schedule(model, prior, et, options.equivalence_steps);
    std::size_t mismatches = 0;
    for (std::size_t r = 0; r < options.equivalence_runs; ++r) {
      const Trajectory tr =
          paired_trajectory(model, prior, options.equivalence_steps, options.seed, r);
      const auto a = run_closed_loop(model, prior, et, tr, sched).decisions();
      const auto b = run_closed_loop(model, prior, pt0, tr, sched).decisions();
      mismatches += a == b ? 0 : 1;
    }
    report.checks.push_back({"et_equals_pt_m0", static_cast<double>(mismatches), 0.0, 0.0,
                             mismatches == 0 ? CheckStatus::Pass : CheckStatus::Fail});
  }
  return report;
}

}  // namespace predtrig
