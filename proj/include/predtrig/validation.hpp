#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "predtrig/system_model.hpp"
#include "predtrig/triggering.hpp"

namespace predtrig {

enum class CheckStatus { Pass, Fail, Inconclusive };

std::string to_string(CheckStatus status);

struct CheckResult {
  std::string name;
  double observed = 0.0;
  double expected = 0.0;
  double z = 0.0;  // 0 for exact (non-statistical) checks
  CheckStatus status = CheckStatus::Pass;
};

struct ValidationOptions {
  std::size_t horizon = 2;           // prediction horizon M for the error checks
  std::size_t rollouts = 2000;       // conditional futures per scenario
  std::size_t min_rollouts = 1000;   // fewer than this reports inconclusive
  std::size_t anchor_step = 60;      // time k at which Y_k is fixed
  std::uint64_t seed = 1;
  double z_limit = 3.0;
  double equivalence_cost = 0.25;    // cost for the ET vs PT(M=0) replay
  std::size_t equivalence_runs = 100;
  std::size_t equivalence_steps = 200;
  /// Fault injection: multiplies every variance signal used for predictions.
  double variance_signal_scale = 1.0;
};

struct ValidationReport {
  std::vector<CheckResult> checks;

  CheckStatus overall() const;
};

/// Empirical checks of the predicted error distributions (conditional Monte
/// Carlo with Y_k fixed) plus the ET == PT(M = 0) replay.
ValidationReport run_validation(const ModelProvider& model, const Prior& prior,
                                const ValidationOptions& options = {});

}  // namespace predtrig
