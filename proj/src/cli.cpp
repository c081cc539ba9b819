#include "predtrig/cli.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>

#include "predtrig/config.hpp"
#include "predtrig/errors.hpp"
#include "predtrig/harness.hpp"
#include "predtrig/triggering.hpp"
#include "predtrig/validation.hpp"

namespace predtrig::cli {
namespace {

class IoError : public Error {
 public:
  using Error::Error;
};

struct Options {
  std::string config_path;
  std::string preset;
  std::string trigger;
  std::optional<std::size_t> horizon;
  std::optional<std::size_t> max_horizon;
  std::optional<double> cost;
  std::string cost_grid;
  std::optional<std::size_t> steps;
  std::optional<std::size_t> runs;
  std::optional<std::uint64_t> seed;
  std::size_t workers = 1;
  std::string out_path;
  double fault_variance_scale = 1.0;
};

struct Resolved {
  ScenarioConfig config;
  std::filesystem::path base_dir;
};

std::string one_line(std::string s) {
  for (char& c : s)
    if (c == '\n' || c == '\r') c = ' ';
  return s;
}

Resolved resolve(const Options& opt) {
  Resolved r;
  if (!opt.config_path.empty()) {
    r.config = load_config(opt.config_path);
    r.base_dir = std::filesystem::path(opt.config_path).parent_path();
  }
  if (!opt.preset.empty()) apply_preset(r.config, opt.preset);
  if (r.config.model.nx == 0) throw ConfigError("no model given (use --config or --preset)");
  auto& t = r.config.trigger;
  if (!opt.trigger.empty() && opt.trigger.find(',') == std::string::npos) {
    t.kind = parse_trigger_kind(opt.trigger);
  }
  if (opt.horizon) t.horizon = *opt.horizon;
  if (opt.max_horizon) t.max_horizon = *opt.max_horizon;
  if (opt.cost) {
    t.cost = *opt.cost;
    t.cost_table.reset();
  }
  if (opt.steps) r.config.sim.steps = *opt.steps;
  if (opt.runs) r.config.sim.runs = *opt.runs;
  if (opt.seed) r.config.sim.seed = *opt.seed;
  r.config.validate();
  return r;
}

std::vector<double> cost_grid(const Options& opt, const ScenarioConfig& config) {
  if (!opt.cost_grid.empty()) return parse_cost_list(opt.cost_grid);
  if (config.trigger.cost) return {*config.trigger.cost};
  throw ConfigError("no cost grid given (use --cost-grid or --cost)");
}

void emit(const Options& opt, std::ostream& out, const std::string& text) {
  if (opt.out_path.empty()) {
    out << text;
    return;
  }
  std::ofstream file(opt.out_path, std::ios::binary | std::ios::trunc);
  if (!file) throw IoError("cannot open output file '" + opt.out_path + "'");
  file << text;
  file.flush();
  if (!file) throw IoError("failed writing output file '" + opt.out_path + "'");
}

int cmd_simulate(const Options& opt, std::ostream& out) {
  const Resolved r = resolve(opt);
  const ModelProvider model = r.config.build_model();
  const Prior prior = r.config.build_prior();
  const TriggerSpec spec = r.config.build_trigger(r.base_dir);
  const Trajectory traj = paired_trajectory(model, prior, r.config.sim.steps, r.config.sim.seed, 0);
  const SimulationTrace trace = run_closed_loop(
      model, prior, spec, traj, closed_loop_schedule(model, prior, spec, r.config.sim.steps));
  std::ostringstream csv;
  write_trace_csv(csv, trace);
  emit(opt, out, csv.str());
  return kSuccess;
}

int cmd_sweep(const Options& opt, std::ostream& out) {
  const Resolved r = resolve(opt);
  const ModelProvider model = r.config.build_model();
  const Prior prior = r.config.build_prior();
  const std::vector<double> grid = cost_grid(opt, r.config);

  std::vector<TriggerKind> kinds;
  if (!opt.trigger.empty()) {
    std::stringstream list(opt.trigger);
    for (std::string name; std::getline(list, name, ',');) {
      if (!name.empty()) kinds.push_back(parse_trigger_kind(name));
    }
  } else if (r.config.trigger.kind) {
    kinds.push_back(*r.config.trigger.kind);
  }
  if (kinds.empty()) throw ConfigError("no trigger given (use --trigger et,pt,st)");

  std::vector<TradeoffPoint> points;
  const MonteCarloOptions mc{opt.workers};
  for (TriggerKind kind : kinds) {
    TriggerSpec spec;
    const auto placeholder = CostSchedule::constant(0.0);
    switch (kind) {
      case TriggerKind::Event: spec = TriggerSpec::event(placeholder); break;
      case TriggerKind::Predictive:
        if (!r.config.trigger.horizon) throw ConfigError("pt requires a horizon (--horizon M)");
        spec = TriggerSpec::predictive(placeholder, *r.config.trigger.horizon);
        break;
      case TriggerKind::Self:
        spec = TriggerSpec::self(placeholder, r.config.trigger.max_horizon);
        break;
    }
    auto pts = sweep(model, prior, spec, grid, r.config.sim.steps, r.config.sim.runs,
                     r.config.sim.seed, mc);
    points.insert(points.end(), pts.begin(), pts.end());
  }
  std::ostringstream csv;
  write_sweep_csv(csv, points);
  emit(opt, out, csv.str());
  return kSuccess;
}

int cmd_period(const Options& opt, std::ostream& out) {
  const Resolved r = resolve(opt);
  const ModelProvider model = r.config.build_model();
  const std::vector<double> grid = cost_grid(opt, r.config);
  const Matrix steady = steady_state_posterior(model);
  std::ostringstream csv;
  csv << "C,M\n";
  for (double c : grid) {
    const auto m = steady_state_period(model, steady, c, r.config.trigger.max_horizon);
    csv << format_double(c) << ',' << (m ? static_cast<long long>(*m) : -1LL) << '\n';
  }
  emit(opt, out, csv.str());
  return kSuccess;
}

int cmd_validate(const Options& opt, std::ostream& out, std::ostream& err) {
  const Resolved r = resolve(opt);
  ValidationOptions vo;
  vo.rollouts = r.config.sim.runs;
  vo.seed = r.config.sim.seed;
  if (r.config.trigger.horizon) vo.horizon = *r.config.trigger.horizon;
  if (r.config.trigger.cost) vo.equivalence_cost = *r.config.trigger.cost;
  vo.variance_signal_scale = opt.fault_variance_scale;
  const ValidationReport report =
      run_validation(r.config.build_model(), r.config.build_prior(), vo);

  std::ostringstream text;
  for (const auto& c : report.checks) {
    text << to_string(c.status) << ' ' << c.name << " observed=" << format_double(c.observed)
         << " expected=" << format_double(c.expected) << " z=" << format_double(c.z) << '\n';
  }
  emit(opt, out, text.str());

  switch (report.overall()) {
    case CheckStatus::Pass: return kSuccess;
    case CheckStatus::Inconclusive:
      err << "error: inconclusive: too few rollouts (" << vo.rollouts << " < " << vo.min_rollouts
          << ") for the statistical checks\n";
      return kValidationInconclusive;
    case CheckStatus::Fail: {
      err << "error: validation:";
      for (const auto& c : report.checks) {
        if (c.status == CheckStatus::Fail) err << ' ' << c.name << " z=" << format_double(c.z);
      }
      err << '\n';
      return kValidationFailed;
    }
  }
  return kValidationFailed;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Event, predictive and self triggering for remote state estimation", "predtrig"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&opt](CLI::App* cmd) {
    cmd->add_option("--config", opt.config_path, "Scenario file");
    cmd->add_option("--preset", opt.preset, "example1 | example2");
    cmd->add_option("--trigger", opt.trigger, "et | pt | st (comma list for sweep)");
    cmd->add_option("--horizon", opt.horizon, "Predictive trigger horizon M");
    cmd->add_option("--max-horizon", opt.max_horizon, "Self trigger search cap M_max");
    cmd->add_option("--cost", opt.cost, "Constant communication cost C");
    cmd->add_option("--cost-grid", opt.cost_grid, "Comma separated costs");
    cmd->add_option("--steps", opt.steps, "Simulation horizon K");
    cmd->add_option("--runs", opt.runs, "Monte Carlo runs");
    cmd->add_option("--seed", opt.seed, "Base seed");
    cmd->add_option("--workers", opt.workers, "Worker threads (does not change output)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--out", opt.out_path, "Output file (default stdout)");
  };
  auto* simulate = app.add_subcommand("simulate", "Single closed-loop run, trace CSV");
  auto* sweep_cmd = app.add_subcommand("sweep", "Error vs communication trade-off CSV");
  auto* period = app.add_subcommand("period", "Asymptotic self-trigger period per cost");
  auto* validate = app.add_subcommand("validate", "Empirical checks of the error distributions");
  for (auto* cmd : {simulate, sweep_cmd, period, validate}) add_common(cmd);
  validate->add_option("--fault-variance-scale", opt.fault_variance_scale)
      ->group("");  // test hook, hidden

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help();
    return kSuccess;
  } catch (const CLI::ParseError& e) {
    err << "error: config: " << one_line(e.what()) << '\n';
    return kConfigError;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(opt, out);
    if (sweep_cmd->parsed()) return cmd_sweep(opt, out);
    if (period->parsed()) return cmd_period(opt, out);
    return cmd_validate(opt, out, err);
  } catch (const ConfigError& e) {
    err << "error: config: " << one_line(e.what()) << '\n';
    return kConfigError;
  } catch (const IoError& e) {
    err << "error: io: " << one_line(e.what()) << '\n';
    return kIoError;
  } catch (const std::exception& e) {
    err << "error: numeric: " << one_line(e.what()) << '\n';
    return kNumericError;
  }
}

}  // namespace predtrig::cli
