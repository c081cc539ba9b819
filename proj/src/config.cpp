#include "predtrig/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "predtrig/errors.hpp"

namespace predtrig {
namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::string unquote(std::string_view v, std::size_t line) {
  if (!v.empty() && (v.front() == '"' || v.front() == '\'')) {
    if (v.size() < 2 || v.back() != v.front()) throw ConfigError("unterminated quoted value", line);
    return std::string(v.substr(1, v.size() - 2));
  }
  return std::string(v);
}

double parse_real(std::string_view token, std::size_t line, const std::string& key) {
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size() || !std::isfinite(value)) {
    throw ConfigError("key '" + key + "': '" + std::string(token) + "' is not a finite number",
                      line);
  }
  return value;
}

std::vector<double> parse_reals(std::string_view text, std::size_t line, const std::string& key) {
  std::vector<double> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == ',' ||
                               text[i] == '\n' || text[i] == '\r'))
      ++i;
    std::size_t j = i;
    while (j < text.size() && !(text[j] == ' ' || text[j] == '\t' || text[j] == ',' ||
                                text[j] == '\n' || text[j] == '\r'))
      ++j;
    if (j > i) out.push_back(parse_real(text.substr(i, j - i), line, key));
    i = j;
  }
  if (out.empty()) throw ConfigError("key '" + key + "': no values", line);
  return out;
}

template <typename T>
T parse_count(std::string_view token, std::size_t line, const std::string& key) {
  T value{};
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc() || ptr != token.data() + token.size()) {
    throw ConfigError("key '" + key + "': '" + std::string(token) +
                          "' is not a non-negative integer",
                      line);
  }
  return value;
}

void require_size(const std::vector<double>& v, std::size_t n, const char* what) {
  if (v.size() != n) {
    throw ConfigError(std::string(what) + " has " + std::to_string(v.size()) +
                      " entries, expected " + std::to_string(n));
  }
}

Matrix square(const std::vector<double>& v, std::size_t n) { return Matrix(n, n, v); }

}  // namespace

void apply_preset(ScenarioConfig& config, const std::string& name) {
  double a = 0.0;
  if (name == "example1") {
    a = 0.98;
  } else if (name == "example2") {
    a = 1.1;
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected example1 or example2)");
  }
  config.preset = name;
  config.model = ModelBlock{1, 1, {a}, {1.0}, {0.1}, {0.1}};
  config.prior = PriorBlock{{1.0}, {1.0}};
}

ScenarioConfig preset_config(const std::string& name) {
  ScenarioConfig c;
  apply_preset(c, name);
  return c;
}

ScenarioConfig parse_config(std::string_view text) {
  struct Entry {
    std::string value;
    std::size_t line;
  };
  std::map<std::string, Entry> entries;
  std::string section;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const auto eol = text.find('\n', pos);
    std::string_view raw =
        text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;

    std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#' || line.front() == ';') continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header", line_no);
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) throw ConfigError("empty section name", line_no);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError("expected 'key = value'", line_no);
    std::string key(trim(line.substr(0, eq)));
    std::string_view value = trim(line.substr(eq + 1));
    if (!value.empty() && value.front() != '"' && value.front() != '\'') {
      // Inline comment on an unquoted value.
      if (auto hash = value.find(" #"); hash != std::string_view::npos) value = trim(value.substr(0, hash));
    }
    if (key.empty()) throw ConfigError("empty key", line_no);
    if (!section.empty()) key = section + "." + key;
    if (entries.contains(key)) throw ConfigError("duplicate key '" + key + "'", line_no);
    entries[key] = Entry{unquote(value, line_no), line_no};
  }

  ScenarioConfig config;
  if (auto it = entries.find("model.preset"); it != entries.end()) {
    try {
      apply_preset(config, it->second.value);
    } catch (const ConfigError& e) {
      throw ConfigError(e.what(), it->second.line);
    }
    entries.erase(it);
  }

  std::optional<std::size_t> horizon_line;
  for (const auto& [key, entry] : entries) {
    const std::string& v = entry.value;
    const std::size_t ln = entry.line;
    if (key == "model.nx") {
      config.model.nx = parse_count<std::size_t>(v, ln, key);
    } else if (key == "model.ny") {
      config.model.ny = parse_count<std::size_t>(v, ln, key);
    } else if (key == "model.A") {
      config.model.A = parse_reals(v, ln, key);
    } else if (key == "model.H") {
      config.model.H = parse_reals(v, ln, key);
    } else if (key == "model.Q") {
      config.model.Q = parse_reals(v, ln, key);
    } else if (key == "model.R") {
      config.model.R = parse_reals(v, ln, key);
    } else if (key == "prior.x0_mean") {
      config.prior.mean = parse_reals(v, ln, key);
    } else if (key == "prior.x0_cov") {
      config.prior.cov = parse_reals(v, ln, key);
    } else if (key == "trigger.kind") {
      try {
        config.trigger.kind = parse_trigger_kind(v);
      } catch (const ConfigError& e) {
        throw ConfigError(e.what(), ln);
      }
    } else if (key == "trigger.M") {
      config.trigger.horizon = parse_count<std::size_t>(v, ln, key);
      horizon_line = ln;
    } else if (key == "trigger.M_max") {
      config.trigger.max_horizon = parse_count<std::size_t>(v, ln, key);
    } else if (key == "trigger.cost") {
      const double c = parse_real(v, ln, key);
      if (c < 0.0) throw ConfigError("key 'trigger.cost': negative cost", ln);
      config.trigger.cost = c;
    } else if (key == "trigger.cost_table") {
      config.trigger.cost_table = std::filesystem::path(v);
    } else if (key == "sim.steps") {
      config.sim.steps = parse_count<std::size_t>(v, ln, key);
    } else if (key == "sim.runs") {
      config.sim.runs = parse_count<std::size_t>(v, ln, key);
    } else if (key == "sim.seed") {
      config.sim.seed = parse_count<std::uint64_t>(v, ln, key);
    } else {
      throw ConfigError("unknown key '" + key + "'", ln);
    }
  }

  if (config.trigger.kind == TriggerKind::Predictive && !config.trigger.horizon) {
    throw ConfigError("trigger.kind = pt requires trigger.M",
                      entries.at("trigger.kind").line);
  }
  if (config.trigger.horizon && *config.trigger.horizon == 0 &&
      config.trigger.kind == TriggerKind::Predictive) {
    throw ConfigError("trigger.M must be at least 1", horizon_line.value_or(0));
  }
  // A file may carry only trigger/sim blocks when the model comes from a
  // command-line preset; full validation then happens after merging.
  const bool has_model = config.preset || config.model.nx != 0 || config.model.ny != 0 ||
                         !config.model.A.empty() || !config.prior.mean.empty();
  if (has_model) config.validate();
  return config;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void ScenarioConfig::validate() const {
  const auto& m = model;
  if (m.nx == 0 || m.ny == 0) throw ConfigError("model.nx and model.ny must be positive");
  require_size(m.A, m.nx * m.nx, "model.A");
  require_size(m.H, m.ny * m.nx, "model.H");
  require_size(m.Q, m.nx * m.nx, "model.Q");
  require_size(m.R, m.ny * m.ny, "model.R");
  require_size(prior.mean, m.nx, "prior.x0_mean");
  require_size(prior.cov, m.nx * m.nx, "prior.x0_cov");
  if (trigger.cost && trigger.cost_table) {
    throw ConfigError("trigger.cost and trigger.cost_table are mutually exclusive");
  }
  if (trigger.cost && (*trigger.cost < 0.0 || !std::isfinite(*trigger.cost))) {
    throw ConfigError("trigger.cost must be finite and >= 0");
  }
  if (trigger.max_horizon == 0) throw ConfigError("trigger.M_max must be at least 1");
  if (trigger.kind == TriggerKind::Predictive && (!trigger.horizon || *trigger.horizon == 0)) {
    throw ConfigError("trigger.kind = pt requires trigger.M >= 1");
  }
  if (sim.steps == 0) throw ConfigError("sim.steps must be at least 1");
  if (sim.runs == 0) throw ConfigError("sim.runs must be at least 1");
  try {
    validate_prior(build_model(), build_prior());
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

ModelProvider ScenarioConfig::build_model() const {
  try {
    return ModelProvider::lti(Matrix(model.nx, model.nx, model.A),
                              Matrix(model.ny, model.nx, model.H), square(model.Q, model.nx),
                              square(model.R, model.ny));
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(std::string("invalid model: ") + e.what());
  }
}

Prior ScenarioConfig::build_prior() const {
  return Prior{prior.mean, square(prior.cov, model.nx)};
}

CostSchedule ScenarioConfig::build_cost(const std::filesystem::path& base_dir) const {
  if (trigger.cost_table) {
    const auto path = trigger.cost_table->is_absolute() || base_dir.empty()
                          ? *trigger.cost_table
                          : base_dir / *trigger.cost_table;
    return CostSchedule::table(load_cost_table(path));
  }
  if (!trigger.cost) throw ConfigError("no communication cost given (trigger.cost or --cost)");
  return CostSchedule::constant(*trigger.cost);
}

TriggerSpec ScenarioConfig::build_trigger(const std::filesystem::path& base_dir) const {
  if (!trigger.kind) throw ConfigError("no trigger kind given (trigger.kind or --trigger)");
  CostSchedule cost = build_cost(base_dir);
  switch (*trigger.kind) {
    case TriggerKind::Event: return TriggerSpec::event(std::move(cost));
    case TriggerKind::Predictive:
      if (!trigger.horizon) throw ConfigError("trigger.kind = pt requires trigger.M");
      return TriggerSpec::predictive(std::move(cost), *trigger.horizon);
    case TriggerKind::Self: return TriggerSpec::self(std::move(cost), trigger.max_horizon);
  }
  throw ConfigError("unreachable trigger kind");
}

std::vector<double> parse_cost_list(std::string_view text) {
  auto costs = parse_reals(text, 0, "cost list");
  for (double c : costs) {
    if (c < 0.0) throw ConfigError("negative cost " + std::to_string(c) + " in cost list");
  }
  return costs;
}

std::vector<double> load_cost_table(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read cost table '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_cost_list(buf.str());
}

}  // namespace predtrig
