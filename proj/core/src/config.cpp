#include "ioc/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <sstream>

#include <fmt/format.h>

namespace ioc {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("{}: expected a number, got '{}'", key, v));
  }
}

long long to_integer(const std::string& key, const std::string& v) {
  long long out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) {
    throw ConfigError(fmt::format("{}: expected an integer, got '{}'", key, v));
  }
  return out;
}

bool to_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(fmt::format("{}: expected a boolean, got '{}'", key, v));
}

template <typename F>
auto wrap(const std::string& key, F&& f) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(fmt::format("{}: {}", key, e.what()));
  }
}

using Setter = std::function<void(ExperimentConfig&, const std::string& key, const std::string& value)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"env.kind", [](auto& c, auto& k, auto& v) { c.env.kind = wrap(k, [&] { return parse_env_kind(v); }); }},
      {"env.map", [](auto& c, auto&, auto& v) { c.env.map_file = v; }},
      {"env.slip_prob", [](auto& c, auto& k, auto& v) { c.env.slip_prob = to_double(k, v); }},
      {"env.goal_reward", [](auto& c, auto& k, auto& v) { c.env.goal_reward = to_double(k, v); }},
      {"env.step_reward", [](auto& c, auto& k, auto& v) { c.env.step_reward = to_double(k, v); }},
      {"env.two_goals", [](auto& c, auto& k, auto& v) { c.env.two_goals = to_bool(k, v); }},
      {"env.random_start", [](auto& c, auto& k, auto& v) { c.env.random_start = to_bool(k, v); }},
      {"env.action_scale", [](auto& c, auto& k, auto& v) { c.env.action_scale = to_double(k, v); }},
      {"env.max_force", [](auto& c, auto& k, auto& v) { c.env.max_force = to_double(k, v); }},
      {"env.directions", [](auto& c, auto& k, auto& v) { c.env.directions = static_cast<int>(to_integer(k, v)); }},
      {"env.rbf_centers", [](auto& c, auto& k, auto& v) { c.env.rbf_centers = static_cast<int>(to_integer(k, v)); }},
      {"env.rbf_bandwidth", [](auto& c, auto& k, auto& v) { c.env.rbf_bandwidth = to_double(k, v); }},
      {"env.maze_goal_reward", [](auto& c, auto& k, auto& v) { c.env.maze_goal_reward = to_double(k, v); }},

      {"learner.agent", [](auto& c, auto& k, auto& v) { c.learner.agent = wrap(k, [&] { return parse_agent_kind(v); }); }},
      {"learner.policy_over_options",
       [](auto& c, auto& k, auto& v) { c.learner.policy_over_options = wrap(k, [&] { return parse_policy_kind(v); }); }},
      {"learner.critic_lr", [](auto& c, auto& k, auto& v) { c.learner.critic_lr = to_double(k, v); }},
      {"learner.theta_lr", [](auto& c, auto& k, auto& v) { c.learner.theta_lr = to_double(k, v); }},
      {"learner.nu_lr", [](auto& c, auto& k, auto& v) { c.learner.nu_lr = to_double(k, v); }},
      {"learner.z_lr", [](auto& c, auto& k, auto& v) { c.learner.z_lr = to_double(k, v); }},
      {"learner.omega_lr", [](auto& c, auto& k, auto& v) { c.learner.omega_lr = to_double(k, v); }},
      {"learner.gamma", [](auto& c, auto& k, auto& v) { c.learner.gamma = to_double(k, v); }},
      {"learner.episodes", [](auto& c, auto& k, auto& v) { c.learner.episodes = static_cast<int>(to_integer(k, v)); }},
      {"learner.max_steps", [](auto& c, auto& k, auto& v) { c.learner.max_steps = static_cast<int>(to_integer(k, v)); }},
      {"learner.threshold_k", [](auto& c, auto& k, auto& v) { c.learner.threshold_k = to_double(k, v); }},
      {"learner.theta_baseline", [](auto& c, auto& k, auto& v) { c.learner.theta_baseline = to_bool(k, v); }},
      {"learner.seed", [](auto& c, auto& k, auto& v) { c.learner.seed = static_cast<std::uint64_t>(to_integer(k, v)); }},
      {"learner.num_options",
       [](auto& c, auto& k, auto& v) { c.learner.num_options = static_cast<int>(to_integer(k, v)); }},
      {"learner.temperature", [](auto& c, auto& k, auto& v) { c.learner.temperature = to_double(k, v); }},
      {"learner.nu_init", [](auto& c, auto& k, auto& v) { c.learner.nu_init = to_double(k, v); }},
      {"learner.z_init", [](auto& c, auto& k, auto& v) { c.learner.z_init = to_double(k, v); }},
      {"learner.max_mode", [](auto& c, auto& k, auto& v) { c.learner.max_mode = wrap(k, [&] { return parse_max_mode(v); }); }},
      {"learner.discount_weighting",
       [](auto& c, auto& k, auto& v) { c.learner.discount_weighting = to_bool(k, v); }},
      {"learner.transfer_at",
       [](auto& c, auto& k, auto& v) {
         if (v == "none" || v.empty()) {
           c.learner.transfer_at.reset();
         } else {
           c.learner.transfer_at = static_cast<int>(to_integer(k, v));
         }
       }},

      {"harness.runs", [](auto& c, auto& k, auto& v) { c.runs = static_cast<int>(to_integer(k, v)); }},
      {"harness.out", [](auto& c, auto&, auto& v) { c.out_dir = v; }},
      {"harness.dump_interest_every",
       [](auto& c, auto& k, auto& v) { c.dump_interest_every = static_cast<int>(to_integer(k, v)); }},
      {"harness.workers", [](auto& c, auto& k, auto& v) { c.workers = static_cast<int>(to_integer(k, v)); }},
  };
  return table;
}

void apply_env_defaults(ExperimentConfig& cfg) {
  LearnerConfig& l = cfg.learner;
  if (cfg.env.kind == EnvKind::kFourRooms) {
    l.max_steps = 2000;
    l.episodes = 500;
    l.num_options = 4;
    l.gamma = 0.9;
  } else {
    l.max_steps = 500;
    l.episodes = 300;
    l.num_options = 2;
    l.gamma = 0.99;
    l.policy_over_options = PolicyKind::kLearnedSoftmax;
    // Softer, slower-hardening intra-policies and rare terminations; without
    // them the agent rarely finds the second goal after a transfer.
    l.temperature = 2.0;
    l.theta_lr = 0.1;
    l.nu_init = -4.6;
    cfg.env.two_goals = true;
  }
}

}  // namespace

ConfigMap parse_config_text(std::string_view text) {
  ConfigMap out;
  std::istringstream in{std::string(text)};
  int line_no = 0;
  for (std::string line; std::getline(in, line);) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const std::string stripped = trim(line);
    if (stripped.empty()) continue;
    const auto eq = stripped.find('=');
    if (eq == std::string::npos) throw ConfigError(fmt::format("line {}: expected 'key = value'", line_no));
    const std::string key = trim(std::string_view(stripped).substr(0, eq));
    const std::string value = trim(std::string_view(stripped).substr(eq + 1));
    if (key.empty()) throw ConfigError(fmt::format("line {}: empty key", line_no));
    out[key] = value;
  }
  return out;
}

ConfigMap load_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file " + path.string());
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config_text(buf.str());
}

ExperimentConfig build_config(const ConfigMap& values) {
  ExperimentConfig cfg;
  if (const auto it = values.find("env.kind"); it != values.end()) setters().at("env.kind")(cfg, it->first, it->second);
  apply_env_defaults(cfg);
  for (const auto& [key, value] : values) {
    const auto it = setters().find(key);
    if (it == setters().end()) throw ConfigError("unknown config key '" + key + "'");
    it->second(cfg, key, value);
  }
  validate(cfg);
  return cfg;
}

void validate(const ExperimentConfig& cfg) {
  if (cfg.runs < 1) throw ConfigError("harness.runs must be at least 1");
  if (cfg.dump_interest_every < 0) throw ConfigError("harness.dump_interest_every must be non-negative");
  if (cfg.workers < 0) throw ConfigError("harness.workers must be non-negative");
  if (cfg.learner.transfer_at && *cfg.learner.transfer_at >= cfg.learner.episodes) {
    throw ConfigError("learner.transfer_at must be smaller than learner.episodes");
  }
  if (cfg.env.kind == EnvKind::kTMaze && cfg.env.rbf_centers < 2) throw ConfigError("env.rbf_centers must be >= 2");
  try {
    validate(cfg.learner);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

std::string canonical_text(const ExperimentConfig& cfg) {
  const EnvConfig& e = cfg.env;
  const LearnerConfig& l = cfg.learner;
  std::map<std::string, std::string> kv;
  const auto num = [](double d) { return fmt::format("{:.17g}", d); };
  const auto flag = [](bool b) { return std::string(b ? "true" : "false"); };

  kv["env.kind"] = to_string(e.kind);
  kv["env.step_reward"] = num(e.step_reward);
  if (e.kind == EnvKind::kFourRooms) {
    kv["env.map"] = e.map_file;
    kv["env.slip_prob"] = num(e.slip_prob);
    kv["env.goal_reward"] = num(e.goal_reward);
  } else {
    kv["env.two_goals"] = flag(e.two_goals);
    kv["env.random_start"] = flag(e.random_start);
    kv["env.action_scale"] = num(e.action_scale);
    kv["env.max_force"] = num(e.max_force);
    kv["env.directions"] = std::to_string(e.directions);
    kv["env.rbf_centers"] = std::to_string(e.rbf_centers);
    kv["env.rbf_bandwidth"] = num(e.rbf_bandwidth);
    kv["env.maze_goal_reward"] = num(e.maze_goal_reward);
  }
  kv["learner.agent"] = to_string(l.agent);
  kv["learner.policy_over_options"] = to_string(l.policy_over_options);
  kv["learner.critic_lr"] = num(l.critic_lr);
  kv["learner.theta_lr"] = num(l.theta_lr);
  kv["learner.nu_lr"] = num(l.nu_lr);
  kv["learner.z_lr"] = num(l.z_lr);
  kv["learner.omega_lr"] = num(l.omega_lr);
  kv["learner.gamma"] = num(l.gamma);
  kv["learner.episodes"] = std::to_string(l.episodes);
  kv["learner.max_steps"] = std::to_string(l.max_steps);
  kv["learner.threshold_k"] = num(l.threshold_k);
  kv["learner.theta_baseline"] = flag(l.theta_baseline);
  kv["learner.seed"] = std::to_string(l.seed);
  kv["learner.num_options"] = std::to_string(l.num_options);
  kv["learner.temperature"] = num(l.temperature);
  kv["learner.nu_init"] = num(l.nu_init);
  kv["learner.z_init"] = num(l.z_init);
  kv["learner.max_mode"] = to_string(l.max_mode);
  kv["learner.discount_weighting"] = flag(l.discount_weighting);
  kv["learner.transfer_at"] = l.transfer_at ? std::to_string(*l.transfer_at) : "none";
  kv["harness.runs"] = std::to_string(cfg.runs);
  kv["harness.dump_interest_every"] = std::to_string(cfg.dump_interest_every);

  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char c : canonical_text(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace ioc
