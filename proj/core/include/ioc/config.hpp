#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "ioc/env.hpp"
#include "ioc/learner.hpp"

namespace ioc {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct EnvConfig {
  EnvKind kind = EnvKind::kFourRooms;

  // Four-Rooms
  std::string map_file;  // empty: built-in layout
  double slip_prob = 1.0 / 3.0;
  double goal_reward = 50.0;

  // TMaze
  bool two_goals = false;
  bool random_start = false;
  double action_scale = 0.05;
  double max_force = 1.0;
  int directions = 8;
  int rbf_centers = 10;     // per axis
  double rbf_bandwidth = 0; // 0: lattice spacing
  double maze_goal_reward = 1.0;

  double step_reward = 0.0;
};

struct ExperimentConfig {
  EnvConfig env;
  LearnerConfig learner;
  int runs = 1;
  std::filesystem::path out_dir = "out";
  /// Interest/termination heatmaps every N episodes (0: final only).
  int dump_interest_every = 0;
  /// Worker threads for independent runs (0: hardware concurrency).
  int workers = 0;
};

/// Flat `section.key = value` pairs; '#' starts a comment.
using ConfigMap = std::map<std::string, std::string>;

ConfigMap parse_config_text(std::string_view text);
ConfigMap load_config_file(const std::filesystem::path& path);

/// Resolves a config from key-value pairs. Environment-dependent defaults
/// (episode cap, option count, learning rates) are filled in first, then
/// every key overrides. Throws ConfigError on unknown keys or bad values.
ExperimentConfig build_config(const ConfigMap& values);

void validate(const ExperimentConfig& cfg);

/// Every setting that influences results, one `key = value` per line, sorted.
std::string canonical_text(const ExperimentConfig& cfg);
/// FNV-1a of canonical_text.
std::uint64_t config_hash(const ExperimentConfig& cfg);

}  // namespace ioc
