#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <vector>

#include "ioc/checkpoint.hpp"
#include "ioc/config.hpp"
#include "ioc/env.hpp"
#include "ioc/funcapprox.hpp"
#include "ioc/learner.hpp"

namespace ioc {

std::unique_ptr<Environment> make_environment(const EnvConfig& cfg);
FeatureMap make_features(const EnvConfig& cfg, const Environment& env);

struct CurveRow {
  int episode = 0;
  double mean_steps = 0.0;
  double stderr_steps = 0.0;
  double mean_return = 0.0;
  double stderr_return = 0.0;
};

/// Per-episode mean and standard error (sample sd / sqrt(runs); 0 for a
/// single run) across runs.
std::vector<CurveRow> aggregate(const std::vector<RunMetrics>& runs);

void write_run_csv(std::ostream& out, const RunMetrics& run);
void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& curve);

enum class HeatmapQuantity { kInterest, kTermination };
HeatmapQuantity parse_quantity(std::string_view name);
std::string to_string(HeatmapQuantity q);

/// Interest or termination value of one option over the environment:
/// `row,col,value` per open grid cell, or `x,y,value` on a 50x50 lattice
/// over the maze bounds with wall points left out.
void emit_heatmap(std::ostream& out, const AgentParams& params, const FeatureMap& features, const Environment& env,
                  int option, HeatmapQuantity quantity);
void emit_heatmap(std::ostream& out, const Snapshot& snap, int option, HeatmapQuantity quantity);

/// Value grid behind emit_heatmap (NaN on walls), row-major.
struct HeatmapGrid {
  int rows = 0;
  int cols = 0;
  std::vector<double> values;
};
HeatmapGrid heatmap_grid(const AgentParams& params, const FeatureMap& features, const Environment& env, int option,
                         HeatmapQuantity quantity);

struct ExperimentReport {
  std::filesystem::path dir;
  std::vector<std::uint64_t> seeds;
  std::vector<RunMetrics> runs;
  std::vector<CurveRow> curve;
};

/// Runs cfg.runs seeded trainings (seed, seed+1, ...) on a worker pool and
/// writes under out_dir/<env>-<agent>-<hash>/:
///   config.txt, run_seed<S>.csv, run_seed<S>.ckpt, curve.csv, curve.svg,
///   heatmaps/<quantity>_opt<i>_ep<E>_seed<S>.csv (+ .svg for grids).
/// Throws ConfigError if that directory holds a different config.
ExperimentReport run_experiment(const ExperimentConfig& cfg);

/// Trains without touching the filesystem.
std::vector<RunMetrics> run_trainings(const ExperimentConfig& cfg);

struct ComparisonReport {
  std::filesystem::path dir;
  ExperimentReport ioc;
  ExperimentReport oc;
};

/// Paired IOC and OC experiments plus comparison.csv / comparison.svg:
/// episode, ioc_mean_steps, ioc_stderr_steps, oc_mean_steps, oc_stderr_steps.
ComparisonReport compare_agents(const ExperimentConfig& cfg);

struct BranchingRow {
  double k = 0.0;
  double early_mean_return = 0.0;
  double final_mean_return = 0.0;
  double early_mean_steps = 0.0;
  double final_mean_steps = 0.0;
};

/// One experiment per threshold; early/final phases are the first and last
/// 20% of episodes. Writes branching.csv (k, early_mean_return,
/// final_mean_return, early_mean_steps, final_mean_steps) under out_dir.
std::vector<BranchingRow> branching_experiment(const ExperimentConfig& cfg, const std::vector<double>& k_values);

/// Mean pairwise L1 distance between the options' interest maps, averaged
/// over open cells (grid) or free lattice points (maze).
double interest_specialization(const AgentParams& params, const FeatureMap& features, const Environment& env);

}  // namespace ioc
