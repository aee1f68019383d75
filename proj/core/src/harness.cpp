#include "ioc/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <iostream>
#include <limits>
#include <numeric>
#include <sstream>
#include <thread>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "ioc/plot.hpp"

namespace ioc {

namespace fs = std::filesystem;

std::unique_ptr<Environment> make_environment(const EnvConfig& cfg) {
  try {
    if (cfg.kind == EnvKind::kFourRooms) {
      GridSpec spec = four_rooms_default();
      if (!cfg.map_file.empty()) {
        std::ifstream in(cfg.map_file);
        if (!in) throw ConfigError("cannot read map file " + cfg.map_file);
        std::stringstream buf;
        buf << in.rdbuf();
        spec = parse_grid_map(buf.str(), spec);
      }
      spec.slip_prob = cfg.slip_prob;
      spec.goal_reward = cfg.goal_reward;
      spec.step_reward = cfg.step_reward;
      return std::make_unique<GridWorld>(std::move(spec));
    }
    MazeSpec spec = tmaze_default(cfg.two_goals);
    spec.random_start = cfg.random_start;
    spec.action_scale = cfg.action_scale;
    spec.max_force = cfg.max_force;
    spec.num_directions = cfg.directions;
    spec.step_reward = cfg.step_reward;
    for (MazeGoal& g : spec.goals) g.reward = cfg.maze_goal_reward;
    return std::make_unique<PointMaze>(std::move(spec));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("environment: ") + e.what());
  }
}

FeatureMap make_features(const EnvConfig& cfg, const Environment& env) {
  if (const auto* grid = dynamic_cast<const GridWorld*>(&env)) return FeatureMap::one_hot(grid->num_states());
  const auto& maze = dynamic_cast<const PointMaze&>(env);
  return FeatureMap::rbf_grid(maze.spec().bounds, cfg.rbf_centers, cfg.rbf_centers, cfg.rbf_bandwidth);
}

// ---------------------------------------------------------------------------
// Aggregation and CSV

namespace {

struct MeanStderr {
  double mean = 0.0;
  double stderr_ = 0.0;
};

MeanStderr mean_stderr(const std::vector<double>& xs) {
  MeanStderr out;
  const auto n = static_cast<double>(xs.size());
  if (xs.empty()) return out;
  out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.stderr_ = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
  }
  return out;
}

std::string num(double v) { return fmt::format("{:.17g}", v); }

}  // namespace

std::vector<CurveRow> aggregate(const std::vector<RunMetrics>& runs) {
  std::vector<CurveRow> curve;
  if (runs.empty()) return curve;
  std::size_t episodes = runs.front().episodes.size();
  for (const RunMetrics& r : runs) episodes = std::min(episodes, r.episodes.size());
  for (std::size_t e = 0; e < episodes; ++e) {
    std::vector<double> steps;
    std::vector<double> rets;
    for (const RunMetrics& r : runs) {
      steps.push_back(r.episodes[e].steps);
      rets.push_back(r.episodes[e].ret);
    }
    const MeanStderr s = mean_stderr(steps);
    const MeanStderr g = mean_stderr(rets);
    curve.push_back({static_cast<int>(e), s.mean, s.stderr_, g.mean, g.stderr_});
  }
  return curve;
}

void write_run_csv(std::ostream& out, const RunMetrics& run) {
  const std::size_t n_options = run.episodes.empty() ? 0 : run.episodes.front().option_steps.size();
  out << "episode,steps,return,discounted_return,reached_goal,goal_index,terminations";
  for (std::size_t w = 0; w < n_options; ++w) out << ",usage_" << w;
  for (std::size_t w = 0; w < n_options; ++w) out << ",initiations_" << w;
  out << '\n';
  for (std::size_t e = 0; e < run.episodes.size(); ++e) {
    const EpisodeMetrics& m = run.episodes[e];
    out << e << ',' << m.steps << ',' << num(m.ret) << ',' << num(m.discounted_return) << ','
        << (m.reached_goal ? 1 : 0) << ',' << (m.goal_index ? *m.goal_index : -1) << ',' << m.terminations;
    for (int s : m.option_steps) out << ',' << num(m.steps > 0 ? static_cast<double>(s) / m.steps : 0.0);
    for (int c : m.option_initiations) out << ',' << c;
    out << '\n';
  }
}

void write_curve_csv(std::ostream& out, const std::vector<CurveRow>& curve) {
  out << "episode,mean_steps,stderr_steps,mean_return,stderr_return\n";
  for (const CurveRow& r : curve) {
    out << r.episode << ',' << num(r.mean_steps) << ',' << num(r.stderr_steps) << ',' << num(r.mean_return) << ','
        << num(r.stderr_return) << '\n';
  }
}

// ---------------------------------------------------------------------------
// Heatmaps

HeatmapQuantity parse_quantity(std::string_view name) {
  if (name == "interest") return HeatmapQuantity::kInterest;
  if (name == "termination") return HeatmapQuantity::kTermination;
  throw std::invalid_argument("unknown heatmap quantity '" + std::string(name) + "'");
}

std::string to_string(HeatmapQuantity q) { return q == HeatmapQuantity::kInterest ? "interest" : "termination"; }

namespace {

constexpr int kMazeLattice = 50;

double head_value(const OptionParams& opt, const Eigen::VectorXd& phi, HeatmapQuantity q) {
  return q == HeatmapQuantity::kInterest ? interest_value(opt, phi) : termination_prob(opt, phi);
}

Vec2 lattice_point(const Rect& bounds, int row, int col) {
  const Vec2 extent = bounds.hi - bounds.lo;
  const double x = bounds.lo.x() + (col + 0.5) * extent.x() / kMazeLattice;
  const double y = bounds.hi.y() - (row + 0.5) * extent.y() / kMazeLattice;
  return {x, y};
}

const OptionParams& option_at(const AgentParams& params, int option) {
  if (option < 0 || static_cast<std::size_t>(option) >= params.options.size()) {
    throw std::out_of_range("option index out of range");
  }
  return params.options[static_cast<std::size_t>(option)];
}

}  // namespace

HeatmapGrid heatmap_grid(const AgentParams& params, const FeatureMap& features, const Environment& env, int option,
                         HeatmapQuantity quantity) {
  const OptionParams& opt = option_at(params, option);
  HeatmapGrid grid;
  constexpr double nan = std::numeric_limits<double>::quiet_NaN();
  if (const auto* world = dynamic_cast<const GridWorld*>(&env)) {
    grid.rows = world->spec().height;
    grid.cols = world->spec().width;
    grid.values.assign(static_cast<std::size_t>(grid.rows * grid.cols), nan);
    for (const Cell& c : world->open_cells()) {
      grid.values[static_cast<std::size_t>(c.row * grid.cols + c.col)] =
          head_value(opt, features(world->state_at(c)), quantity);
    }
    return grid;
  }
  const auto& maze = dynamic_cast<const PointMaze&>(env);
  grid.rows = kMazeLattice;
  grid.cols = kMazeLattice;
  grid.values.assign(static_cast<std::size_t>(grid.rows * grid.cols), nan);
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const Vec2 p = lattice_point(maze.spec().bounds, r, c);
      if (!maze.spec().is_free(p)) continue;
      grid.values[static_cast<std::size_t>(r * grid.cols + c)] = head_value(opt, features(MazeState{p}), quantity);
    }
  }
  return grid;
}

void emit_heatmap(std::ostream& out, const AgentParams& params, const FeatureMap& features, const Environment& env,
                  int option, HeatmapQuantity quantity) {
  const HeatmapGrid grid = heatmap_grid(params, features, env, option, quantity);
  const auto* maze = dynamic_cast<const PointMaze*>(&env);
  out << (maze ? "x,y,value\n" : "row,col,value\n");
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      const double v = grid.values[static_cast<std::size_t>(r * grid.cols + c)];
      if (std::isnan(v)) continue;
      if (maze) {
        const Vec2 p = lattice_point(maze->spec().bounds, r, c);
        out << num(p.x()) << ',' << num(p.y()) << ',' << num(v) << '\n';
      } else {
        out << r << ',' << c << ',' << num(v) << '\n';
      }
    }
  }
}

void emit_heatmap(std::ostream& out, const Snapshot& snap, int option, HeatmapQuantity quantity) {
  EnvConfig env_cfg;
  env_cfg.kind = snap.env;
  const auto env = make_environment(env_cfg);
  if (env->num_actions() != snap.num_actions && snap.env == EnvKind::kFourRooms) {
    throw std::runtime_error("snapshot does not match the four-rooms action set");
  }
  emit_heatmap(out, snap.params, snap.features, *env, option, quantity);
}

double interest_specialization(const AgentParams& params, const FeatureMap& features, const Environment& env) {
  const int n = static_cast<int>(params.options.size());
  if (n < 2) return 0.0;
  std::vector<HeatmapGrid> maps;
  for (int w = 0; w < n; ++w) maps.push_back(heatmap_grid(params, features, env, w, HeatmapQuantity::kInterest));
  double total = 0.0;
  int pairs = 0;
  for (int a = 0; a < n; ++a) {
    for (int b = a + 1; b < n; ++b) {
      double sum = 0.0;
      int count = 0;
      for (std::size_t i = 0; i < maps[0].values.size(); ++i) {
        const double va = maps[static_cast<std::size_t>(a)].values[i];
        if (std::isnan(va)) continue;
        sum += std::abs(va - maps[static_cast<std::size_t>(b)].values[i]);
        ++count;
      }
      total += count > 0 ? sum / count : 0.0;
      ++pairs;
    }
  }
  return total / pairs;
}

// ---------------------------------------------------------------------------
// Orchestration

namespace {

struct RunOutput {
  std::uint64_t seed = 0;
  RunMetrics metrics;
  std::vector<std::pair<int, AgentParams>> dumps;
};

RunOutput run_one(const ExperimentConfig& cfg, std::uint64_t seed, bool keep_dumps) {
  auto env = make_environment(cfg.env);
  const FeatureMap features = make_features(cfg.env, *env);
  LearnerConfig lc = cfg.learner;
  lc.seed = seed;

  RunOutput out;
  out.seed = seed;
  TrainHooks hooks;
  if (keep_dumps && cfg.dump_interest_every > 0) {
    hooks.on_episode_end = [&](int ep, const EpisodeMetrics&, const Learner& learner) {
      if ((ep + 1) % cfg.dump_interest_every == 0 && ep + 1 < lc.episodes) {
        out.dumps.emplace_back(ep + 1, learner.params());
      }
    };
  }
  out.metrics = train(*env, features, lc, hooks);
  if (keep_dumps) out.dumps.emplace_back(lc.episodes, out.metrics.final_params);
  return out;
}

std::vector<RunOutput> run_pool(const ExperimentConfig& cfg, bool keep_dumps) {
  const auto runs = static_cast<std::size_t>(cfg.runs);
  std::vector<RunOutput> results(runs);
  std::vector<std::exception_ptr> errors(runs);
  std::atomic<std::size_t> next{0};

  const auto work = [&] {
    for (std::size_t i = next++; i < runs; i = next++) {
      try {
        results[i] = run_one(cfg, cfg.learner.seed + i, keep_dumps);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };

  std::size_t workers = cfg.workers > 0 ? static_cast<std::size_t>(cfg.workers)
                                        : std::max<std::size_t>(1, std::thread::hardware_concurrency());
  workers = std::min(workers, runs);
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;  // indexed by seed offset, so already in seed order
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("error writing " + path.string());
}

template <typename F>
void write_with(const fs::path& path, F&& fill) {
  std::ostringstream buf;
  fill(buf);
  write_file(path, buf.str());
}

fs::path prepare_dir(const fs::path& root, const std::string& name, const std::string& canonical) {
  const fs::path dir = root / name;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory " + dir.string() + ": " + ec.message());
  const fs::path cfg_path = dir / "config.txt";
  if (fs::exists(cfg_path)) {
    std::ifstream in(cfg_path, std::ios::binary);
    std::stringstream existing;
    existing << in.rdbuf();
    if (existing.str() != canonical) {
      throw ConfigError("output directory " + dir.string() + " already holds a different config");
    }
  }
  write_file(cfg_path, canonical);
  return dir;
}

std::string experiment_name(const ExperimentConfig& cfg) {
  return fmt::format("{}-{}-{:016x}", to_string(cfg.env.kind), to_string(cfg.learner.agent), config_hash(cfg));
}

}  // namespace

std::vector<RunMetrics> run_trainings(const ExperimentConfig& cfg) {
  validate(cfg);
  std::vector<RunMetrics> out;
  for (RunOutput& r : run_pool(cfg, false)) out.push_back(std::move(r.metrics));
  return out;
}

ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  const std::string canonical = canonical_text(cfg);
  ExperimentReport report;
  report.dir = prepare_dir(cfg.out_dir, experiment_name(cfg), canonical);

  std::vector<RunOutput> outputs = run_pool(cfg, true);

  const auto env = make_environment(cfg.env);
  const FeatureMap features = make_features(cfg.env, *env);
  const auto* world = dynamic_cast<const GridWorld*>(env.get());
  for (RunOutput& r : outputs) {
    write_with(report.dir / fmt::format("run_seed{}.csv", r.seed), [&](std::ostream& o) { write_run_csv(o, r.metrics); });
    if (!r.metrics.transfers.empty()) {
      write_with(report.dir / fmt::format("transfers_seed{}.csv", r.seed), [&](std::ostream& o) {
        o << "episode,removed_goal,visit_counts\n";
        for (const TransferEvent& ev : r.metrics.transfers) {
          o << ev.episode << ',' << ev.removed_goal << ',';
          for (std::size_t g = 0; g < ev.visit_counts.size(); ++g) o << (g ? ";" : "") << ev.visit_counts[g];
          o << '\n';
        }
      });
    }
    Snapshot snap{cfg.env.kind, features, env->num_actions(), r.metrics.final_params, r.metrics.final_critic};
    write_with(report.dir / fmt::format("run_seed{}.ckpt", r.seed), [&](std::ostream& o) { write_checkpoint(o, snap); });

    if (!r.dumps.empty()) fs::create_directories(report.dir / "heatmaps");
    for (const auto& [episode, params] : r.dumps) {
      for (const HeatmapQuantity q : {HeatmapQuantity::kInterest, HeatmapQuantity::kTermination}) {
        for (int w = 0; w < static_cast<int>(params.options.size()); ++w) {
          const std::string stem = fmt::format("{}_opt{}_ep{}_seed{}", to_string(q), w, episode, r.seed);
          write_with(report.dir / "heatmaps" / (stem + ".csv"),
                     [&](std::ostream& o) { emit_heatmap(o, params, features, *env, w, q); });
          if (world != nullptr) {
            const HeatmapGrid grid = heatmap_grid(params, features, *env, w, q);
            write_with(report.dir / "heatmaps" / (stem + ".svg"), [&](std::ostream& o) {
              write_heatmap_svg(o, fmt::format("{} option {} episode {}", to_string(q), w, episode), grid.rows,
                                grid.cols, grid.values);
            });
          }
        }
      }
    }
    report.seeds.push_back(r.seed);
    report.runs.push_back(std::move(r.metrics));
  }

  report.curve = aggregate(report.runs);
  write_with(report.dir / "curve.csv", [&](std::ostream& o) { write_curve_csv(o, report.curve); });
  std::vector<double> steps;
  for (const CurveRow& row : report.curve) steps.push_back(row.mean_steps);
  write_with(report.dir / "curve.svg", [&](std::ostream& o) {
    write_line_chart_svg(o, fmt::format("{} {} ({} runs)", to_string(cfg.env.kind), to_string(cfg.learner.agent), cfg.runs),
                         "episode", "steps to goal", {{to_string(cfg.learner.agent), steps}});
  });
  return report;
}

ComparisonReport compare_agents(const ExperimentConfig& cfg) {
  ExperimentConfig ioc_cfg = cfg;
  ioc_cfg.learner.agent = AgentKind::kIoc;
  ExperimentConfig oc_cfg = cfg;
  oc_cfg.learner.agent = AgentKind::kOc;

  ComparisonReport report;
  report.ioc = run_experiment(ioc_cfg);
  report.oc = run_experiment(oc_cfg);
  report.dir = prepare_dir(cfg.out_dir, fmt::format("compare-{}-{:016x}", to_string(cfg.env.kind), config_hash(ioc_cfg)),
                           canonical_text(ioc_cfg));

  write_with(report.dir / "comparison.csv", [&](std::ostream& o) {
    o << "episode,ioc_mean_steps,ioc_stderr_steps,oc_mean_steps,oc_stderr_steps\n";
    const std::size_t n = std::min(report.ioc.curve.size(), report.oc.curve.size());
    for (std::size_t e = 0; e < n; ++e) {
      const CurveRow& a = report.ioc.curve[e];
      const CurveRow& b = report.oc.curve[e];
      o << e << ',' << num(a.mean_steps) << ',' << num(a.stderr_steps) << ',' << num(b.mean_steps) << ','
        << num(b.stderr_steps) << '\n';
    }
  });
  std::vector<double> ioc_steps;
  std::vector<double> oc_steps;
  for (const CurveRow& r : report.ioc.curve) ioc_steps.push_back(r.mean_steps);
  for (const CurveRow& r : report.oc.curve) oc_steps.push_back(r.mean_steps);
  write_with(report.dir / "comparison.svg", [&](std::ostream& o) {
    write_line_chart_svg(o, fmt::format("{}: IOC vs OC ({} runs)", to_string(cfg.env.kind), cfg.runs), "episode",
                         "steps to goal", {{"IOC", ioc_steps, "#d62728"}, {"OC", oc_steps, "#1f77b4"}});
  });
  return report;
}

std::vector<BranchingRow> branching_experiment(const ExperimentConfig& cfg, const std::vector<double>& k_values) {
  if (cfg.learner.num_options < 2) throw ConfigError("branching experiment needs at least 2 options");
  std::vector<BranchingRow> rows;
  std::vector<Series> curves;
  static const char* kColors[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b"};
  for (std::size_t i = 0; i < k_values.size(); ++i) {
    ExperimentConfig c = cfg;
    c.learner.threshold_k = k_values[i];
    const ExperimentReport rep = run_experiment(c);
    const auto n = rep.curve.size();
    const auto phase = std::max<std::size_t>(1, n / 5);
    BranchingRow row;
    row.k = k_values[i];
    for (std::size_t e = 0; e < phase && e < n; ++e) {
      row.early_mean_return += rep.curve[e].mean_return / static_cast<double>(phase);
      row.early_mean_steps += rep.curve[e].mean_steps / static_cast<double>(phase);
      row.final_mean_return += rep.curve[n - 1 - e].mean_return / static_cast<double>(phase);
      row.final_mean_steps += rep.curve[n - 1 - e].mean_steps / static_cast<double>(phase);
    }
    rows.push_back(row);
    std::vector<double> rets;
    for (const CurveRow& r : rep.curve) rets.push_back(r.mean_return);
    curves.push_back({fmt::format("k={:g}", k_values[i]), rets, kColors[i % std::size(kColors)]});
  }

  ExperimentConfig tag = cfg;
  tag.learner.threshold_k = 0.0;
  std::string canonical = canonical_text(tag) + "branching.k =";
  for (double k : k_values) canonical += " " + num(k);
  canonical += "\n";
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const unsigned char ch : canonical) {
    h ^= ch;
    h *= 0x100000001b3ULL;
  }
  const fs::path dir = prepare_dir(cfg.out_dir, fmt::format("branching-{}-{:016x}", to_string(cfg.env.kind), h),
                                   canonical);
  write_with(dir / "branching.csv", [&](std::ostream& o) {
    o << "k,early_mean_return,final_mean_return,early_mean_steps,final_mean_steps\n";
    for (const BranchingRow& r : rows) {
      o << num(r.k) << ',' << num(r.early_mean_return) << ',' << num(r.final_mean_return) << ','
        << num(r.early_mean_steps) << ',' << num(r.final_mean_steps) << '\n';
    }
  });
  write_with(dir / "branching.svg", [&](std::ostream& o) {
    write_line_chart_svg(o, "return by interest threshold k", "episode", "return", curves);
  });
  return rows;
}

}  // namespace ioc
