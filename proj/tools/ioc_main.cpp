// Command-line front end: train, gradcheck, heatmap, branching.
//
// Exit codes: 0 success, 1 configuration or input error, 2 divergence.

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "ioc/checkpoint.hpp"
#include "ioc/config.hpp"
#include "ioc/gradcheck.hpp"
#include "ioc/harness.hpp"
#include "ioc/plot.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitDiverged = 2;

struct RunFlags {
  std::string config;
  std::string env;
  std::string agent;
  std::optional<int> runs;
  std::optional<long long> seed;
  std::optional<int> episodes;
  std::optional<int> transfer_at;
  std::optional<double> threshold_k;
  std::string out;
  std::optional<int> workers;
  std::vector<std::string> sets;

  void add_to(CLI::App* cmd, bool with_agent) {
    cmd->add_option("--config", config, "Config file (section.key = value lines)");
    cmd->add_option("--env", env, "Environment")->check(CLI::IsMember({"fourrooms", "tmaze"}));
    if (with_agent) {
      cmd->add_option("--agent", agent, "Agent; 'both' runs IOC and OC side by side")
          ->check(CLI::IsMember({"ioc", "oc", "both"}));
    }
    cmd->add_option("--runs", runs, "Number of seeds");
    cmd->add_option("--seed", seed, "First seed");
    cmd->add_option("--episodes", episodes, "Episodes per run");
    cmd->add_option("--transfer-at", transfer_at, "Episode at which the most visited maze goal is removed");
    if (with_agent) cmd->add_option("--threshold-k", threshold_k, "Interest threshold for initiation");
    cmd->add_option("--out", out, "Output directory");
    cmd->add_option("--workers", workers, "Worker threads (0: all cores)");
    cmd->add_option("--set", sets, "Extra key=value override, repeatable");
  }

  ioc::ExperimentConfig resolve() const {
    ioc::ConfigMap values;
    if (!config.empty()) values = ioc::load_config_file(config);
    if (!env.empty()) values["env.kind"] = env;
    if (!agent.empty() && agent != "both") values["learner.agent"] = agent;
    if (runs) values["harness.runs"] = std::to_string(*runs);
    if (seed) values["learner.seed"] = std::to_string(*seed);
    if (episodes) values["learner.episodes"] = std::to_string(*episodes);
    if (transfer_at) values["learner.transfer_at"] = std::to_string(*transfer_at);
    if (threshold_k) values["learner.threshold_k"] = fmt::format("{:.17g}", *threshold_k);
    if (!out.empty()) values["harness.out"] = out;
    if (workers) values["harness.workers"] = std::to_string(*workers);
    for (const std::string& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw ioc::ConfigError("--set expects key=value, got '" + s + "'");
      values[s.substr(0, eq)] = s.substr(eq + 1);
    }
    return ioc::build_config(values);
  }
};

std::vector<double> parse_k_list(const std::string& text) {
  std::vector<double> ks;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    try {
      ks.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw ioc::ConfigError("bad threshold '" + item + "' in --k");
    }
    if (ks.back() < 0.0 || ks.back() > 1.0) throw ioc::ConfigError("thresholds must lie in [0, 1]");
  }
  if (ks.empty()) throw ioc::ConfigError("--k needs at least one threshold");
  return ks;
}

void summarize(const ioc::ExperimentReport& rep) {
  const auto& c = rep.curve;
  if (c.empty()) {
    fmt::print("{}: no episodes\n", rep.dir.string());
    return;
  }
  const std::size_t tail = std::min<std::size_t>(100, c.size());
  double final_steps = 0.0;
  for (std::size_t i = c.size() - tail; i < c.size(); ++i) final_steps += c[i].mean_steps / tail;
  fmt::print("{}: {} runs, first-episode mean steps {:.1f}, final-{} mean steps {:.1f}\n", rep.dir.string(),
             rep.runs.size(), c.front().mean_steps, tail, final_steps);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interest-option-critic experiments"};
  app.require_subcommand(1);

  RunFlags train_flags;
  auto* train = app.add_subcommand("train", "Train IOC / OC agents over several seeds");
  train_flags.add_to(train, true);

  ioc::GradcheckOptions gc;
  std::string gc_out;
  auto* gradcheck = app.add_subcommand("gradcheck", "Check analytic gradients against finite differences");
  gradcheck->add_option("--seed", gc.seed, "Fuzzing seed");
  gradcheck->add_option("--instances", gc.instances, "Random instances per gradient family");
  gradcheck->add_option("--tolerance", gc.tolerance, "Maximum relative error");
  gradcheck->add_option("--step", gc.step, "Central-difference step");
  gradcheck->add_option("--out", gc_out, "CSV report path (default: stdout)");

  std::string snapshot_path;
  int option = 0;
  std::string quantity = "interest";
  std::string heat_out;
  std::string heat_svg;
  auto* heatmap = app.add_subcommand("heatmap", "Dump an interest or termination map from a checkpoint");
  heatmap->add_option("--snapshot", snapshot_path, "Checkpoint written by train")->required();
  heatmap->add_option("--option", option, "Option index");
  heatmap->add_option("--quantity", quantity, "interest or termination")
      ->check(CLI::IsMember({"interest", "termination"}));
  heatmap->add_option("--out", heat_out, "CSV path (default: stdout)");
  heatmap->add_option("--svg", heat_svg, "Also write an SVG rendering");

  RunFlags branch_flags;
  std::string k_list = "0,0.25,0.5,0.75";
  auto* branching = app.add_subcommand("branching", "Sweep the interest threshold k");
  branch_flags.add_to(branching, false);
  branching->add_option("--k", k_list, "Comma-separated thresholds");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*train) {
      const ioc::ExperimentConfig cfg = train_flags.resolve();
      if (train_flags.agent == "both") {
        const auto rep = ioc::compare_agents(cfg);
        summarize(rep.ioc);
        summarize(rep.oc);
        fmt::print("comparison written to {}\n", rep.dir.string());
      } else {
        summarize(ioc::run_experiment(cfg));
      }
    } else if (*gradcheck) {
      const auto reports = ioc::check_all(gc);
      if (gc_out.empty()) {
        ioc::write_csv(std::cout, reports);
      } else {
        std::ofstream out(gc_out);
        if (!out) throw ioc::ConfigError("cannot write " + gc_out);
        ioc::write_csv(out, reports);
      }
      for (const auto& r : reports) {
        fmt::print(stderr, "{:<20} {:>5} instances  max rel err {:.3e}  {}\n", r.family, r.instances,
                   r.max_rel_error, r.pass ? "PASS" : "FAIL");
      }
      return ioc::all_pass(reports) ? kExitOk : kExitConfig;
    } else if (*heatmap) {
      const ioc::Snapshot snap = ioc::load_checkpoint(snapshot_path);
      const auto q = ioc::parse_quantity(quantity);
      if (heat_out.empty()) {
        ioc::emit_heatmap(std::cout, snap, option, q);
      } else {
        std::ofstream out(heat_out);
        if (!out) throw ioc::ConfigError("cannot write " + heat_out);
        ioc::emit_heatmap(out, snap, option, q);
      }
      if (!heat_svg.empty()) {
        ioc::EnvConfig env_cfg;
        env_cfg.kind = snap.env;
        const auto env = ioc::make_environment(env_cfg);
        const auto grid = ioc::heatmap_grid(snap.params, snap.features, *env, option, q);
        std::ofstream out(heat_svg);
        if (!out) throw ioc::ConfigError("cannot write " + heat_svg);
        ioc::write_heatmap_svg(out, fmt::format("{} option {}", quantity, option), grid.rows, grid.cols, grid.values);
      }
    } else if (*branching) {
      const ioc::ExperimentConfig cfg = branch_flags.resolve();
      const auto rows = ioc::branching_experiment(cfg, parse_k_list(k_list));
      fmt::print("k,early_mean_return,final_mean_return,early_mean_steps,final_mean_steps\n");
      for (const auto& r : rows) {
        fmt::print("{:g},{:.6g},{:.6g},{:.6g},{:.6g}\n", r.k, r.early_mean_return, r.final_mean_return,
                   r.early_mean_steps, r.final_mean_steps);
      }
    }
  } catch (const ioc::DivergenceError& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitDiverged;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitConfig;
  }
  return kExitOk;
}
