// Acceptance checks, one line per criterion. Exit status is the number of
// failing criteria (capped at 1 for ctest).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <fmt/core.h>

#include "../critic_oracles.hpp"
#include "ioc/config.hpp"
#include "ioc/gradcheck.hpp"
#include "ioc/harness.hpp"
#include "ioc/learner.hpp"

namespace fs = std::filesystem;
using namespace ioc;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

double mean_steps(const RunMetrics& run, std::size_t from, std::size_t to) {
  double sum = 0.0;
  for (std::size_t i = from; i < to; ++i) sum += run.episodes[i].steps;
  return sum / static_cast<double>(to - from);
}

Outcome ac1_interest_policy() {
  Rng rng(2024);
  double worst_norm = 0.0;
  bool exact = true;
  bool excluded = true;
  const int draws = 100000;
  for (int i = 0; i < draws; ++i) {
    const auto n = static_cast<Eigen::Index>(1 + uniform_index(rng, 8));
    Eigen::VectorXd base(n);
    Eigen::VectorXd interests(n);
    for (Eigen::Index j = 0; j < n; ++j) {
      base[j] = 0.01 + uniform01(rng);
      interests[j] = uniform01(rng);
    }
    base /= base.sum();

    // Indicator interests: a random subset, never empty.
    Eigen::VectorXd indicator(n);
    for (Eigen::Index j = 0; j < n; ++j) indicator[j] = uniform01(rng) < 0.5 ? 0.0 : 1.0;
    indicator[static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(n)))] = 1.0;

    if (interests.sum() > 0.0) {
      worst_norm = std::max(worst_norm, std::abs(combine_interest(interests, base).probs.sum() - 1.0));
    }
    const Eigen::VectorXd constant = Eigen::VectorXd::Constant(n, 0.01 + uniform01(rng));
    exact = exact && combine_interest(constant, base).probs == base;

    const InterestPolicyEval eval = combine_interest(indicator, base);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (indicator[j] == 0.0 && eval.probs[j] != 0.0) excluded = false;
    }
    const int drawn = sample_option(eval, 0.0, rng);
    if (indicator[drawn] == 0.0) excluded = false;
  }
  return {worst_norm <= 1e-12 && exact && excluded,
          fmt::format("max |sum-1| {:.3g}, constant reduction exact {}, indicator exclusion {} over {} draws",
                      worst_norm, exact, excluded, draws)};
}

Outcome ac2_gradcheck() {
  const auto reports = check_all(GradcheckOptions{});
  std::string detail;
  for (const auto& r : reports) detail += fmt::format("{} {:.2g}; ", r.family, r.max_rel_error);
  return {all_pass(reports) && reports.size() == 5, detail + "tol 1e-5, step 1e-6, 1000 instances each"};
}

Outcome ac3_oc_reduction() {
  bool same = true;
  std::size_t steps = 0;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    LearnerConfig ioc_cfg;
    ioc_cfg.episodes = 50;
    ioc_cfg.seed = seed;
    ioc_cfg.z_lr = 0.0;
    LearnerConfig oc_cfg = ioc_cfg;
    oc_cfg.agent = AgentKind::kOc;

    std::vector<StepTrace> ta;
    std::vector<StepTrace> tb;
    std::vector<AgentParams> pa;
    std::vector<AgentParams> pb;
    TrainHooks ha;
    ha.on_step = [&](const StepTrace& t) { ta.push_back(t); };
    ha.on_episode_end = [&](int, const EpisodeMetrics&, const Learner& l) { pa.push_back(l.params()); };
    TrainHooks hb;
    hb.on_step = [&](const StepTrace& t) { tb.push_back(t); };
    hb.on_episode_end = [&](int, const EpisodeMetrics&, const Learner& l) { pb.push_back(l.params()); };

    GridWorld wa(four_rooms_default());
    GridWorld wb(four_rooms_default());
    const FeatureMap f = FeatureMap::one_hot(wa.num_states());
    const RunMetrics a = train(wa, f, ioc_cfg, ha);
    const RunMetrics b = train(wb, f, oc_cfg, hb);

    same = same && ta.size() == tb.size() && pa.size() == pb.size() && a.episodes == b.episodes &&
           a.final_critic == b.final_critic;
    for (std::size_t i = 0; same && i < ta.size(); ++i) {
      same = ta[i].state == tb[i].state && ta[i].action == tb[i].action && ta[i].option == tb[i].option &&
             ta[i].next_option == tb[i].next_option && ta[i].reward == tb[i].reward;
    }
    for (std::size_t i = 0; same && i < pa.size(); ++i) same = bit_identical(pa[i], pb[i]);
    steps += ta.size();
  }
  return {same, fmt::format("5 seeds x 50 episodes, {} steps compared with parameters after every episode", steps)};
}

struct FourRoomsResults {
  std::vector<RunMetrics> ioc;
  std::vector<RunMetrics> oc;
};

FourRoomsResults run_four_rooms(int seeds) {
  ExperimentConfig cfg = build_config({});
  cfg.runs = seeds;
  FourRoomsResults out;
  out.ioc = run_trainings(cfg);
  cfg.learner.agent = AgentKind::kOc;
  out.oc = run_trainings(cfg);
  return out;
}

bool all_finite(const RunMetrics& run) {
  for (const auto& o : run.final_params.options) {
    if (!o.intra_policy.weights.allFinite() || !o.termination.weights.allFinite() || !o.interest.weights.allFinite()) {
      return false;
    }
  }
  for (int w = 0; w < run.final_critic.num_options(); ++w) {
    if (!run.final_critic.weights(w).allFinite()) return false;
  }
  return true;
}

Outcome ac4_four_rooms(const FourRoomsResults& r) {
  const auto summary = [](const std::vector<RunMetrics>& runs, double& first, double& final, bool& learns) {
    first = final = 0.0;
    learns = true;
    for (const auto& run : runs) {
      const double f = mean_steps(run, 0, 50);
      const double l = mean_steps(run, 400, 500);
      first += f / static_cast<double>(runs.size());
      final += l / static_cast<double>(runs.size());
      learns = learns && all_finite(run);
    }
    learns = learns && final < 0.5 * first;
  };
  double ioc_first = 0, ioc_final = 0, oc_first = 0, oc_final = 0;
  bool ioc_learns = false, oc_learns = false;
  summary(r.ioc, ioc_first, ioc_final, ioc_learns);
  summary(r.oc, oc_first, oc_final, oc_learns);
  return {ioc_learns && oc_learns && ioc_final <= oc_final,
          fmt::format("{} seeds; IOC first-50 {:.1f} final-100 {:.2f}; OC first-50 {:.1f} final-100 {:.2f}; gap {:.2f} "
                      "steps",
                      r.ioc.size(), ioc_first, ioc_final, oc_first, oc_final, oc_final - ioc_final)};
}

Outcome ac5_specialization(const FourRoomsResults& r) {
  const GridWorld world(four_rooms_default());
  const FeatureMap f = FeatureMap::one_hot(world.num_states());
  const double at_init = interest_specialization(initial_params(LearnerConfig{}, f, kNumGridActions), f, world);
  int hits = 0;
  double lo = 1e9, hi = 0.0, sum = 0.0;
  for (const auto& run : r.ioc) {
    const double s = interest_specialization(run.final_params, f, world);
    hits += s - at_init >= 0.05;
    lo = std::min(lo, s);
    hi = std::max(hi, s);
    sum += s;
  }
  const double frac = hits / static_cast<double>(r.ioc.size());
  return {at_init == 0.0 && frac >= 0.8,
          fmt::format("{}/{} seeds >= 0.05 above init ({}); mean {:.3f}, range [{:.3f}, {:.3f}]", hits,
                      r.ioc.size(), at_init, sum / static_cast<double>(r.ioc.size()), lo, hi)};
}

Outcome ac6_tmaze_transfer() {
  ExperimentConfig cfg = build_config({{"env.kind", "tmaze"}, {"learner.transfer_at", "150"},
                                       {"learner.episodes", "250"}});
  cfg.runs = 20;
  const auto runs = run_trainings(cfg);
  int ok = 0;
  std::vector<int> first_hit;
  for (const auto& run : runs) {
    if (run.transfers.size() != 1 || run.transfers[0].episode != 150) continue;
    const int remaining = 1 - run.transfers[0].removed_goal;
    int hit = -1;
    for (std::size_t e = 150; e < 250 && e < run.episodes.size(); ++e) {
      if (run.episodes[e].goal_index == remaining) {
        hit = static_cast<int>(e) - 150;
        break;
      }
    }
    first_hit.push_back(hit);
    ok += hit >= 0;
  }
  std::string hits;
  for (int h : first_hit) hits += std::to_string(h) + " ";
  return {ok == static_cast<int>(runs.size()),
          fmt::format("{}/{} seeds reached the remaining goal; episodes after switch to first hit: {}", ok,
                      runs.size(), hits)};
}

Outcome ac7_critic() {
  const double chain = testing::chain_critic_gap(1);
  const auto fixed = testing::two_state_fixed_point(0.9);
  const auto learned = testing::two_state_learned(0.9, 0.3, 2000);
  const double two_state = std::max(std::abs(fixed[0] - learned[0]), std::abs(fixed[1] - learned[1]));
  const double brute = testing::two_option_brute_force_gap(7, 5000);
  return {chain <= 1e-3 && two_state <= 1e-3 && brute <= 1e-12,
          fmt::format("5-state chain gap {:.2g}; 2-state fixed point gap {:.2g}; 2-option backup gap {:.2g}", chain,
                      two_state, brute)};
}

std::map<std::string, std::string> csv_files(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& entry : fs::recursive_directory_iterator(root)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".csv") continue;
    std::ifstream in(entry.path(), std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    out[fs::relative(entry.path(), root).string()] = s.str();
  }
  return out;
}

Outcome ac8_determinism() {
  const fs::path base = fs::temp_directory_path() / "ioc_acceptance_ac8";
  fs::remove_all(base);
  const auto run_all = [&](const fs::path& out) {
    ExperimentConfig grid = build_config({{"learner.episodes", "30"}, {"harness.runs", "3"}});
    grid.out_dir = out;
    grid.dump_interest_every = 10;
    compare_agents(grid);
    ExperimentConfig maze = build_config({{"env.kind", "tmaze"}, {"learner.episodes", "20"},
                                          {"learner.transfer_at", "10"}, {"harness.runs", "2"}});
    maze.out_dir = out;
    run_experiment(maze);
    ExperimentConfig branch = build_config({{"learner.episodes", "20"}, {"harness.runs", "2"}});
    branch.out_dir = out;
    branching_experiment(branch, {0.0, 0.5});
  };
  run_all(base / "first");
  run_all(base / "second");
  const auto a = csv_files(base / "first");
  const auto b = csv_files(base / "second");
  const bool same = !a.empty() && a == b;
  fs::remove_all(base);
  return {same, fmt::format("{} CSV files compared byte for byte across two runs", a.size())};
}

}  // namespace

int main() {
  int failures = 0;
  const auto report = [&](const char* id, const char* what, const std::function<Outcome()>& check) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    failures += !o.pass;
    std::cout << fmt::format("{} {}: {} ({}) [{:.1f}s]", id, o.pass ? "PASS" : "FAIL", what, o.detail, secs)
              << std::endl;
  };

  report("AC-1", "interest policy properties", ac1_interest_policy);
  report("AC-2", "gradient oracle", ac2_gradcheck);
  report("AC-3", "OC reduction", ac3_oc_reduction);
  FourRoomsResults four_rooms;
  report("AC-4", "Four-Rooms IOC vs OC", [&] {
    four_rooms = run_four_rooms(30);
    return ac4_four_rooms(four_rooms);
  });
  report("AC-5", "interest specialization", [&] {
    if (four_rooms.ioc.empty()) return Outcome{false, "no Four-Rooms runs"};
    return ac5_specialization(four_rooms);
  });
  report("AC-6", "TMaze transfer", ac6_tmaze_transfer);
  report("AC-7", "critic oracle", ac7_critic);
  report("AC-8", "determinism", ac8_determinism);
  return failures == 0 ? 0 : 1;
}
