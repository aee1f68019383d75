#include <vector>

#include <benchmark/benchmark.h>

#include "ioc/learner.hpp"

namespace {

using namespace ioc;

void BM_GridStep(benchmark::State& state) {
  const GridWorld world(four_rooms_default());
  Rng rng(0);
  EnvState s = world.reset(rng);
  int a = 0;
  for (auto _ : state) {
    const Transition tr = world.step(s, a, rng);
    s = tr.terminal ? world.reset(rng) : tr.next_state;
    a = (a + 1) % kNumGridActions;
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_GridStep);

void BM_MazeStep(benchmark::State& state) {
  const PointMaze maze(tmaze_default(true));
  Rng rng(0);
  EnvState s = maze.reset(rng);
  for (auto _ : state) {
    const Transition tr = maze.step(s, static_cast<int>(uniform_index(rng, 8)), rng);
    s = tr.terminal ? maze.reset(rng) : tr.next_state;
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_MazeStep);

void BM_InterestPolicy(benchmark::State& state) {
  const auto options = static_cast<int>(state.range(0));
  const FeatureMap f = FeatureMap::one_hot(104);
  LearnerConfig cfg;
  cfg.num_options = options;
  const AgentParams p = initial_params(cfg, f, kNumGridActions);
  const Eigen::VectorXd phi = Eigen::VectorXd::Unit(104, 17);
  for (auto _ : state) benchmark::DoNotOptimize(interest_policy(p.options, p.policy, phi));
}
BENCHMARK(BM_InterestPolicy)->Arg(2)->Arg(4)->Arg(8);

void BM_RbfFeatures(benchmark::State& state) {
  const FeatureMap f = FeatureMap::rbf_grid(tmaze_default(true).bounds, 10, 10);
  const EnvState s = MazeState{Vec2{0.05, 0.1}};
  for (auto _ : state) benchmark::DoNotOptimize(f(s));
}
BENCHMARK(BM_RbfFeatures);

void BM_FourRoomsEpisode(benchmark::State& state) {
  const GridWorld world(four_rooms_default());
  LearnerConfig cfg;
  cfg.agent = state.range(0) ? AgentKind::kIoc : AgentKind::kOc;
  Learner learner(cfg, FeatureMap::one_hot(world.num_states()), kNumGridActions);
  Rng rng(1);
  std::int64_t steps = 0;
  for (auto _ : state) steps += learner.run_episode(world, rng).steps;
  state.counters["steps/s"] = benchmark::Counter(static_cast<double>(steps), benchmark::Counter::kIsRate);
}
BENCHMARK(BM_FourRoomsEpisode)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
