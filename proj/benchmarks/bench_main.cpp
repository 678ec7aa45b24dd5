#include <benchmark/benchmark.h>

#include <random>

#include "advicelab/qnet/trainer.hpp"
#include "advicelab/render/raycaster.hpp"
#include "advicelab/world/environment.hpp"

using namespace advicelab;

namespace {

const char* kDeskMap = R"(width=12
height=12
milestone_entry_x=4
milestone_exit_x=9
############
#...H......#
#.R.H......#
#...H....G.#
#...HHHHH..#
#S.........#
#...HHHHH..#
#...H......#
#.B.H......#
#...H......#
#...H.....N#
############
)";

const world::GridMap& desk() {
  static const world::GridMap map = world::load_map(kDeskMap);
  return map;
}

qnet::NetworkSpec spec_for(int c1, int c2, int dense) {
  qnet::NetworkSpec s;
  s.conv_channels = {c1, c2};
  s.dense_widths = {dense};
  return s;
}

void BM_Render(benchmark::State& state) {
  render::TexturePalette palette(render::AliasingMode::kAliased);
  const auto pose = desk().spawn();
  for (auto _ : state) benchmark::DoNotOptimize(render::render(desk(), pose, palette));
}
BENCHMARK(BM_Render);

void BM_FrameCacheHit(benchmark::State& state) {
  render::FrameCache cache(desk(), render::TexturePalette(render::AliasingMode::kAliased), {});
  const auto pose = desk().spawn();
  cache.get(pose);
  for (auto _ : state) benchmark::DoNotOptimize(&cache.get(pose));
}
BENCHMARK(BM_FrameCacheHit);

void BM_EnvironmentStep(benchmark::State& state) {
  auto map = std::make_shared<const world::GridMap>(desk());
  world::Environment env(map, {1000000, 0});
  env.reset();
  std::mt19937_64 rng(1);
  std::uniform_int_distribution<int> pick(0, 3);
  for (auto _ : state) {
    if (env.terminal()) env.reset();
    benchmark::DoNotOptimize(env.step(world::action_from_index(pick(rng))));
  }
}
BENCHMARK(BM_EnvironmentStep);

void BM_GreedyForward(benchmark::State& state) {
  auto spec = spec_for(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)),
                       static_cast<int>(state.range(2)));
  qnet::QNetwork<float> net(spec);
  std::mt19937_64 rng(3);
  net.init_he_uniform(rng);
  std::vector<float> obs(spec.input_size(), 0.5f);
  for (auto _ : state) benchmark::DoNotOptimize(net.forward(obs, 1));
}
BENCHMARK(BM_GreedyForward)->Args({4, 8, 32})->Args({8, 16, 64});

void BM_TrainStep(benchmark::State& state) {
  auto spec = spec_for(static_cast<int>(state.range(0)), static_cast<int>(state.range(1)),
                       static_cast<int>(state.range(2)));
  qnet::TrainingConfig cfg;
  cfg.batch_size = static_cast<int>(state.range(3));
  cfg.min_replay = 64;
  qnet::DqnLearner learner(spec, cfg, 5);
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> pix(0, 255);
  std::vector<float> obs(spec.input_size()), next(spec.input_size());
  for (int i = 0; i < 64; ++i) {
    for (auto& v : obs) v = static_cast<float>(pix(rng)) / 255.0f;
    for (auto& v : next) v = static_cast<float>(pix(rng)) / 255.0f;
    learner.replay().push({qnet::pack_observation(obs), i % 4, -0.0005f, qnet::pack_observation(next), false});
  }
  qnet::ConfidenceTracker tracker;
  for (auto _ : state) {
    benchmark::DoNotOptimize(qnet::train_step(learner.replay(), learner.online(), learner.target(),
                                              learner.adam(), cfg, tracker, rng));
  }
}
BENCHMARK(BM_TrainStep)->Args({4, 8, 32, 16})->Args({8, 16, 64, 32})->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
