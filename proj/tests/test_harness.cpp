#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "advicelab/harness/experiment.hpp"
#include "advicelab/harness/output.hpp"
#include "advicelab/qnet/checkpoint.hpp"
#include "test_support.hpp"

using namespace advicelab;
using namespace advicelab::harness;
namespace fs = std::filesystem;

namespace {

ExperimentConfig tiny_config(agents::AgentKind kind, oracle::Condition cond, const std::string& out) {
  ExperimentConfig cfg;
  cfg.agent = kind;
  cfg.condition = cond;
  cfg.map_path = test_support::map_path("desk12.map");
  cfg.episodes = 3;
  cfg.sessions = 2;
  cfg.base_seed = 17;
  cfg.output_dir = out;
  cfg.camera.width = cfg.camera.height = 16;
  cfg.network.frames = 2;
  cfg.network.width = cfg.network.height = 16;
  cfg.network.conv_channels = {2};
  cfg.network.dense_widths = {8};
  cfg.training.batch_size = 8;
  cfg.training.min_replay = 32;
  cfg.training.train_every = 4;
  cfg.max_actions = 120;
  return cfg;
}

fs::path scratch_dir(const std::string& name) {
  auto p = fs::temp_directory_path() / ("advicelab_" + name);
  fs::remove_all(p);
  return p;
}

}  // namespace

TEST(Metrics, MovingAverage) {
  std::vector<double> xs = {1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  auto ma = moving_average(xs, 10);
  EXPECT_DOUBLE_EQ(ma.back(), 5.5);
  EXPECT_DOUBLE_EQ(ma[0], 1.0);
  EXPECT_DOUBLE_EQ(ma[1], 1.5);
  EXPECT_DOUBLE_EQ(moving_average(xs, 2)[9], 9.5);
  EXPECT_THROW(moving_average(std::vector<double>{}, 3), std::invalid_argument);
}

TEST(Metrics, KlDivergenceSmoothed) {
  std::vector<std::int64_t> p = {5, 5}, q = {9, 1};
  // Add-one smoothing: (6, 6)/12 against (10, 2)/12.
  const double pq = 0.5 * std::log(0.5 / (10.0 / 12)) + 0.5 * std::log(0.5 / (2.0 / 12));
  const double qp = (10.0 / 12) * std::log((10.0 / 12) / 0.5) + (2.0 / 12) * std::log((2.0 / 12) / 0.5);
  EXPECT_NEAR(kl_divergence(p, q), pq, 1e-12);
  EXPECT_NEAR(kl_divergence(p, q), 0.2939, 1e-4);
  EXPECT_NEAR(kl_divergence(q, p), qp, 1e-12);
  EXPECT_NE(kl_divergence(p, q), kl_divergence(q, p));
  EXPECT_EQ(kl_divergence(q, q), 0.0);

  VisitHeatmap a(2, 1), b(3, 1);
  EXPECT_THROW(kl_divergence(a, b), HeatmapMismatch);
}

TEST(Metrics, CorridorSecondHalf) {
  auto m = world::load_map_file(test_support::map_path("desk12.map"));
  // entry 4, exit 9: the second half is x in [7, 9)
  VisitHeatmap h(m.width(), m.height());
  h.add({7, 5}, 3);
  h.add({8, 5}, 1);
  h.add({9, 5}, 2);
  h.add({1, 5}, 4);
  EXPECT_DOUBLE_EQ(corridor_second_half_mass(h, m), 0.4);
}

TEST(Metrics, StableGoalAndReconvergence) {
  std::vector<EpisodeRecord> r(8);
  for (int i : {1, 3, 4, 5, 6}) r[i].reached_goal = true;
  EXPECT_EQ(episodes_to_stable_goal(r, 3), 6);
  EXPECT_EQ(episodes_to_stable_goal(std::span(r).first(5), 3), std::nullopt);

  std::vector<double> scores(30, 0.0);
  for (int i = 10; i < 30; ++i) scores[i] = 100.0;
  // The trailing mean sits at exactly 90 after nine hits and passes it on the tenth.
  EXPECT_EQ(reconvergence_episode(scores, 100.0), 20);
  std::vector<double> low(20, -600.0);
  EXPECT_EQ(reconvergence_episode(low, -500.0), std::nullopt);
  EXPECT_EQ(reconvergence_episode(low, -600.0), 1);
}

TEST(Metrics, Statistics) {
  std::vector<double> xs = {2, 4, 4, 4, 5, 5, 7, 9};
  EXPECT_DOUBLE_EQ(mean(xs), 5.0);
  EXPECT_NEAR(stddev(xs), std::sqrt(32.0 / 7.0), 1e-12);
  EXPECT_DOUBLE_EQ(median({3, 1, 2}), 2.0);
  EXPECT_DOUBLE_EQ(median({4, 1, 2, 3}), 2.5);
}

TEST(Caps, PerAgentDefaults) {
  EXPECT_EQ(default_max_actions(agents::AgentKind::kBaseline), 1500);
  EXPECT_EQ(default_max_actions(agents::AgentKind::kFeedbackArbitration), 1000);
  EXPECT_EQ(default_max_actions(agents::AgentKind::kNewtonian), 1000);
}

TEST(ScriptedAgent, WalksTheShortestPath) {
  auto m = std::make_shared<world::GridMap>(world::load_map_file(test_support::map_path("town20.map")));
  ScriptedOptimalAgent agent(*m);
  world::Environment env(m, {1000, 0});
  int forwards = 0;
  while (!env.terminal()) {
    auto a = agent.act({}, env.pose(), env.steps()).action;
    forwards += a == world::Action::kForward;
    env.step(a);
  }
  ASSERT_TRUE(env.reached_goal());
  EXPECT_EQ(forwards, world::shortest_path_length(*m, m->spawn().cell(), m->goal()));
  EXPECT_DOUBLE_EQ(env.score(), 18000.0 - 0.5 * env.steps());
}

TEST(Session, RecordsObeyAccounting) {
  auto m = std::make_shared<world::GridMap>(world::load_map_file(test_support::map_path("desk12.map")));
  ScriptedOptimalAgent agent(*m);
  agents::PendingAdviceQueue q;
  SessionSetup setup;
  setup.map = m;
  setup.episodes = 2;
  setup.oracle = oracle::preset(oracle::Condition::kHfha, 3);
  auto result = run_session(setup, agent, q);
  ASSERT_EQ(result.records.size(), 2u);
  for (const auto& r : result.records) {
    EXPECT_TRUE(r.reached_goal);
    EXPECT_DOUBLE_EQ(r.score, 18000.0 - 0.5 * r.steps);
    EXPECT_LE(r.advice_used, r.advice_offered);
  }
  EXPECT_EQ(result.heatmap.total(), result.global_steps);
}

TEST(Output, RecordsCsvRoundTrip) {
  std::vector<EpisodeRecord> recs = {{0, 0, -500.0, 1000, 3, 1, false}, {0, 1, 17899.5, 201, 9, 9, true}};
  auto text = format_records_csv(recs);
  EXPECT_EQ(text.substr(0, text.find('\n')), kRecordsHeader);
  EXPECT_EQ(parse_records_csv(text), recs);
  EXPECT_THROW(parse_records_csv("nope\n"), std::invalid_argument);
}

TEST(Output, HeatmapCsvRoundTrip) {
  VisitHeatmap h(3, 2);
  h.add({0, 0}, 4);
  h.add({2, 1}, 7);
  EXPECT_EQ(format_heatmap_csv(h), "4,0,0\n0,0,7\n");
  EXPECT_EQ(parse_heatmap_csv(format_heatmap_csv(h)), h);
}

TEST(Output, MissingFileNamesThePath) {
  try {
    read_text_file("/nonexistent/advicelab/file.csv");
    FAIL();
  } catch (const OutputError& e) {
    EXPECT_EQ(e.path(), "/nonexistent/advicelab/file.csv");
  }
}

TEST(Experiment, DeterministicOutputs) {
  auto a = scratch_dir("det_a"), b = scratch_dir("det_b");
  run_experiment(tiny_config(agents::AgentKind::kNewtonian, oracle::Condition::kHfha, a.string()));
  run_experiment(tiny_config(agents::AgentKind::kNewtonian, oracle::Condition::kHfha, b.string()));
  for (const char* f : {"naa_hfha_session0.csv", "naa_hfha_session1.csv", "naa_hfha_heatmap.csv",
                        "naa_hfha_summary.json"}) {
    EXPECT_EQ(read_text_file((a / f).string()), read_text_file((b / f).string())) << f;
  }
  fs::remove_all(a);
  fs::remove_all(b);
}

TEST(Experiment, ConfigValidation) {
  auto cfg = tiny_config(agents::AgentKind::kBaseline, oracle::Condition::kNone, "");
  cfg.camera.width = 20;
  EXPECT_THROW(cfg.validate(), std::invalid_argument);
  cfg = tiny_config(agents::AgentKind::kBaseline, oracle::Condition::kNone, "");
  EXPECT_EQ(cfg.stem(), "baseline_none");
  cfg.max_actions.reset();
  EXPECT_EQ(cfg.action_cap(), 1500);
}

TEST(Experiment, TransferNeedsACheckpoint) {
  auto cfg = tiny_config(agents::AgentKind::kNewtonian, oracle::Condition::kHfha, "");
  EXPECT_THROW(transfer_experiment(cfg, "/nonexistent/ckpt.json", 0.0), OutputError);
}

TEST(Experiment, TransferRunsOnTheRotatedMap) {
  auto dir = scratch_dir("transfer");
  auto cfg = tiny_config(agents::AgentKind::kNewtonian, oracle::Condition::kHfha, dir.string());
  cfg.sessions = 1;
  fs::create_directories(dir);
  const std::string ckpt = (dir / "naa.ckpt").string();
  run_experiment(cfg, nullptr, [&](int, agents::DqnAgent& agent, const SessionResult&) {
    qnet::save_checkpoint(agent.learner(), ckpt);
  });
  auto t = transfer_experiment(cfg, ckpt, 1000.0);
  EXPECT_EQ(t.records.size(), 3u);
  EXPECT_EQ(t.heatmap.width(), 12);
  EXPECT_DOUBLE_EQ(t.reference_score, 1000.0);
  fs::remove_all(dir);
}
