#include <gtest/gtest.h>

#include <deque>
#include <random>

#include "advicelab/world/environment.hpp"
#include "test_support.hpp"

using namespace advicelab;
using world::Action;
using world::Heading;

namespace {

// Plain BFS written independently of the library one.
int reference_bfs(const std::vector<std::string>& rows, int sx, int sy, int gx, int gy) {
  const int h = static_cast<int>(rows.size()), w = static_cast<int>(rows[0].size());
  std::vector<int> dist(w * h, -1);
  std::deque<std::pair<int, int>> q{{sx, sy}};
  dist[sy * w + sx] = 0;
  while (!q.empty()) {
    auto [x, y] = q.front();
    q.pop_front();
    if (x == gx && y == gy) return dist[y * w + x];
    const int dx[] = {0, 1, 0, -1}, dy[] = {-1, 0, 1, 0};
    for (int k = 0; k < 4; ++k) {
      int nx = x + dx[k], ny = y + dy[k];
      char c = rows[ny][nx];
      if ((c == '.' || c == 'S' || c == 'N') && dist[ny * w + nx] < 0) {
        dist[ny * w + nx] = dist[y * w + x] + 1;
        q.emplace_back(nx, ny);
      }
    }
  }
  return -1;
}

const char* kTiny =
    "width=4\nheight=4\nmilestone_entry_x=1\nmilestone_exit_x=2\n"
    "####\n"
    "#SN#\n"
    "#..#\n"
    "####\n";

// Corridor along x with milestones at 3 and 5.
const char* kLine =
    "width=9\nheight=4\nmilestone_entry_x=3\nmilestone_exit_x=5\n"
    "#########\n"
    "#S.....N#\n"
    "#HHHHHHH#\n"
    "#########\n";

}  // namespace

TEST(GridMap, LoadsMinimalMap) {
  auto m = world::load_map(kTiny);
  EXPECT_EQ(m.width(), 4);
  EXPECT_EQ(m.height(), 4);
  EXPECT_EQ(m.spawn(), (world::AgentPose{1, 1, Heading::kEast}));
  EXPECT_EQ(m.goal(), (world::Cell{2, 1}));
  EXPECT_EQ(m.traversable_count(), 4);
}

TEST(GridMap, TownMapIs20By20) {
  auto m = world::load_map_file(test_support::map_path("town20.map"));
  EXPECT_EQ(m.width(), 20);
  EXPECT_EQ(m.height(), 20);
}

TEST(GridMap, WalledOffGoalIsRejected) {
  const char* text =
      "width=5\nheight=5\nmilestone_entry_x=1\nmilestone_exit_x=2\n"
      "#####\n"
      "#S#.#\n"
      "#.#N#\n"
      "#.#.#\n"
      "#####\n";
  try {
    world::load_map(text);
    FAIL() << "expected a validation error";
  } catch (const world::MapValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("goal unreachable"), std::string::npos);
  }
}

TEST(GridMap, ParseErrorsCarryPosition) {
  const char* text =
      "width=4\nheight=4\nmilestone_entry_x=1\nmilestone_exit_x=2\n"
      "####\n"
      "#SX#\n"
      "#.N#\n"
      "####\n";
  try {
    world::load_map(text);
    FAIL() << "expected a parse error";
  } catch (const world::MapParseError& e) {
    EXPECT_EQ(e.line(), 6);
    EXPECT_EQ(e.column(), 3);
  }
  EXPECT_THROW(world::load_map("width=4\n"), world::MapParseError);
}

TEST(GridMap, ShortestPathMatchesReferenceBfs) {
  auto m = world::load_map_file(test_support::map_path("town20.map"));
  auto rows = test_support::grid_rows(m);
  const int expected = reference_bfs(rows, m.spawn().x, m.spawn().y, m.goal().x, m.goal().y);
  ASSERT_GT(expected, 0);
  EXPECT_EQ(world::shortest_path_length(m, m.spawn().cell(), m.goal()), expected);
  EXPECT_EQ(world::shortest_path_length(m, m.spawn().cell(), m.spawn().cell()), 0);
  EXPECT_EQ(world::shortest_path_length(m, {1, 1}, {2, 1}), 1);
}

TEST(GridMap, RotationAlgebra) {
  auto m = world::load_map_file(test_support::map_path("town20.map"));
  auto r = world::rotate_map_90(m);
  EXPECT_EQ(r.width(), m.height());
  EXPECT_EQ(r.height(), m.width());
  // (x, y) -> (height - 1 - y, x)
  for (int y = 0; y < m.height(); ++y) {
    for (int x = 0; x < m.width(); ++x) EXPECT_EQ(r.at(m.height() - 1 - y, x), m.at(x, y));
  }
  EXPECT_EQ(r.spawn().heading, Heading::kSouth);
  EXPECT_EQ(r.traversable_count(), m.traversable_count());
  EXPECT_EQ(world::shortest_path_length(r, r.spawn().cell(), r.goal()),
            world::shortest_path_length(m, m.spawn().cell(), m.goal()));

  auto full = world::rotate_map_90(world::rotate_map_90(world::rotate_map_90(r)));
  EXPECT_EQ(full, m);
}

TEST(GridMap, RotatedMilestonesFollowTheCorridor) {
  auto m = world::load_map(kLine);
  auto r = world::rotate_map_90(m);
  // The corridor now runs down the y axis; walking it still fires both bonuses.
  world::Environment env(std::make_shared<world::GridMap>(r), {100, 0});
  double total = 0.0;
  while (!env.terminal()) total += env.step(Action::kForward).reward;
  EXPECT_TRUE(env.entry_fired());
  EXPECT_TRUE(env.exit_fired());
  EXPECT_TRUE(env.reached_goal());
  EXPECT_DOUBLE_EQ(total, 18000.0 - 0.5 * 6);
}

TEST(Environment, BlockedForwardCostsAStep) {
  auto m = std::make_shared<world::GridMap>(world::load_map(kTiny));
  world::Environment env(m, {10, 0});
  env.step(Action::kTurnLeft);  // face north, into the wall
  auto out = env.step(Action::kForward);
  EXPECT_EQ(out.new_pose, (world::AgentPose{1, 1, Heading::kNorth}));
  EXPECT_DOUBLE_EQ(out.reward, -0.5);
}

TEST(Environment, MilestonesFireOnce) {
  auto m = std::make_shared<world::GridMap>(world::load_map(kLine));
  world::Environment env(m, {100, 0});
  env.step(Action::kForward);                                  // x=2
  EXPECT_DOUBLE_EQ(env.step(Action::kForward).reward, 1499.5);  // x=3
  env.step(Action::kTurnAround);
  env.step(Action::kForward);  // back to 2
  env.step(Action::kTurnAround);
  EXPECT_DOUBLE_EQ(env.step(Action::kForward).reward, -0.5);  // re-cross: no bonus
  EXPECT_DOUBLE_EQ(env.step(Action::kForward).reward, -0.5);  // x=4
  EXPECT_DOUBLE_EQ(env.step(Action::kForward).reward, 1499.5);  // x=5
}

TEST(Environment, TurnAroundTwiceRestoresHeading) {
  auto m = std::make_shared<world::GridMap>(world::load_map(kTiny));
  world::Environment env(m, {10, 0});
  double r = env.step(Action::kTurnAround).reward + env.step(Action::kTurnAround).reward;
  EXPECT_EQ(env.pose().heading, Heading::kEast);
  EXPECT_DOUBLE_EQ(r, -1.0);
}

TEST(Environment, TerminatesAtCapAndRejectsFurtherSteps) {
  auto m = std::make_shared<world::GridMap>(world::load_map(kTiny));
  world::Environment env(m, {3, 0});
  env.step(Action::kTurnLeft);
  env.step(Action::kTurnLeft);
  EXPECT_FALSE(env.terminal());
  EXPECT_TRUE(env.step(Action::kTurnLeft).terminal);
  EXPECT_THROW(env.step(Action::kForward), world::EpisodeTerminated);
  EXPECT_EQ(env.reset(), m->spawn());
  EXPECT_EQ(env.steps(), 0);
  EXPECT_DOUBLE_EQ(env.score(), 0.0);
}

TEST(Environment, RandomWalkScoresObeyTheIdentity) {
  auto m = std::make_shared<world::GridMap>(world::load_map_file(test_support::map_path("town20.map")));
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> pick(0, 3);
  for (int episode = 0; episode < 50; ++episode) {
    world::Environment env(m, {1500, 0});
    double sum = 0.0;
    while (!env.terminal()) {
      auto out = env.step(world::action_from_index(pick(rng)));
      EXPECT_TRUE(m->traversable(out.new_pose.x, out.new_pose.y));
      sum += out.reward;
    }
    const double expected =
        world::expected_score(env.reached_goal(), env.entry_fired(), env.exit_fired(), env.steps());
    EXPECT_NEAR(env.score(), expected, 1e-9);
    EXPECT_NEAR(sum, expected, 1e-9);
  }
}

TEST(Environment, SameActionsSameTrace) {
  auto m = std::make_shared<world::GridMap>(world::load_map_file(test_support::map_path("desk12.map")));
  auto trace = [&] {
    std::mt19937_64 rng(5);
    std::uniform_int_distribution<int> pick(0, 3);
    world::Environment env(m, {200, 0});
    std::vector<world::AgentPose> poses;
    while (!env.terminal()) poses.push_back(env.step(world::action_from_index(pick(rng))).new_pose);
    return poses;
  };
  EXPECT_EQ(trace(), trace());
}
