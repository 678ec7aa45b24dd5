#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>

#include "advicelab/render/raycaster.hpp"
#include "test_support.hpp"

using namespace advicelab;
using render::AliasingMode;
using render::TexturePalette;
using world::Heading;

namespace {

const char* kTiny =
    "width=4\nheight=4\nmilestone_entry_x=1\nmilestone_exit_x=2\n"
    "####\n"
    "#SN#\n"
    "#..#\n"
    "####\n";

world::GridMap town() { return world::load_map_file(test_support::map_path("town20.map")); }

}  // namespace

TEST(Render, AdjacentWallFillsTheFrame) {
  auto m = world::load_map(kTiny);
  TexturePalette pal(AliasingMode::kAliased);
  auto f = render::render(m, {1, 1, Heading::kNorth}, pal);
  auto [lo, hi] = pal.band(world::CellKind::kPerimeterWall, 0.5);
  int inside = 0;
  for (float v : f.pixels()) inside += (v >= lo - 1e-6f && v <= hi + 1e-6f);
  EXPECT_GE(inside, static_cast<int>(0.9 * f.pixels().size()));
}

TEST(Render, PureFunctionOfInputs) {
  auto m = town();
  TexturePalette pal(AliasingMode::kLandmarked);
  const world::AgentPose pose{3, 9, Heading::kEast};
  EXPECT_EQ(render::render(m, pose, pal), render::render(m, pose, pal));
  const auto frame = render::render(m, pose, pal);
  for (float v : frame.pixels()) {
    EXPECT_GE(v, 0.0f);
    EXPECT_LE(v, 1.0f);
    EXPECT_FLOAT_EQ(v * 255.0f, std::round(v * 255.0f));
  }
}

TEST(Render, AliasedCorridorPosesLookAlike) {
  auto m = town();
  TexturePalette pal(AliasingMode::kAliased);
  auto a = render::render(m, {8, 9, Heading::kNorth}, pal);
  auto b = render::render(m, {10, 9, Heading::kNorth}, pal);
  EXPECT_LT(render::mean_abs_difference(a, b), render::kAliasingThreshold);
}

TEST(Render, SliceHeightShrinksWithDistance) {
  double prev = render::wall_slice_height(0.1, 32);
  for (double d = 0.2; d < 20.0; d += 0.1) {
    double h = render::wall_slice_height(d, 32);
    EXPECT_LE(h, prev);
    prev = h;
  }
}

TEST(Render, LandmarksGetTheirOwnBands) {
  TexturePalette aliased(AliasingMode::kAliased), landmarked(AliasingMode::kLandmarked);
  using world::CellKind;
  for (CellKind k : {CellKind::kHedge, CellKind::kBuildingRed, CellKind::kBuildingGreen,
                     CellKind::kBuildingBlue, CellKind::kGoalNpc}) {
    EXPECT_EQ(aliased.band(k, 1.0), aliased.band(CellKind::kPerimeterWall, 1.0));
  }
  std::vector<std::pair<float, float>> bands;
  for (CellKind k : {CellKind::kPerimeterWall, CellKind::kBuildingRed, CellKind::kBuildingGreen,
                     CellKind::kBuildingBlue, CellKind::kGoalNpc}) {
    bands.push_back(landmarked.band(k, 1.0));
  }
  for (std::size_t i = 0; i < bands.size(); ++i) {
    for (std::size_t j = i + 1; j < bands.size(); ++j) {
      const bool disjoint = bands[i].second < bands[j].first || bands[j].second < bands[i].first;
      EXPECT_TRUE(disjoint) << i << " vs " << j;
    }
  }
}

TEST(FrameStack, PaddingAndEviction) {
  render::Frame f1(2, 2, 0.1f), f2(2, 2, 0.2f), f3(2, 2, 0.3f);
  render::FrameStack one(3, 2, 2);
  auto obs = one.push_and_stack(f1);
  ASSERT_EQ(obs.size(), 12u);
  for (float v : obs) EXPECT_FLOAT_EQ(v, 0.1f);

  render::FrameStack two(2, 2, 2);
  two.push_and_stack(f1);
  two.push_and_stack(f2);
  obs = two.push_and_stack(f3);
  EXPECT_EQ(two.size(), 2);
  EXPECT_FLOAT_EQ(obs[0], 0.3f);
  EXPECT_FLOAT_EQ(obs[4], 0.2f);

  EXPECT_THROW(two.push_and_stack(render::Frame(3, 2)), render::DimensionMismatch);
}

TEST(AliasingIndex, MatchesBruteForceOnTinyMap) {
  auto m = world::load_map(kTiny);
  TexturePalette pal(AliasingMode::kAliased);
  std::vector<world::AgentPose> states;
  for (auto [x, y] : {std::pair{1, 1}, {1, 2}, {2, 2}}) {
    for (Heading h : world::kAllHeadings) states.push_back({x, y, h});
  }
  int similar = 0, pairs = 0;
  for (std::size_t i = 0; i < states.size(); ++i) {
    for (std::size_t j = 0; j < states.size(); ++j) {
      if (i == j) continue;
      const auto fa = render::render(m, states[i], pal), fb = render::render(m, states[j], pal);
      auto a = fa.pixels();
      auto b = fb.pixels();
      double sum = 0.0;
      for (std::size_t k = 0; k < a.size(); ++k) sum += std::abs(a[k] - b[k]);
      similar += sum / a.size() < 0.02;
      ++pairs;
    }
  }
  EXPECT_EQ(render::enumerate_states(m).size(), states.size());
  EXPECT_DOUBLE_EQ(render::aliasing_index(m, pal), static_cast<double>(similar) / pairs);
}

TEST(AliasingIndex, IdenticalViewsGiveOne) {
  auto m = world::load_map(kTiny);
  TexturePalette pal(AliasingMode::kAliased);
  std::vector<world::AgentPose> same = {{1, 2, Heading::kWest}, {1, 2, Heading::kWest}};
  EXPECT_DOUBLE_EQ(render::aliasing_index(m, pal, same), 1.0);
}

TEST(AliasingIndex, LandmarksReduceAliasingOnDeskMap) {
  auto m = world::load_map_file(test_support::map_path("desk12.map"));
  EXPECT_GT(render::aliasing_index(m, TexturePalette(AliasingMode::kAliased)),
            render::aliasing_index(m, TexturePalette(AliasingMode::kLandmarked)));
}

TEST(Pgm, RoundTrip) {
  auto f = render::render(town(), {2, 9, Heading::kEast}, TexturePalette());
  auto path = (std::filesystem::temp_directory_path() / "advicelab_render_test.pgm").string();
  render::write_pgm(f, path);
  EXPECT_EQ(render::read_pgm(path), f);
  std::filesystem::remove(path);
}
