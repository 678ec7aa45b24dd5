#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string_view>

#include "advicelab/world/grid_map.hpp"

namespace advicelab::world {

// Index <-> action mapping is part of the network output contract:
// 0 forward, 1 turn_left, 2 turn_right, 3 turn_around.
enum class Action : std::uint8_t { kForward = 0, kTurnLeft = 1, kTurnRight = 2, kTurnAround = 3 };

inline constexpr int kNumActions = 4;
inline constexpr std::array<Action, kNumActions> kAllActions = {
    Action::kForward, Action::kTurnLeft, Action::kTurnRight, Action::kTurnAround};

std::string_view to_string(Action action);
std::optional<Action> action_from_string(std::string_view text);
inline int action_index(Action a) { return static_cast<int>(a); }
Action action_from_index(int index);

enum class Milestone : std::uint8_t { kEntry, kExit, kGoal };

inline constexpr double kStepCost = -0.5;
inline constexpr double kMilestoneBonus = 1500.0;
inline constexpr double kGoalBonus = 15000.0;

struct StepOutcome {
  double reward = 0.0;
  AgentPose new_pose;
  bool terminal = false;
  std::optional<Milestone> milestone_fired;
};

struct EpisodeConfig {
  int max_actions = 1000;
  std::uint64_t seed = 0;
};

class EpisodeTerminated : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Score implied by the reward accounting identity.
double expected_score(bool goal, bool entry, bool exit, long steps);

// Single episode state machine over a shared immutable map.
class Environment {
 public:
  Environment(std::shared_ptr<const GridMap> map, EpisodeConfig cfg);

  AgentPose reset();
  StepOutcome step(Action action);

  const GridMap& map() const { return *map_; }
  std::shared_ptr<const GridMap> shared_map() const { return map_; }
  const EpisodeConfig& config() const { return cfg_; }
  const AgentPose& pose() const { return pose_; }
  int steps() const { return steps_; }
  double score() const { return score_; }
  bool terminal() const { return terminal_; }
  bool reached_goal() const { return goal_reached_; }
  bool entry_fired() const { return entry_fired_; }
  bool exit_fired() const { return exit_fired_; }

 private:
  std::shared_ptr<const GridMap> map_;
  EpisodeConfig cfg_;
  AgentPose pose_;
  int steps_ = 0;
  double score_ = 0.0;
  bool terminal_ = false;
  bool goal_reached_ = false;
  bool entry_fired_ = false;
  bool exit_fired_ = false;
};

}  // namespace advicelab::world
