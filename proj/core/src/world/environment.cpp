#include "advicelab/world/environment.hpp"

#include <string>

namespace advicelab::world {

std::string_view to_string(Action action) {
  switch (action) {
    case Action::kForward: return "forward";
    case Action::kTurnLeft: return "turn_left";
    case Action::kTurnRight: return "turn_right";
    case Action::kTurnAround: return "turn_around";
  }
  return "?";
}

std::optional<Action> action_from_string(std::string_view text) {
  for (Action a : kAllActions) {
    if (to_string(a) == text) return a;
  }
  return std::nullopt;
}

Action action_from_index(int index) {
  if (index < 0 || index >= kNumActions) {
    throw std::out_of_range("action index out of range: " + std::to_string(index));
  }
  return static_cast<Action>(index);
}

double expected_score(bool goal, bool entry, bool exit, long steps) {
  return kGoalBonus * goal + kMilestoneBonus * entry + kMilestoneBonus * exit +
         kStepCost * static_cast<double>(steps);
}

Environment::Environment(std::shared_ptr<const GridMap> map, EpisodeConfig cfg)
    : map_(std::move(map)), cfg_(cfg) {
  if (!map_) throw std::invalid_argument("environment requires a map");
  if (cfg_.max_actions <= 0) throw std::invalid_argument("max_actions must be positive");
  reset();
}

AgentPose Environment::reset() {
  pose_ = map_->spawn();
  steps_ = 0;
  score_ = 0.0;
  terminal_ = false;
  goal_reached_ = false;
  entry_fired_ = false;
  exit_fired_ = false;
  return pose_;
}

StepOutcome Environment::step(Action action) {
  if (terminal_) throw EpisodeTerminated("step called on a terminated episode");

  StepOutcome out;
  out.reward = kStepCost;
  switch (action) {
    case Action::kTurnLeft: pose_.heading = turn_left(pose_.heading); break;
    case Action::kTurnRight: pose_.heading = turn_right(pose_.heading); break;
    case Action::kTurnAround: pose_.heading = turn_around(pose_.heading); break;
    case Action::kForward: {
      Cell d = heading_delta(pose_.heading);
      int nx = pose_.x + d.x;
      int ny = pose_.y + d.y;
      if (!map_->traversable(nx, ny)) break;  // blocked: pose unchanged, cost still paid
      int before = map_->progress(pose_.x, pose_.y);
      int after = map_->progress(nx, ny);
      pose_.x = nx;
      pose_.y = ny;
      if (!entry_fired_ && before < map_->milestone_entry() && after >= map_->milestone_entry()) {
        entry_fired_ = true;
        out.reward += kMilestoneBonus;
        out.milestone_fired = Milestone::kEntry;
      }
      if (!exit_fired_ && before < map_->milestone_exit() && after >= map_->milestone_exit()) {
        exit_fired_ = true;
        out.reward += kMilestoneBonus;
        out.milestone_fired = Milestone::kExit;
      }
      if (map_->goal() == pose_.cell()) {
        goal_reached_ = true;
        out.reward += kGoalBonus;
        out.milestone_fired = Milestone::kGoal;
      }
      break;
    }
  }
  ++steps_;
  score_ += out.reward;
  terminal_ = goal_reached_ || steps_ >= cfg_.max_actions;
  out.new_pose = pose_;
  out.terminal = terminal_;
  return out;
}

}  // namespace advicelab::world
