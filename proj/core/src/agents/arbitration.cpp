#include "advicelab/agents/arbitration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace advicelab::agents {

std::string_view to_string(AgentKind kind) {
  switch (kind) {
    case AgentKind::kBaseline: return "baseline";
    case AgentKind::kFeedbackArbitration: return "fa";
    case AgentKind::kNewtonian: return "naa";
  }
  return "?";
}

std::optional<AgentKind> agent_kind_from_string(std::string_view text) {
  if (text == "baseline") return AgentKind::kBaseline;
  if (text == "fa") return AgentKind::kFeedbackArbitration;
  if (text == "naa") return AgentKind::kNewtonian;
  return std::nullopt;
}

void ArbitrationConfig::validate() const {
  if (!(cost_threshold > 0.0 && cost_threshold < 1.0)) {
    throw std::invalid_argument("cost threshold must lie in (0, 1)");
  }
  if (friction < 0) throw std::invalid_argument("friction must be non-negative");
  if (queue_capacity == 0) throw std::invalid_argument("advice queue capacity must be positive");
  if (ttl_steps < 0) throw std::invalid_argument("advice ttl must be non-negative");
}

double relative_cost(double min_loss, double max_loss) {
  if (!(max_loss > 0.0)) return 1.0;
  double ratio = std::clamp(min_loss / max_loss, 1e-12, 1.0);
  return -1.0 / (std::log(std::sqrt(ratio)) - 1.0);
}

double relative_cost(const qnet::ConfidenceTracker& tracker) {
  return relative_cost(tracker.min_loss(), tracker.max_loss());
}

namespace {

// Shared exploration draw; returns the random action when exploring.
std::optional<world::Action> explore(std::mt19937_64& rng, double epsilon) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (coin(rng) < epsilon) {
    std::uniform_int_distribution<int> pick(0, world::kNumActions - 1);
    return world::action_from_index(pick(rng));
  }
  return std::nullopt;
}

Decision policy(const GreedyFn& greedy) {
  return {world::action_from_index(greedy()), false, DecisionSource::kPolicy};
}

}  // namespace

world::Action choose_action_baseline(const GreedyFn& greedy, std::mt19937_64& rng, double epsilon) {
  if (auto a = explore(rng, epsilon)) return *a;
  return world::action_from_index(greedy());
}

Decision fa_choose_action(const GreedyFn& greedy, const qnet::ConfidenceTracker& tracker,
                          PendingAdviceQueue& queue, world::Heading heading, long now,
                          std::mt19937_64& rng, double epsilon, const ArbitrationConfig& cfg) {
  if (auto a = explore(rng, epsilon)) return {*a, false, DecisionSource::kExplore};
  if (relative_cost(tracker) <= cfg.cost_threshold) return policy(greedy);
  if (auto advice = queue.pop(now)) {
    return {cardinal_to_action(heading, advice->direction), true, DecisionSource::kAdviceConsumed};
  }
  return policy(greedy);
}

Decision naa_choose_action(const GreedyFn& greedy, const qnet::ConfidenceTracker& tracker,
                           PendingAdviceQueue& queue, std::optional<ActiveAdvice>& active,
                           world::Heading heading, long now, std::mt19937_64& rng, double epsilon,
                           const ArbitrationConfig& cfg) {
  if (auto a = explore(rng, epsilon)) return {*a, false, DecisionSource::kExplore};
  if (relative_cost(tracker) <= cfg.cost_threshold) return policy(greedy);
  if (auto advice = queue.pop(now)) {
    active = ActiveAdvice{advice->direction, cfg.friction};
    if (active->remaining_forward_steps == 0) active.reset();
    return {cardinal_to_action(heading, advice->direction), true, DecisionSource::kAdviceConsumed};
  }
  if (active && active->remaining_forward_steps > 0) {
    world::Action a = cardinal_to_action(heading, active->direction);
    if (a == world::Action::kForward && --active->remaining_forward_steps == 0) active.reset();
    return {a, true, DecisionSource::kAdviceRecital};
  }
  return policy(greedy);
}

}  // namespace advicelab::agents
