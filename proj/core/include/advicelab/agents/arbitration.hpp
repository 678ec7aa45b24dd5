#pragma once

#include <functional>
#include <optional>
#include <random>
#include <string_view>

#include "advicelab/agents/advice.hpp"
#include "advicelab/qnet/trainer.hpp"

namespace advicelab::agents {

enum class AgentKind { kBaseline, kFeedbackArbitration, kNewtonian };

std::string_view to_string(AgentKind kind);
std::optional<AgentKind> agent_kind_from_string(std::string_view text);

struct ArbitrationConfig {
  // The policy is trusted when relative_cost <= cost_threshold.
  double cost_threshold = 0.25;
  // Extra forward steps an NAA agent recites after consuming advice.
  int friction = 2;
  std::size_t queue_capacity = 5;
  long ttl_steps = 20;

  void validate() const;
};

struct ActiveAdvice {
  world::Heading direction = world::Heading::kNorth;
  int remaining_forward_steps = 0;
  friend bool operator==(const ActiveAdvice&, const ActiveAdvice&) = default;
};

enum class DecisionSource { kExplore, kPolicy, kAdviceConsumed, kAdviceRecital };

struct Decision {
  world::Action action = world::Action::kForward;
  bool used_advice = false;
  DecisionSource source = DecisionSource::kPolicy;
};

// Confidence cost 1 / (1 - ln sqrt(min/max)), in (0, 1]. The ratio is
// clamped to [1e-12, 1]; max_loss == 0 means no training signal yet (1.0).
double relative_cost(double min_loss, double max_loss);
double relative_cost(const qnet::ConfidenceTracker& tracker);

// Lazily evaluated greedy action (argmax of the Q-network, lowest index on ties).
using GreedyFn = std::function<int()>;

// Every chooser draws from rng identically: one uniform for the exploration
// test, then one uniform action index only when exploring.
world::Action choose_action_baseline(const GreedyFn& greedy, std::mt19937_64& rng, double epsilon);

Decision fa_choose_action(const GreedyFn& greedy, const qnet::ConfidenceTracker& tracker,
                          PendingAdviceQueue& queue, world::Heading heading, long now,
                          std::mt19937_64& rng, double epsilon, const ArbitrationConfig& cfg);

// As FA, but consumed advice becomes the active advice and is recited for
// `friction` forward steps while confidence stays low. Orientation turns do
// not use up the recital; newly consumed advice replaces the active one.
Decision naa_choose_action(const GreedyFn& greedy, const qnet::ConfidenceTracker& tracker,
                           PendingAdviceQueue& queue, std::optional<ActiveAdvice>& active,
                           world::Heading heading, long now, std::mt19937_64& rng, double epsilon,
                           const ArbitrationConfig& cfg);

}  // namespace advicelab::agents
