#pragma once

#include <memory>
#include <optional>
#include <random>
#include <span>

#include "advicelab/agents/arbitration.hpp"
#include "advicelab/qnet/trainer.hpp"

namespace advicelab::agents {

// Action-selection and learning interface driven by the experiment loop.
class Agent {
 public:
  virtual ~Agent() = default;

  virtual void begin_episode() {}
  virtual Decision act(std::span<const float> obs, const world::AgentPose& pose, long global_step) = 0;
  virtual void learn(std::span<const float> obs, world::Action action, double reward,
                     std::span<const float> next_obs, bool terminal) = 0;
  // True while recited advice is steering the agent.
  virtual bool advice_active() const { return false; }
};

// Baseline DQN, Feedback Arbitration and Newtonian Action Advice share one
// learner; they differ only in how advice enters action selection.
class DqnAgent final : public Agent {
 public:
  DqnAgent(AgentKind kind, qnet::NetworkSpec spec, qnet::TrainingConfig training,
           ArbitrationConfig arbitration, std::uint64_t seed,
           std::shared_ptr<PendingAdviceQueue> queue);

  AgentKind kind() const { return kind_; }
  qnet::DqnLearner& learner() { return learner_; }
  const qnet::DqnLearner& learner() const { return learner_; }
  PendingAdviceQueue& queue() { return *queue_; }
  const std::optional<ActiveAdvice>& active_advice() const { return active_; }
  double epsilon(long global_step) const;

  void begin_episode() override;
  Decision act(std::span<const float> obs, const world::AgentPose& pose, long global_step) override;
  void learn(std::span<const float> obs, world::Action action, double reward,
             std::span<const float> next_obs, bool terminal) override;
  bool advice_active() const override { return active_.has_value(); }

 private:
  AgentKind kind_;
  qnet::DqnLearner learner_;
  ArbitrationConfig arbitration_;
  std::mt19937_64 rng_;
  std::shared_ptr<PendingAdviceQueue> queue_;
  std::optional<ActiveAdvice> active_;
};

}  // namespace advicelab::agents
