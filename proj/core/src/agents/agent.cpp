#include "advicelab/agents/agent.hpp"

namespace advicelab::agents {

DqnAgent::DqnAgent(AgentKind kind, qnet::NetworkSpec spec, qnet::TrainingConfig training,
                   ArbitrationConfig arbitration, std::uint64_t seed,
                   std::shared_ptr<PendingAdviceQueue> queue)
    : kind_(kind),
      learner_(std::move(spec), std::move(training), seed),
      arbitration_(arbitration),
      // Distinct stream from the learner's replay sampling.
      rng_(seed ^ 0x9e3779b97f4a7c15ull),
      queue_(std::move(queue)) {
  arbitration_.validate();
  if (!queue_) {
    queue_ = std::make_shared<PendingAdviceQueue>(arbitration_.queue_capacity, arbitration_.ttl_steps);
  }
}

double DqnAgent::epsilon(long global_step) const {
  return learner_.config().exploration.epsilon(global_step);
}

void DqnAgent::begin_episode() {
  active_.reset();
  queue_->clear();
}

Decision DqnAgent::act(std::span<const float> obs, const world::AgentPose& pose, long global_step) {
  const GreedyFn greedy = [&] { return learner_.greedy_action(obs); };
  const double eps = epsilon(global_step);
  switch (kind_) {
    case AgentKind::kBaseline:
      return {choose_action_baseline(greedy, rng_, eps), false, DecisionSource::kPolicy};
    case AgentKind::kFeedbackArbitration:
      return fa_choose_action(greedy, learner_.tracker(), *queue_, pose.heading, global_step, rng_,
                              eps, arbitration_);
    case AgentKind::kNewtonian:
      return naa_choose_action(greedy, learner_.tracker(), *queue_, active_, pose.heading,
                               global_step, rng_, eps, arbitration_);
  }
  return {};
}

void DqnAgent::learn(std::span<const float> obs, world::Action action, double reward,
                     std::span<const float> next_obs, bool terminal) {
  learner_.observe(obs, world::action_index(action), reward, next_obs, terminal);
}

}  // namespace advicelab::agents
