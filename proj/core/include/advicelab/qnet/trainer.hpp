#pragma once

#include <array>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "advicelab/qnet/adam.hpp"
#include "advicelab/qnet/loss.hpp"
#include "advicelab/qnet/network.hpp"
#include "advicelab/qnet/replay.hpp"

namespace advicelab::qnet {

// Linear epsilon decay over global environment steps.
struct ExplorationSchedule {
  double start = 1.0;
  double end = 0.05;
  long decay_steps = 20000;

  double epsilon(long step) const;
};

struct TrainingConfig {
  AdamConfig adam;
  double gamma = 0.95;
  int batch_size = 32;
  std::size_t replay_capacity = 10000;
  std::size_t min_replay = 500;
  // Target network sync period in train steps; 0 bootstraps from the online network.
  int target_sync = 500;
  // Environment steps between train steps.
  int train_every = 1;
  ExplorationSchedule exploration;
  double reward_scale = 1000.0;
  LossConfig loss;

  // Throws std::invalid_argument when an invariant is violated.
  void validate() const;
};

// Per-action exponential moving average of sample losses plus the largest
// sample loss seen so far.
class ConfidenceTracker {
 public:
  static constexpr double kDecay = 0.99;

  ConfidenceTracker(int actions = 4);

  void record(int action, double sample_loss);
  // Smallest per-action loss over actions seen so far; max_loss() when none.
  double min_loss() const;
  double max_loss() const { return max_; }
  std::optional<double> action_loss(int action) const { return losses_.at(action); }
  // Restores a saved state; validates L_max >= every L_a >= 0.
  void restore(std::vector<std::optional<double>> losses, double max_loss);
  const std::vector<std::optional<double>>& losses() const { return losses_; }

 private:
  std::vector<std::optional<double>> losses_;
  double max_ = 0.0;
};

// One DQN update on a uniformly sampled batch. Bootstrap values come from
// `target` in inference mode; only the taken-action outputs receive gradient.
double train_step(const ReplayBuffer& buffer, QNetwork<float>& online, const QNetwork<float>& target,
                  AdamState<float>& adam, const TrainingConfig& cfg, ConfidenceTracker& tracker,
                  std::mt19937_64& rng);

// Targets r + gamma * max_a' Q(s', a') * (1 - terminal).
std::vector<double> bellman_targets(std::span<const double> rewards,
                                    std::span<const double> next_max_q,
                                    std::span<const bool> terminal, double gamma);

// Tabular update Q + alpha * (target - Q).
double tabular_q_update(double q, double target, double alpha);

// Compares backprop gradients with central differences in double precision;
// returns the largest relative error |a - n| / max(|a|, |n|, 1e-7).
struct GradientCheckOptions {
  LossConfig loss;
  int batch = 3;
  double perturbation = 1e-5;
  std::uint64_t seed = 7;
  // Randomize biases and BN affine parameters so every path carries signal.
  bool randomize_all = true;
  bool zero_inputs = false;
  bool zero_targets = false;
};
double gradient_check(const NetworkSpec& spec, const GradientCheckOptions& opts = {});

// Online network, target network, optimizer state, replay and tracker.
class DqnLearner {
 public:
  DqnLearner(NetworkSpec spec, TrainingConfig cfg, std::uint64_t seed);

  const NetworkSpec& spec() const { return online_.spec(); }
  const TrainingConfig& config() const { return cfg_; }
  QNetwork<float>& online() { return online_; }
  const QNetwork<float>& online() const { return online_; }
  const QNetwork<float>& target() const { return target_; }
  AdamState<float>& adam() { return adam_; }
  const AdamState<float>& adam() const { return adam_; }
  ConfidenceTracker& tracker() { return tracker_; }
  const ConfidenceTracker& tracker() const { return tracker_; }
  ReplayBuffer& replay() { return replay_; }
  long train_steps() const { return train_steps_; }
  double last_loss() const { return last_loss_; }

  std::array<float, 4> q_values(std::span<const float> obs) const;
  int greedy_action(std::span<const float> obs) const;

  // Stores the transition (reward given unscaled) and trains when due.
  // Returns the batch loss when a train step ran.
  std::optional<double> observe(std::span<const float> obs, int action, double reward,
                                std::span<const float> next_obs, bool terminal);
  void sync_target();
  // Replaces network weights and optimizer state (used when resuming).
  void restore(const QNetwork<float>& net, AdamState<float> adam, long train_steps);

 private:
  TrainingConfig cfg_;
  QNetwork<float> online_;
  QNetwork<float> target_;
  AdamState<float> adam_;
  ReplayBuffer replay_;
  ConfidenceTracker tracker_;
  std::mt19937_64 rng_;
  long observed_ = 0;
  long train_steps_ = 0;
  double last_loss_ = 0.0;
};

}  // namespace advicelab::qnet
