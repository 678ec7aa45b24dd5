#include "advicelab/qnet/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

namespace advicelab::qnet {

double ExplorationSchedule::epsilon(long step) const {
  if (decay_steps <= 0 || step >= decay_steps) return end;
  double frac = static_cast<double>(std::max(0L, step)) / static_cast<double>(decay_steps);
  return start + (end - start) * frac;
}

void TrainingConfig::validate() const {
  if (!(adam.learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("gamma must lie in [0, 1]");
  if (exploration.end > exploration.start) {
    throw std::invalid_argument("exploration end must not exceed start");
  }
  if (exploration.start < 0.0 || exploration.start > 1.0 || exploration.end < 0.0) {
    throw std::invalid_argument("exploration rates must lie in [0, 1]");
  }
  if (batch_size <= 0) throw std::invalid_argument("batch size must be positive");
  if (replay_capacity == 0) throw std::invalid_argument("replay capacity must be positive");
  if (train_every <= 0) throw std::invalid_argument("train_every must be positive");
  if (target_sync < 0) throw std::invalid_argument("target_sync must be non-negative");
  if (!(reward_scale > 0.0)) throw std::invalid_argument("reward scale must be positive");
}

ConfidenceTracker::ConfidenceTracker(int actions) : losses_(actions) {}

void ConfidenceTracker::record(int action, double sample_loss) {
  auto& slot = losses_.at(action);
  slot = slot ? kDecay * *slot + (1.0 - kDecay) * sample_loss : sample_loss;
  max_ = std::max(max_, sample_loss);
}

double ConfidenceTracker::min_loss() const {
  double best = max_;
  for (const auto& l : losses_) {
    if (l) best = std::min(best, *l);
  }
  return best;
}

void ConfidenceTracker::restore(std::vector<std::optional<double>> losses, double max_loss) {
  if (losses.size() != losses_.size()) throw std::invalid_argument("tracker action count differs");
  for (const auto& l : losses) {
    if (l && (*l < 0.0 || *l > max_loss)) {
      throw std::invalid_argument("tracker state violates 0 <= L_a <= L_max");
    }
  }
  losses_ = std::move(losses);
  max_ = max_loss;
}

std::vector<double> bellman_targets(std::span<const double> rewards,
                                    std::span<const double> next_max_q,
                                    std::span<const bool> terminal, double gamma) {
  std::vector<double> out(rewards.size());
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    out[i] = rewards[i] + (terminal[i] ? 0.0 : gamma * next_max_q[i]);
  }
  return out;
}

double tabular_q_update(double q, double target, double alpha) { return q + alpha * (target - q); }

double train_step(const ReplayBuffer& buffer, QNetwork<float>& online, const QNetwork<float>& target,
                  AdamState<float>& adam, const TrainingConfig& cfg, ConfidenceTracker& tracker,
                  std::mt19937_64& rng) {
  if (buffer.size() < std::max<std::size_t>(cfg.min_replay, 1)) {
    throw InsufficientReplay("replay holds " + std::to_string(buffer.size()) + " transitions, need " +
                             std::to_string(cfg.min_replay));
  }
  const NetworkSpec& spec = online.spec();
  const int batch = cfg.batch_size;
  const std::size_t in = spec.input_size();
  const int outputs = spec.outputs;
  auto idx = buffer.sample_indices(batch, rng);

  std::vector<float> obs(in * batch), next(in * batch);
  std::vector<double> rewards(batch), next_max(batch);
  std::vector<int> actions(batch);
  std::unique_ptr<bool[]> terminal(new bool[batch]);
  for (int b = 0; b < batch; ++b) {
    const Transition& t = buffer.at(idx[b]);
    unpack_observation(t.observation, std::span<float>(obs).subspan(in * b, in));
    unpack_observation(t.next_observation, std::span<float>(next).subspan(in * b, in));
    rewards[b] = t.reward;
    actions[b] = t.action;
    terminal[b] = t.terminal;
  }

  std::vector<float> q_next = target.forward(next, batch);
  for (int b = 0; b < batch; ++b) {
    auto row = std::span<const float>(q_next).subspan(static_cast<std::size_t>(b) * outputs, outputs);
    next_max[b] = *std::max_element(row.begin(), row.end());
  }
  auto targets = bellman_targets(rewards, next_max, std::span<const bool>(terminal.get(), batch), cfg.gamma);

  Workspace<float> ws;
  std::vector<float> q = online.forward(obs, batch, Mode::kTrain, &ws);
  std::vector<double> preds(batch);
  for (int b = 0; b < batch; ++b) preds[b] = q[static_cast<std::size_t>(b) * outputs + actions[b]];
  BatchLoss loss = batch_loss(preds, targets, cfg.loss);

  std::vector<float> grad_out(q.size(), 0.0f);
  for (int b = 0; b < batch; ++b) {
    grad_out[static_cast<std::size_t>(b) * outputs + actions[b]] = static_cast<float>(loss.grads[b]);
  }
  std::vector<float> grad(online.parameter_count(), 0.0f);
  online.backward(ws, grad_out, grad);
  adam_step<float>(online.parameters(), grad, adam, cfg.adam);

  for (int b = 0; b < batch; ++b) tracker.record(actions[b], loss.sample_losses[b]);
  return loss.value;
}

double gradient_check(const NetworkSpec& spec, const GradientCheckOptions& opts) {
  QNetwork<double> net(spec);
  std::mt19937_64 rng(opts.seed);
  net.init_he_uniform(rng);
  auto params = net.parameters();
  if (opts.randomize_all) {
    std::uniform_real_distribution<double> small(-0.5, 0.5);
    std::uniform_real_distribution<double> scale(0.5, 1.5);
    for (const auto& s : net.conv_slots()) {
      for (int c = 0; c < s.out_channels; ++c) {
        params[s.bias + c] = small(rng);
        params[s.gamma + c] = scale(rng);
        params[s.beta + c] = small(rng);
      }
    }
    for (const auto& d : net.dense_slots()) {
      for (int o = 0; o < d.outputs; ++o) params[d.bias + o] = small(rng);
    }
  }
  const int batch = opts.batch;
  const int outputs = spec.outputs;
  std::vector<double> inputs(spec.input_size() * batch, 0.0);
  if (!opts.zero_inputs) {
    std::uniform_real_distribution<double> pix(0.0, 1.0);
    for (double& v : inputs) v = pix(rng);
  }
  std::vector<int> actions(batch);
  std::vector<double> targets(batch, 0.0);
  std::uniform_int_distribution<int> pick(0, outputs - 1);
  std::uniform_real_distribution<double> tgt(0.0, 2.0);
  for (int b = 0; b < batch; ++b) {
    actions[b] = pick(rng);
    if (!opts.zero_targets) targets[b] = tgt(rng);
  }

  auto taken = [&](const std::vector<double>& q) {
    std::vector<double> p(batch);
    for (int b = 0; b < batch; ++b) p[b] = q[static_cast<std::size_t>(b) * outputs + actions[b]];
    return p;
  };

  Workspace<double> ws;
  auto q = net.forward(inputs, batch, Mode::kTrainFrozen, &ws);
  BatchLoss loss = batch_loss(taken(q), targets, opts.loss);
  std::vector<double> grad_out(q.size(), 0.0);
  for (int b = 0; b < batch; ++b) grad_out[static_cast<std::size_t>(b) * outputs + actions[b]] = loss.grads[b];
  std::vector<double> analytic(net.parameter_count(), 0.0);
  net.backward(ws, grad_out, analytic);

  auto loss_at = [&]() {
    auto qq = net.forward(inputs, batch, Mode::kTrainFrozen, nullptr);
    return batch_loss(taken(qq), targets, opts.loss).value;
  };
  double worst = 0.0;
  const double h = opts.perturbation;
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double saved = params[i];
    params[i] = saved + h;
    const double up = loss_at();
    params[i] = saved - h;
    const double down = loss_at();
    params[i] = saved;
    const double numeric = (up - down) / (2.0 * h);
    const double denom = std::max({std::fabs(analytic[i]), std::fabs(numeric), 1e-7});
    worst = std::max(worst, std::fabs(analytic[i] - numeric) / denom);
  }
  return worst;
}

DqnLearner::DqnLearner(NetworkSpec spec, TrainingConfig cfg, std::uint64_t seed)
    : cfg_(std::move(cfg)),
      online_(spec),
      target_(spec),
      adam_(online_.parameter_count()),
      replay_(cfg_.replay_capacity),
      tracker_(spec.outputs),
      rng_(seed) {
  cfg_.validate();
  if (spec.outputs != 4) throw std::invalid_argument("the agent network must have 4 outputs");
  online_.init_he_uniform(rng_);
  target_.copy_from(online_);
}

std::array<float, 4> DqnLearner::q_values(std::span<const float> obs) const {
  auto q = online_.forward(obs, 1);
  return {q[0], q[1], q[2], q[3]};
}

int DqnLearner::greedy_action(std::span<const float> obs) const {
  auto q = q_values(obs);
  return argmax<float>(q);
}

std::optional<double> DqnLearner::observe(std::span<const float> obs, int action, double reward,
                                          std::span<const float> next_obs, bool terminal) {
  Transition t;
  t.observation = pack_observation(obs);
  t.action = action;
  t.reward = static_cast<float>(reward / cfg_.reward_scale);
  t.next_observation = pack_observation(next_obs);
  t.terminal = terminal;
  replay_.push(std::move(t));
  ++observed_;
  if (replay_.size() < std::max<std::size_t>(cfg_.min_replay, 1) || observed_ % cfg_.train_every != 0) {
    return std::nullopt;
  }
  const QNetwork<float>& bootstrap = cfg_.target_sync > 0 ? target_ : online_;
  last_loss_ = train_step(replay_, online_, bootstrap, adam_, cfg_, tracker_, rng_);
  ++train_steps_;
  if (cfg_.target_sync > 0 && train_steps_ % cfg_.target_sync == 0) sync_target();
  return last_loss_;
}

void DqnLearner::sync_target() { target_.copy_from(online_); }

void DqnLearner::restore(const QNetwork<float>& net, AdamState<float> adam, long train_steps) {
  online_.copy_from(net);
  target_.copy_from(net);
  if (adam.m.size() != online_.parameter_count()) throw ShapeMismatch("optimizer state size differs");
  adam_ = std::move(adam);
  train_steps_ = train_steps;
}

}  // namespace advicelab::qnet
