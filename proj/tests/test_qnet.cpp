#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>

#include "advicelab/qnet/adam.hpp"
#include "advicelab/qnet/checkpoint.hpp"
#include "advicelab/qnet/loss.hpp"
#include "advicelab/qnet/trainer.hpp"

using namespace advicelab::qnet;

namespace {

NetworkSpec small_spec() {
  NetworkSpec s;
  s.frames = 2;
  s.height = 8;
  s.width = 8;
  s.conv_channels = {3, 4};
  s.dense_widths = {8};
  return s;
}

std::vector<float> random_obs(const NetworkSpec& s, std::mt19937_64& rng) {
  std::uniform_int_distribution<int> pix(0, 255);
  std::vector<float> obs(s.input_size());
  for (float& v : obs) v = static_cast<float>(pix(rng)) / 255.0f;
  return obs;
}

}  // namespace

TEST(Loss, SquaredLogErrorByHand) {
  LossConfig cfg;
  auto e = element_loss(3.0, 1.0, cfg);
  const double diff = std::log(5.0) - std::log(3.0);
  EXPECT_NEAR(e.value, diff * diff, 1e-12);
  EXPECT_NEAR(e.grad, 2.0 * diff / 5.0, 1e-12);
  // Predictions below -shift are clamped and receive no gradient.
  EXPECT_EQ(element_loss(-4.0, 0.0, cfg).grad, 0.0);
}

TEST(Loss, BatchIsRootMeanSquare) {
  std::vector<double> p = {3.0, 0.0}, t = {1.0, 0.0};
  auto b = batch_loss(p, t, {});
  const double d = std::log(5.0) - std::log(3.0);
  EXPECT_NEAR(b.value, std::sqrt(d * d / 2.0), 1e-12);
  EXPECT_NEAR(b.sample_losses[0], d, 1e-12);
  EXPECT_EQ(b.sample_losses[1], 0.0);
  // Finite-difference check of d value / d pred_0.
  const double h = 1e-6;
  std::vector<double> up = {3.0 + h, 0.0}, dn = {3.0 - h, 0.0};
  const double numeric = (batch_loss(up, t, {}).value - batch_loss(dn, t, {}).value) / (2 * h);
  EXPECT_NEAR(b.grads[0], numeric, 1e-7);
  std::vector<double> bad = {std::nan(""), 0.0};
  EXPECT_THROW(batch_loss(bad, t, {}), std::domain_error);
}

TEST(Loss, Huber) {
  LossConfig cfg;
  cfg.kind = LossKind::kHuber;
  EXPECT_DOUBLE_EQ(element_loss(0.5, 0.0, cfg).value, 0.125);
  EXPECT_DOUBLE_EQ(element_loss(3.0, 0.0, cfg).value, 2.5);
  EXPECT_DOUBLE_EQ(element_loss(-3.0, 0.0, cfg).grad, -1.0);
}

TEST(Adam, TwoStepsByHand) {
  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  AdamState<double> st(1);
  std::vector<double> p = {1.0}, g = {0.5};
  adam_step<double>(p, g, st, cfg);
  // First step moves by lr * g / |g|.
  EXPECT_NEAR(p[0], 1.0 - 0.1 * 0.5 / (0.5 + 1e-8), 1e-12);
  g[0] = -0.25;
  adam_step<double>(p, g, st, cfg);
  const double m = 0.9 * 0.05 + 0.1 * -0.25;
  const double v = 0.999 * 0.00025 + 0.001 * 0.0625;
  const double mhat = m / (1 - 0.81), vhat = v / (1 - 0.999 * 0.999);
  EXPECT_NEAR(p[0], 1.0 - 0.1 * 0.5 / (0.5 + 1e-8) - 0.1 * mhat / (std::sqrt(vhat) + 1e-8), 1e-10);
}

TEST(Bellman, TargetsAndTabularUpdate) {
  std::vector<double> r = {1.0, 1.0}, q = {2.0, 2.0};
  bool term[] = {false, true};
  auto t = bellman_targets(r, q, std::span<const bool>(term, 2), 0.95);
  EXPECT_DOUBLE_EQ(t[0], 2.9);
  EXPECT_DOUBLE_EQ(t[1], 1.0);
  EXPECT_DOUBLE_EQ(tabular_q_update(1.0, 3.0, 0.5), 2.0);
}

TEST(Replay, RingAndPacking) {
  ReplayBuffer buf(3);
  for (int i = 0; i < 5; ++i) buf.push({{static_cast<std::uint8_t>(i)}, i % 4, 0.0f, {0}, false});
  EXPECT_EQ(buf.size(), 3u);
  std::vector<int> seen;
  for (std::size_t i = 0; i < buf.size(); ++i) seen.push_back(buf.at(i).observation[0]);
  std::sort(seen.begin(), seen.end());
  EXPECT_EQ(seen, (std::vector<int>{2, 3, 4}));

  std::vector<float> obs = {0.0f, 1.0f / 255.0f, 128.0f / 255.0f, 1.0f};
  std::vector<float> back(4);
  unpack_observation(pack_observation(obs), back);
  EXPECT_EQ(back, obs);

  std::mt19937_64 rng(1);
  for (auto i : buf.sample_indices(50, rng)) EXPECT_LT(i, 3u);
}

TEST(Network, ShapesAreChecked) {
  QNetwork<float> net(small_spec());
  std::vector<float> wrong(10);
  EXPECT_THROW(net.forward(wrong, 1), ShapeMismatch);
  NetworkSpec bad = small_spec();
  bad.outputs = 3;
  EXPECT_THROW(bad.validate(), std::invalid_argument);
}

TEST(Network, BatchedInferenceMatchesSingle) {
  auto spec = small_spec();
  QNetwork<float> net(spec);
  std::mt19937_64 rng(2);
  net.init_he_uniform(rng);
  auto a = random_obs(spec, rng), b = random_obs(spec, rng);
  std::vector<float> both(a);
  both.insert(both.end(), b.begin(), b.end());
  auto qa = net.forward(a, 1), qb = net.forward(b, 1), qab = net.forward(both, 2);
  for (int i = 0; i < 4; ++i) {
    EXPECT_NEAR(qab[i], qa[i], 1e-5);
    EXPECT_NEAR(qab[4 + i], qb[i], 1e-5);
  }
}

TEST(Network, GradientCheckDouble) {
  EXPECT_LT(gradient_check(small_spec()), 1e-4);
  GradientCheckOptions opts;
  opts.loss.kind = LossKind::kHuber;
  EXPECT_LT(gradient_check(small_spec(), opts), 1e-4);
}

TEST(Network, ScratchForwardAllocatesOnceAndAgrees) {
  auto spec = small_spec();
  QNetwork<float> net(spec);
  std::mt19937_64 rng(4);
  net.init_he_uniform(rng);
  auto obs = random_obs(spec, rng);
  Workspace<float> ws;
  auto first = net.forward(obs, 1, ws);
  EXPECT_EQ(net.forward(obs, 1, ws), first);
  EXPECT_EQ(net.forward(obs, 1), first);
}

TEST(Tracker, EmaAndMax) {
  ConfidenceTracker t;
  EXPECT_EQ(t.max_loss(), 0.0);
  t.record(1, 2.0);
  t.record(1, 1.0);
  EXPECT_NEAR(*t.action_loss(1), 0.99 * 2.0 + 0.01 * 1.0, 1e-12);
  EXPECT_DOUBLE_EQ(t.max_loss(), 2.0);
  EXPECT_FALSE(t.action_loss(0).has_value());
  EXPECT_NEAR(t.min_loss(), 1.99, 1e-12);
  EXPECT_THROW(t.restore({3.0, std::nullopt, std::nullopt, std::nullopt}, 2.0), std::invalid_argument);
}

TEST(Trainer, StepKeepsTrackerInvariantAndRequiresReplay) {
  auto spec = small_spec();
  TrainingConfig cfg;
  cfg.batch_size = 8;
  cfg.min_replay = 16;
  cfg.train_every = 1;
  DqnLearner learner(spec, cfg, 3);
  std::mt19937_64 rng(7);
  ConfidenceTracker tracker;
  EXPECT_THROW(train_step(learner.replay(), learner.online(), learner.target(), learner.adam(), cfg,
                          tracker, rng),
               InsufficientReplay);
  double last_max = 0.0;
  for (int i = 0; i < 80; ++i) {
    auto obs = random_obs(spec, rng), next = random_obs(spec, rng);
    learner.observe(obs, i % 4, i % 17 == 0 ? 1500.0 : -0.5, next, i % 23 == 0);
    const auto& tr = learner.tracker();
    EXPECT_GE(tr.max_loss(), last_max);
    last_max = tr.max_loss();
    for (const auto& l : tr.losses()) {
      if (l) EXPECT_LE(*l, tr.max_loss());
    }
  }
  EXPECT_GT(learner.train_steps(), 0);
}

TEST(Checkpoint, RoundTripPreservesOutputs) {
  auto spec = small_spec();
  TrainingConfig cfg;
  cfg.batch_size = 4;
  cfg.min_replay = 4;
  DqnLearner a(spec, cfg, 9);
  std::mt19937_64 rng(8);
  for (int i = 0; i < 12; ++i) a.observe(random_obs(spec, rng), i % 4, -0.5, random_obs(spec, rng), false);
  auto path = (std::filesystem::temp_directory_path() / "advicelab_ckpt_test.json").string();
  save_checkpoint(a, path);
  EXPECT_EQ(read_checkpoint_spec(path), spec);
  DqnLearner b(spec, cfg, 1);
  load_checkpoint(b, path);
  auto obs = random_obs(spec, rng);
  EXPECT_EQ(a.q_values(obs), b.q_values(obs));
  EXPECT_EQ(a.tracker().losses(), b.tracker().losses());

  NetworkSpec other = spec;
  other.dense_widths = {16};
  DqnLearner c(other, cfg, 1);
  EXPECT_THROW(load_checkpoint(c, path), CheckpointError);
  std::filesystem::remove(path);
}
