#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "advicelab/agents/agent.hpp"

using namespace advicelab;
using agents::AdviceEvent;
using agents::DecisionSource;
using world::Action;
using world::Heading;

namespace {

agents::GreedyFn fixed(int a) {
  return [a] { return a; };
}

}  // namespace

TEST(RelativeCost, ClosedForms) {
  EXPECT_DOUBLE_EQ(agents::relative_cost(2.0, 2.0), 1.0);
  EXPECT_NEAR(agents::relative_cost(std::exp(-6.0), 1.0), 0.25, 1e-12);
  EXPECT_NEAR(agents::relative_cost(std::exp(-2.0), 1.0), 0.5, 1e-12);
  EXPECT_DOUBLE_EQ(agents::relative_cost(0.0, 0.0), 1.0);
  // Ratios below 1e-12 are clamped.
  EXPECT_DOUBLE_EQ(agents::relative_cost(0.0, 1.0), agents::relative_cost(1e-12, 1.0));
}

TEST(CardinalToAction, AllSixteenPairs) {
  for (Heading h : world::kAllHeadings) {
    for (Heading d : world::kAllHeadings) {
      const int diff = (static_cast<int>(d) - static_cast<int>(h) + 4) % 4;
      const Action expected[] = {Action::kForward, Action::kTurnRight, Action::kTurnAround, Action::kTurnLeft};
      EXPECT_EQ(agents::cardinal_to_action(h, d), expected[diff]);
    }
  }
}

TEST(AdviceQueue, CapacityAndExpiry) {
  agents::PendingAdviceQueue q(2, 5);
  q.push({Heading::kNorth, 0});
  q.push({Heading::kEast, 1});
  q.push({Heading::kSouth, 2});  // drops north
  EXPECT_EQ(q.total_pushed(), 3u);
  EXPECT_EQ(q.size(2), 2u);
  EXPECT_EQ(q.pop(2)->direction, Heading::kEast);
  // issued at 2, ttl 5: gone at step 8
  EXPECT_FALSE(q.has_pending(8));
  EXPECT_FALSE(q.pop(8).has_value());
}

TEST(FeedbackArbitration, CheckOrder) {
  agents::ArbitrationConfig cfg;
  agents::PendingAdviceQueue q;
  qnet::ConfidenceTracker unsure;  // no signal yet: cost 1
  qnet::ConfidenceTracker sure;
  sure.record(0, 1e-4);
  sure.record(1, 1.0);
  std::mt19937_64 rng(1);

  q.push({Heading::kSouth, 0});
  auto d = agents::fa_choose_action(fixed(0), sure, q, Heading::kEast, 0, rng, 0.0, cfg);
  EXPECT_EQ(d.source, DecisionSource::kPolicy);
  EXPECT_EQ(q.size(0), 1u);

  d = agents::fa_choose_action(fixed(0), unsure, q, Heading::kEast, 0, rng, 0.0, cfg);
  EXPECT_EQ(d.source, DecisionSource::kAdviceConsumed);
  EXPECT_EQ(d.action, Action::kTurnRight);
  EXPECT_TRUE(d.used_advice);

  d = agents::fa_choose_action(fixed(3), unsure, q, Heading::kEast, 0, rng, 0.0, cfg);
  EXPECT_EQ(d.source, DecisionSource::kPolicy);
  EXPECT_EQ(d.action, Action::kTurnAround);

  q.push({Heading::kSouth, 0});
  d = agents::fa_choose_action(fixed(0), unsure, q, Heading::kEast, 0, rng, 1.0, cfg);
  EXPECT_EQ(d.source, DecisionSource::kExplore);
  EXPECT_EQ(q.size(0), 1u);
}

TEST(Newtonian, NorthAdviceWithFrictionTwo) {
  agents::ArbitrationConfig cfg;
  cfg.friction = 2;
  agents::PendingAdviceQueue q;
  qnet::ConfidenceTracker unsure;
  std::optional<agents::ActiveAdvice> active;
  std::mt19937_64 rng(1);
  q.push({Heading::kNorth, 0});

  Heading heading = Heading::kEast;
  std::vector<Action> seq;
  for (int i = 0; i < 4; ++i) {
    auto d = agents::naa_choose_action(fixed(3), unsure, q, active, heading, i, rng, 0.0, cfg);
    seq.push_back(d.action);
    if (d.action == Action::kTurnLeft) heading = world::turn_left(heading);
  }
  EXPECT_EQ(seq, (std::vector<Action>{Action::kTurnLeft, Action::kForward, Action::kForward,
                                      Action::kTurnAround}));
  EXPECT_FALSE(active.has_value());
}

TEST(Newtonian, NewAdviceReplacesActive) {
  agents::ArbitrationConfig cfg;
  agents::PendingAdviceQueue q;
  qnet::ConfidenceTracker unsure;
  std::optional<agents::ActiveAdvice> active;
  std::mt19937_64 rng(1);
  q.push({Heading::kEast, 0});
  auto d = agents::naa_choose_action(fixed(0), unsure, q, active, Heading::kEast, 0, rng, 0.0, cfg);
  EXPECT_EQ(d.action, Action::kForward);
  ASSERT_TRUE(active);
  EXPECT_EQ(active->remaining_forward_steps, 2);
  q.push({Heading::kWest, 1});
  d = agents::naa_choose_action(fixed(0), unsure, q, active, Heading::kEast, 1, rng, 0.0, cfg);
  EXPECT_EQ(d.action, Action::kTurnAround);
  EXPECT_EQ(active, (agents::ActiveAdvice{Heading::kWest, 2}));
}

TEST(Newtonian, ConfidentAgentIgnoresRecital) {
  agents::ArbitrationConfig cfg;
  agents::PendingAdviceQueue q;
  qnet::ConfidenceTracker sure;
  sure.record(0, 1e-4);
  sure.record(1, 1.0);
  std::optional<agents::ActiveAdvice> active = agents::ActiveAdvice{Heading::kNorth, 2};
  std::mt19937_64 rng(1);
  auto d = agents::naa_choose_action(fixed(2), sure, q, active, Heading::kNorth, 0, rng, 0.0, cfg);
  EXPECT_EQ(d.source, DecisionSource::kPolicy);
  EXPECT_EQ(d.action, Action::kTurnRight);
}

TEST(Newtonian, ZeroFrictionMatchesFeedbackArbitration) {
  agents::ArbitrationConfig cfg;
  cfg.friction = 0;
  agents::PendingAdviceQueue qa, qb;
  qnet::ConfidenceTracker unsure;
  std::optional<agents::ActiveAdvice> active;
  std::mt19937_64 ra(42), rb(42), script(7);
  std::uniform_int_distribution<int> dir(0, 3), greedy(0, 3);
  std::bernoulli_distribution advise(0.3);
  Heading heading = Heading::kEast;
  for (long t = 0; t < 500; ++t) {
    if (advise(script)) {
      AdviceEvent e{static_cast<Heading>(dir(script)), t};
      qa.push(e);
      qb.push(e);
    }
    const int g = greedy(script);
    auto a = agents::fa_choose_action(fixed(g), unsure, qa, heading, t, ra, 0.1, cfg);
    auto b = agents::naa_choose_action(fixed(g), unsure, qb, active, heading, t, rb, 0.1, cfg);
    ASSERT_EQ(a.action, b.action) << "step " << t;
    ASSERT_EQ(a.used_advice, b.used_advice);
    if (a.action == Action::kTurnLeft) heading = world::turn_left(heading);
    if (a.action == Action::kTurnRight) heading = world::turn_right(heading);
    if (a.action == Action::kTurnAround) heading = world::turn_around(heading);
  }
}

TEST(Choosers, DrawRngIdentically) {
  agents::ArbitrationConfig cfg;
  agents::PendingAdviceQueue q;
  qnet::ConfidenceTracker unsure;
  std::optional<agents::ActiveAdvice> active;
  std::mt19937_64 r0(5), r1(5), r2(5);
  for (int i = 0; i < 200; ++i) {
    auto a = agents::choose_action_baseline(fixed(1), r0, 0.5);
    auto b = agents::fa_choose_action(fixed(1), unsure, q, Heading::kEast, i, r1, 0.5, cfg).action;
    auto c = agents::naa_choose_action(fixed(1), unsure, q, active, Heading::kEast, i, r2, 0.5, cfg).action;
    ASSERT_EQ(a, b);
    ASSERT_EQ(a, c);
  }
}

TEST(DqnAgent, BaselineNeverConsumesAdvice) {
  qnet::NetworkSpec spec;
  spec.frames = 1;
  spec.height = 8;
  spec.width = 8;
  spec.conv_channels = {2};
  spec.dense_widths = {4};
  auto q = std::make_shared<agents::PendingAdviceQueue>();
  agents::DqnAgent agent(agents::AgentKind::kBaseline, spec, {}, {}, 3, q);
  std::vector<float> obs(spec.input_size(), 0.5f);
  q->push({Heading::kNorth, 0});
  for (int i = 0; i < 20; ++i) EXPECT_FALSE(agent.act(obs, {1, 1, Heading::kEast}, 0).used_advice);
  EXPECT_EQ(q->size(0), 1u);
}
