#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "advicelab/agents/agent.hpp"
#include "advicelab/harness/metrics.hpp"
#include "advicelab/oracle/oracle.hpp"
#include "advicelab/render/raycaster.hpp"
#include "advicelab/world/environment.hpp"

namespace advicelab::harness {

inline constexpr int kBaselineMaxActions = 1500;
inline constexpr int kAdvisedMaxActions = 1000;

// Action cap for an agent kind: baseline runs get 1500, advised agents 1000.
int default_max_actions(agents::AgentKind kind);

struct ExperimentConfig {
  agents::AgentKind agent = agents::AgentKind::kBaseline;
  oracle::Condition condition = oracle::Condition::kNone;
  std::string map_path;
  // Takes precedence over map_path when set.
  std::shared_ptr<const world::GridMap> map;
  int episodes = 250;
  int sessions = 5;
  // Per-session seeds; when shorter than `sessions` the rest derive from base_seed.
  std::vector<std::uint64_t> seeds;
  std::uint64_t base_seed = 1;
  std::string output_dir;
  std::optional<int> serve_port;

  render::AliasingMode palette = render::AliasingMode::kAliased;
  render::CameraConfig camera;
  qnet::NetworkSpec network;
  qnet::TrainingConfig training;
  agents::ArbitrationConfig arbitration;
  // Overrides default_max_actions(agent) when set.
  std::optional<int> max_actions;
  // Stop a session after this many consecutive goal episodes (0 never stops).
  int stop_after_stable = 0;

  void validate() const;
  std::uint64_t session_seed(int session) const;
  int action_cap() const;
  // File stem "<agent>_<condition>" shared by every output of this config.
  std::string stem() const;
};

// Copied per step for observers; never aliases loop state.
struct StepSnapshot {
  int session = 0;
  int episode = 0;
  int step = 0;
  long global_step = 0;
  world::AgentPose pose;
  double score = 0.0;
  world::Action last_action = world::Action::kForward;
  bool advice_active = false;
  render::Frame frame;
};

// Hooks into the environment-step loop (used by the advice server).
class StepObserver {
 public:
  virtual ~StepObserver() = default;
  // Called before each environment step with its global step index; may block (pause).
  virtual void before_step(long /*global_step*/) {}
  virtual void after_step(const StepSnapshot& snapshot) = 0;
  // Lets the loop skip building snapshots when nobody is listening.
  virtual bool wants_snapshots() const { return true; }
};

struct SessionSetup {
  std::shared_ptr<const world::GridMap> map;
  render::AliasingMode palette = render::AliasingMode::kAliased;
  render::CameraConfig camera;
  int frame_stack = 4;
  int max_actions = kAdvisedMaxActions;
  // Oracle emissions per step; nullopt leaves the queue to external producers.
  std::optional<oracle::OracleConfig> oracle;
  int session = 0;
  int episodes = 1;
  int stop_after_stable = 0;
  // Added to the step index passed to the agent (epsilon schedule, advice clock).
  long global_step_offset = 0;
};

struct SessionResult {
  std::vector<EpisodeRecord> records;
  VisitHeatmap heatmap;
  long global_steps = 0;
};

// Runs `setup.episodes` episodes of one agent. Advice from the oracle (if
// any) is pushed into `queue` before each action selection.
SessionResult run_session(const SessionSetup& setup, agents::Agent& agent,
                          agents::PendingAdviceQueue& queue, StepObserver* observer = nullptr);

struct ExperimentResult {
  std::vector<SessionResult> sessions;
  VisitHeatmap heatmap;  // summed over sessions
  std::vector<std::string> written_files;
};

// Called once per session with the trained agent, e.g. to save a checkpoint.
using SessionCallback = std::function<void(int session, agents::DqnAgent& agent, const SessionResult& result)>;

std::shared_ptr<const world::GridMap> resolve_map(const ExperimentConfig& cfg);

ExperimentResult run_experiment(const ExperimentConfig& cfg, StepObserver* observer = nullptr,
                                const SessionCallback& on_session = {},
                                std::shared_ptr<agents::PendingAdviceQueue> queue = nullptr);

struct TransferResult {
  std::vector<EpisodeRecord> records;
  VisitHeatmap heatmap;
  double reference_score = 0.0;
  std::optional<int> reconvergence_episode;
};

// Loads a trained checkpoint, rotates the map clockwise `rotations` times and
// keeps training; reconvergence is measured against `reference_score`, the
// final moving-average score of the first phase.
TransferResult transfer_experiment(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                                   double reference_score, int rotations = 1);

// Follows the oracle's policy field exactly and never learns.
class ScriptedOptimalAgent final : public agents::Agent {
 public:
  explicit ScriptedOptimalAgent(const world::GridMap& map);
  agents::Decision act(std::span<const float> obs, const world::AgentPose& pose, long global_step) override;
  void learn(std::span<const float>, world::Action, double, std::span<const float>, bool) override {}

 private:
  oracle::PolicyField field_;
};

}  // namespace advicelab::harness
