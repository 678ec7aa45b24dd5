#include "advicelab/harness/experiment.hpp"

#include <filesystem>

#include "advicelab/harness/output.hpp"
#include "advicelab/qnet/checkpoint.hpp"

namespace advicelab::harness {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

constexpr std::uint64_t kOracleStream = 0x5851f42d4c957f2dull;

bool is_oracle_condition(oracle::Condition c) { return oracle::preset(c).has_value(); }

}  // namespace

int default_max_actions(agents::AgentKind kind) {
  return kind == agents::AgentKind::kBaseline ? kBaselineMaxActions : kAdvisedMaxActions;
}

void ExperimentConfig::validate() const {
  if (episodes < 1) throw std::invalid_argument("episodes must be >= 1");
  if (sessions < 1) throw std::invalid_argument("sessions must be >= 1");
  if (!map && map_path.empty()) throw std::invalid_argument("no map given");
  if (max_actions && *max_actions < 1) throw std::invalid_argument("max actions must be >= 1");
  if (stop_after_stable < 0) throw std::invalid_argument("stop_after_stable must be >= 0");
  if (serve_port && (*serve_port < 0 || *serve_port > 65535)) throw std::invalid_argument("bad serve port");
  network.validate();
  training.validate();
  arbitration.validate();
  if (camera.width != network.width || camera.height != network.height) {
    throw std::invalid_argument("camera resolution must match the network input");
  }
}

std::uint64_t ExperimentConfig::session_seed(int session) const {
  if (session >= 0 && static_cast<std::size_t>(session) < seeds.size()) return seeds[session];
  return splitmix64(base_seed + static_cast<std::uint64_t>(session));
}

int ExperimentConfig::action_cap() const { return max_actions.value_or(default_max_actions(agent)); }

std::string ExperimentConfig::stem() const {
  return std::string(agents::to_string(agent)) + "_" + std::string(oracle::to_string(condition));
}

SessionResult run_session(const SessionSetup& setup, agents::Agent& agent,
                          agents::PendingAdviceQueue& queue, StepObserver* observer) {
  if (!setup.map) throw std::invalid_argument("session has no map");
  const world::GridMap& map = *setup.map;
  world::Environment env(setup.map, world::EpisodeConfig{setup.max_actions, 0});
  render::FrameCache cache(map, render::TexturePalette(setup.palette), setup.camera);
  render::FrameStack stack(setup.frame_stack, setup.camera.width, setup.camera.height);

  std::optional<oracle::PolicyField> field;
  std::mt19937_64 oracle_rng;
  if (setup.oracle) {
    setup.oracle->validate();
    field = oracle::compute_policy_field(map);
    oracle_rng.seed(setup.oracle->seed);
  }

  SessionResult result;
  result.heatmap = VisitHeatmap(map.width(), map.height());
  long global = 0;
  int streak = 0;
  for (int episode = 0; episode < setup.episodes; ++episode) {
    agent.begin_episode();
    world::AgentPose pose = env.reset();
    stack.clear();
    std::vector<float> obs = stack.push_and_stack(cache.get(pose));
    const std::uint64_t pushed_before = queue.total_pushed();
    int used = 0;

    while (!env.terminal()) {
      const long now = setup.global_step_offset + global;
      if (observer) observer->before_step(now);
      if (field) {
        if (auto ev = oracle::advise(*field, pose, *setup.oracle, oracle_rng, now)) queue.push(*ev);
      }
      agents::Decision d = agent.act(obs, pose, now);
      if (d.source == agents::DecisionSource::kAdviceConsumed) ++used;
      result.heatmap.add(pose.cell());
      world::StepOutcome out = env.step(d.action);
      std::vector<float> next = stack.push_and_stack(cache.get(out.new_pose));
      // Running out of actions truncates the episode; it is not a terminal state.
      agent.learn(obs, d.action, out.reward, next, env.reached_goal());
      obs = std::move(next);
      pose = out.new_pose;
      ++global;
      if (observer && observer->wants_snapshots()) {
        observer->after_step(StepSnapshot{setup.session, episode, env.steps(), now, pose, env.score(),
                                          d.action, agent.advice_active(), stack.frame(0)});
      }
    }

    EpisodeRecord rec;
    rec.session = setup.session;
    rec.episode = episode;
    rec.score = env.score();
    rec.steps = env.steps();
    rec.advice_offered = static_cast<int>(queue.total_pushed() - pushed_before);
    rec.advice_used = std::min(used, rec.advice_offered);
    rec.reached_goal = env.reached_goal();
    result.records.push_back(rec);

    streak = rec.reached_goal ? streak + 1 : 0;
    if (setup.stop_after_stable > 0 && streak >= setup.stop_after_stable) break;
  }
  result.global_steps = global;
  return result;
}

std::shared_ptr<const world::GridMap> resolve_map(const ExperimentConfig& cfg) {
  if (cfg.map) return cfg.map;
  return std::make_shared<const world::GridMap>(world::load_map_file(cfg.map_path));
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, StepObserver* observer,
                                const SessionCallback& on_session,
                                std::shared_ptr<agents::PendingAdviceQueue> queue) {
  cfg.validate();
  auto map = resolve_map(cfg);
  ExperimentResult result;
  result.heatmap = VisitHeatmap(map->width(), map->height());

  for (int s = 0; s < cfg.sessions; ++s) {
    const std::uint64_t seed = cfg.session_seed(s);
    auto session_queue = queue ? queue
                               : std::make_shared<agents::PendingAdviceQueue>(
                                     cfg.arbitration.queue_capacity, cfg.arbitration.ttl_steps);
    agents::DqnAgent agent(cfg.agent, cfg.network, cfg.training, cfg.arbitration, seed, session_queue);

    SessionSetup setup;
    setup.map = map;
    setup.palette = cfg.palette;
    setup.camera = cfg.camera;
    setup.frame_stack = cfg.network.frames;
    setup.max_actions = cfg.action_cap();
    if (is_oracle_condition(cfg.condition)) setup.oracle = oracle::preset(cfg.condition, seed ^ kOracleStream);
    setup.session = s;
    setup.episodes = cfg.episodes;
    setup.stop_after_stable = cfg.stop_after_stable;

    SessionResult sr = run_session(setup, agent, *session_queue, observer);
    result.heatmap += sr.heatmap;
    if (on_session) on_session(s, agent, sr);
    result.sessions.push_back(std::move(sr));
  }

  if (!cfg.output_dir.empty()) {
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(cfg.output_dir, ec);
    if (ec) throw OutputError(cfg.output_dir, ec.message());
    const fs::path dir(cfg.output_dir);
    auto emit = [&](const fs::path& p, auto&& writer) {
      writer(p.string());
      result.written_files.push_back(p.string());
    };
    for (std::size_t s = 0; s < result.sessions.size(); ++s) {
      const std::string base = cfg.stem() + "_session" + std::to_string(s);
      const auto& sr = result.sessions[s];
      emit(dir / (base + ".csv"), [&](const std::string& p) { write_records_csv(p, sr.records); });
      emit(dir / (base + "_heatmap.csv"), [&](const std::string& p) { write_heatmap_csv(p, sr.heatmap); });
    }
    emit(dir / (cfg.stem() + "_heatmap.csv"), [&](const std::string& p) { write_heatmap_csv(p, result.heatmap); });
    emit(dir / (cfg.stem() + "_summary.json"),
         [&](const std::string& p) { write_summary_json(p, summarize(cfg, result)); });
  }
  return result;
}

TransferResult transfer_experiment(const ExperimentConfig& cfg, const std::string& checkpoint_path,
                                   double reference_score, int rotations) {
  cfg.validate();
  if (!std::filesystem::exists(checkpoint_path)) {
    throw OutputError(checkpoint_path, "missing checkpoint");
  }
  if (rotations < 0) throw std::invalid_argument("rotations must be >= 0");
  auto map = resolve_map(cfg);
  for (int i = 0; i < rotations; ++i) map = std::make_shared<const world::GridMap>(world::rotate_map_90(*map));

  qnet::NetworkSpec spec = qnet::read_checkpoint_spec(checkpoint_path);
  if (spec.width != cfg.camera.width || spec.height != cfg.camera.height) {
    throw std::invalid_argument("checkpoint input size does not match the camera");
  }
  const std::uint64_t seed = cfg.session_seed(0);
  auto queue = std::make_shared<agents::PendingAdviceQueue>(cfg.arbitration.queue_capacity,
                                                            cfg.arbitration.ttl_steps);
  agents::DqnAgent agent(cfg.agent, spec, cfg.training, cfg.arbitration, seed, queue);
  qnet::load_checkpoint(agent.learner(), checkpoint_path);

  SessionSetup setup;
  setup.map = map;
  setup.palette = cfg.palette;
  setup.camera = cfg.camera;
  setup.frame_stack = spec.frames;
  setup.max_actions = cfg.action_cap();
  if (is_oracle_condition(cfg.condition)) setup.oracle = oracle::preset(cfg.condition, seed ^ kOracleStream);
  setup.episodes = cfg.episodes;
  // A trained agent resumes at the end of its exploration schedule.
  setup.global_step_offset = cfg.training.exploration.decay_steps;

  SessionResult sr = run_session(setup, agent, *queue);
  TransferResult out;
  out.records = std::move(sr.records);
  out.heatmap = std::move(sr.heatmap);
  out.reference_score = reference_score;
  auto scores = scores_of(out.records);
  out.reconvergence_episode = reconvergence_episode(scores, reference_score);
  return out;
}

ScriptedOptimalAgent::ScriptedOptimalAgent(const world::GridMap& map)
    : field_(oracle::compute_policy_field(map)) {}

agents::Decision ScriptedOptimalAgent::act(std::span<const float>, const world::AgentPose& pose, long) {
  auto dir = field_.direction(pose.x, pose.y);
  if (!dir) return {world::Action::kForward, false, agents::DecisionSource::kPolicy};
  return {agents::cardinal_to_action(pose.heading, *dir), false, agents::DecisionSource::kPolicy};
}

}  // namespace advicelab::harness
