// advicelab: train advised DQN agents in the aliased gridworld and analyse the runs.

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>

#include "advicelab/harness/experiment.hpp"
#include "advicelab/harness/output.hpp"
#include "advicelab/qnet/checkpoint.hpp"
#include "advicelab/render/raycaster.hpp"
#include "advicelab/server/advice_server.hpp"

using namespace advicelab;

namespace {

struct CommonOptions {
  std::string agent = "naa";
  std::string condition = "hfha";
  std::string map = "maps/desk12.map";
  std::string palette = "aliased";
  int friction = 2;
  int episodes = 250;
  int sessions = 5;
  std::uint64_t seed = 1;
  std::vector<std::uint64_t> seeds;
  std::string out;
  int max_actions = 0;
  int stop_after_stable = 0;

  int frames = 4;
  int resolution = 32;
  std::vector<int> conv = {8, 16};
  std::vector<int> dense = {64};
  double lr = 1e-4;
  int batch = 32;
  int train_every = 1;
  int target_sync = 500;
  std::size_t replay = 10000;
  std::size_t min_replay = 500;
  long eps_decay = 20000;
  double eps_end = 0.05;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--agent", o.agent, "baseline | fa | naa")->check(CLI::IsMember({"baseline", "fa", "naa"}));
  cmd->add_option("--condition", o.condition, "hfha | hfla | lfha | lfla | human | none")
      ->check(CLI::IsMember({"hfha", "hfla", "lfha", "lfla", "human", "none"}));
  cmd->add_option("--map", o.map, "map file")->check(CLI::ExistingFile);
  cmd->add_option("--palette", o.palette, "aliased | landmarked")->check(CLI::IsMember({"aliased", "landmarked"}));
  cmd->add_option("--friction", o.friction, "NAA forward recital steps")->check(CLI::NonNegativeNumber);
  cmd->add_option("--episodes", o.episodes)->check(CLI::PositiveNumber);
  cmd->add_option("--sessions", o.sessions)->check(CLI::PositiveNumber);
  cmd->add_option("--seed", o.seed, "base seed for derived session seeds");
  cmd->add_option("--seeds", o.seeds, "explicit per-session seeds");
  cmd->add_option("--out", o.out, "output directory");
  cmd->add_option("--max-actions", o.max_actions, "override the per-agent action cap");
  cmd->add_option("--stop-after-stable", o.stop_after_stable,
                  "end a session after this many consecutive goal episodes");
  cmd->add_option("--frames", o.frames, "frame stack depth")->check(CLI::PositiveNumber);
  cmd->add_option("--resolution", o.resolution, "square observation size")->check(CLI::PositiveNumber);
  cmd->add_option("--conv", o.conv, "conv block channel counts");
  cmd->add_option("--dense", o.dense, "hidden dense widths");
  cmd->add_option("--lr", o.lr);
  cmd->add_option("--batch", o.batch)->check(CLI::PositiveNumber);
  cmd->add_option("--train-every", o.train_every)->check(CLI::PositiveNumber);
  cmd->add_option("--target-sync", o.target_sync, "train steps between target syncs (0 = none)");
  cmd->add_option("--replay", o.replay)->check(CLI::PositiveNumber);
  cmd->add_option("--min-replay", o.min_replay);
  cmd->add_option("--eps-decay", o.eps_decay, "steps to decay epsilon");
  cmd->add_option("--eps-end", o.eps_end);
}

harness::ExperimentConfig to_config(const CommonOptions& o) {
  harness::ExperimentConfig cfg;
  cfg.agent = *agents::agent_kind_from_string(o.agent);
  cfg.condition = *oracle::condition_from_string(o.condition);
  cfg.map_path = o.map;
  cfg.palette = *render::aliasing_mode_from_string(o.palette);
  cfg.episodes = o.episodes;
  cfg.sessions = o.sessions;
  cfg.base_seed = o.seed;
  cfg.seeds = o.seeds;
  cfg.output_dir = o.out;
  if (o.max_actions > 0) cfg.max_actions = o.max_actions;
  cfg.stop_after_stable = o.stop_after_stable;
  cfg.camera = render::CameraConfig{o.resolution, o.resolution, 90.0};
  cfg.network.frames = o.frames;
  cfg.network.height = cfg.network.width = o.resolution;
  cfg.network.conv_channels = o.conv;
  cfg.network.dense_widths = o.dense;
  cfg.training.adam.learning_rate = o.lr;
  cfg.training.batch_size = o.batch;
  cfg.training.train_every = o.train_every;
  cfg.training.target_sync = o.target_sync;
  cfg.training.replay_capacity = o.replay;
  cfg.training.min_replay = o.min_replay;
  cfg.training.exploration.decay_steps = o.eps_decay;
  cfg.training.exploration.end = o.eps_end;
  cfg.arbitration.friction = o.friction;
  return cfg;
}

void print_summary(const harness::ExperimentSummary& s) {
  std::printf("%s/%s: mean score %.1f (sd %.1f), goal rate %.3f, advice offered %.1f used %.1f per episode\n",
              s.agent.c_str(), s.condition.c_str(), s.mean_score, s.stddev_score, s.goal_rate,
              s.mean_advice_offered, s.mean_advice_used);
  for (std::size_t i = 0; i < s.episodes_to_stable_goal.size(); ++i) {
    const auto& e = s.episodes_to_stable_goal[i];
    std::printf("  session %zu: %s\n", i, e ? ("stable goal at episode " + std::to_string(*e)).c_str()
                                            : "no stable goal");
  }
}

int run_train(const CommonOptions& o, int serve_port, const std::string& checkpoint) {
  harness::ExperimentConfig cfg = to_config(o);
  if (serve_port >= 0) cfg.serve_port = serve_port;
  auto map = harness::resolve_map(cfg);
  cfg.map = map;

  std::shared_ptr<agents::PendingAdviceQueue> queue;
  std::unique_ptr<server::AdviceServer> srv;
  if (cfg.serve_port) {
    queue = std::make_shared<agents::PendingAdviceQueue>(cfg.arbitration.queue_capacity, cfg.arbitration.ttl_steps);
    server::ServerConfig sc;
    sc.port = *cfg.serve_port;
    srv = std::make_unique<server::AdviceServer>(sc, queue, map);
    srv->start();
    std::fprintf(stderr, "advice server listening on ws://127.0.0.1:%d\n", srv->port());
  }

  harness::SessionCallback on_session;
  if (!checkpoint.empty()) {
    on_session = [&](int session, agents::DqnAgent& agent, const harness::SessionResult& result) {
      if (session != 0) return;
      qnet::save_checkpoint(agent.learner(), checkpoint);
      auto scores = harness::scores_of(result.records);
      harness::write_checkpoint_meta(checkpoint, harness::moving_average(scores).back(),
                                     harness::episodes_to_stable_goal(result.records));
    };
  }
  auto result = harness::run_experiment(cfg, srv.get(), on_session, queue);
  if (srv) srv->stop();
  print_summary(harness::summarize(cfg, result));
  for (const auto& f : result.written_files) std::printf("wrote %s\n", f.c_str());
  return 0;
}

int run_heatmap(const std::string& input, const std::string& map_path) {
  auto heat = harness::read_heatmap_csv(input);
  std::int64_t peak = 1;
  for (auto c : heat.counts()) peak = std::max(peak, c);
  static const char* kRamp = " .:-=+*#%@";
  for (int y = 0; y < heat.height(); ++y) {
    for (int x = 0; x < heat.width(); ++x) {
      int level = static_cast<int>(9.0 * static_cast<double>(heat.at(x, y)) / static_cast<double>(peak) + 0.5);
      std::putchar(kRamp[level]);
    }
    std::putchar('\n');
  }
  std::printf("total visits %lld\n", static_cast<long long>(heat.total()));
  if (!map_path.empty()) {
    auto map = world::load_map_file(map_path);
    std::printf("corridor second-half share %.4f\n", harness::corridor_second_half_mass(heat, map));
  }
  return 0;
}

int run_kl(const std::string& p_path, const std::string& q_path, const std::string& out) {
  auto p = harness::read_heatmap_csv(p_path);
  auto q = harness::read_heatmap_csv(q_path);
  std::string json = harness::format_kl_json(p_path, q_path, harness::kl_divergence(p, q),
                                             harness::kl_divergence(q, p));
  if (out.empty()) {
    std::cout << json;
  } else {
    harness::write_text_file(out, json);
  }
  return 0;
}

int run_transfer(const CommonOptions& o, const std::string& checkpoint, int rotations) {
  harness::ExperimentConfig cfg = to_config(o);
  auto spec = qnet::read_checkpoint_spec(checkpoint);
  cfg.network = spec;
  cfg.camera = render::CameraConfig{spec.width, spec.height, 90.0};
  double reference = harness::read_checkpoint_reference(checkpoint);
  auto result = harness::transfer_experiment(cfg, checkpoint, reference, rotations);
  std::string json = harness::format_transfer_json(result, rotations);
  std::cout << json;
  if (!o.out.empty()) {
    std::filesystem::create_directories(o.out);
    const std::string stem = cfg.stem() + "_transfer";
    harness::write_records_csv(o.out + "/" + stem + ".csv", result.records);
    harness::write_heatmap_csv(o.out + "/" + stem + "_heatmap.csv", result.heatmap);
    harness::write_text_file(o.out + "/" + stem + ".json", json);
  }
  return 0;
}

int run_aliasing(const std::string& map_path, const std::string& palette, int resolution) {
  auto map = world::load_map_file(map_path);
  render::CameraConfig camera{resolution, resolution, 90.0};
  for (auto mode : {render::AliasingMode::kAliased, render::AliasingMode::kLandmarked}) {
    if (palette != "both" && palette != render::to_string(mode)) continue;
    double index = render::aliasing_index(map, render::TexturePalette(mode), camera);
    std::printf("%s %.6f\n", std::string(render::to_string(mode)).c_str(), index);
  }
  return 0;
}

int run_render(const std::string& map_path, const std::string& palette, int resolution, int x, int y,
               const std::string& heading, const std::string& out) {
  auto map = world::load_map_file(map_path);
  auto h = world::heading_from_string(heading);
  if (!h) throw std::invalid_argument("unknown heading " + heading);
  world::AgentPose pose{x, y, *h};
  if (x < 0 && y < 0) pose = map.spawn();
  auto frame = render::render(map, pose, render::TexturePalette(*render::aliasing_mode_from_string(palette)),
                              render::CameraConfig{resolution, resolution, 90.0});
  render::write_pgm(frame, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"advicelab: action advice for DQN agents in an aliased gridworld"};
  app.set_config("--config", "", "read options from an INI/TOML file");
  app.require_subcommand(1);

  CommonOptions train_opts;
  int serve_port = -1;
  std::string checkpoint;
  auto* train = app.add_subcommand("train", "run training sessions and write metrics");
  add_common(train, train_opts);
  train->add_option("--serve-port", serve_port, "serve telemetry and accept advice over WebSocket");
  train->add_option("--checkpoint", checkpoint, "save the first session's learner here");

  std::string heat_input, heat_map;
  auto* heatmap = app.add_subcommand("heatmap", "print a visit heatmap");
  heatmap->add_option("input", heat_input)->required()->check(CLI::ExistingFile);
  heatmap->add_option("--map", heat_map, "map file, to report corridor share")->check(CLI::ExistingFile);

  std::string kl_p, kl_q, kl_out;
  auto* kl = app.add_subcommand("kl", "KL divergence between two heatmaps, both directions");
  kl->add_option("p", kl_p)->required()->check(CLI::ExistingFile);
  kl->add_option("q", kl_q)->required()->check(CLI::ExistingFile);
  kl->add_option("--out", kl_out);

  CommonOptions transfer_opts;
  std::string transfer_ckpt;
  int rotations = 1;
  auto* transfer = app.add_subcommand("transfer", "continue a trained learner on the rotated map");
  add_common(transfer, transfer_opts);
  transfer->add_option("--checkpoint", transfer_ckpt)->required()->check(CLI::ExistingFile);
  transfer->add_option("--rotations", rotations)->check(CLI::NonNegativeNumber);

  std::string alias_map = "maps/town20.map", alias_palette = "both";
  int alias_res = 32;
  auto* alias = app.add_subcommand("aliasing-index", "fraction of near-identical state pairs");
  alias->add_option("--map", alias_map)->check(CLI::ExistingFile);
  alias->add_option("--palette", alias_palette)->check(CLI::IsMember({"aliased", "landmarked", "both"}));
  alias->add_option("--resolution", alias_res)->check(CLI::PositiveNumber);

  std::string render_map = "maps/desk12.map", render_palette = "aliased", render_heading = "east",
              render_out = "frame.pgm";
  int render_res = 32, render_x = -1, render_y = -1;
  auto* rend = app.add_subcommand("render", "write one first-person frame as PGM");
  rend->add_option("--map", render_map)->check(CLI::ExistingFile);
  rend->add_option("--palette", render_palette)->check(CLI::IsMember({"aliased", "landmarked"}));
  rend->add_option("--resolution", render_res)->check(CLI::PositiveNumber);
  rend->add_option("--x", render_x, "defaults to the spawn pose");
  rend->add_option("--y", render_y);
  rend->add_option("--heading", render_heading);
  rend->add_option("--out", render_out);

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) return run_train(train_opts, serve_port, checkpoint);
    if (*heatmap) return run_heatmap(heat_input, heat_map);
    if (*kl) return run_kl(kl_p, kl_q, kl_out);
    if (*transfer) return run_transfer(transfer_opts, transfer_ckpt, rotations);
    if (*alias) return run_aliasing(alias_map, alias_palette, alias_res);
    if (*rend) return run_render(render_map, render_palette, render_res, render_x, render_y, render_heading,
                                 render_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "advicelab: %s\n", e.what());
    return 1;
  }
  return 0;
}
