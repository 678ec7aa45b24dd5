#include "advicelab/qnet/checkpoint.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

namespace advicelab::qnet {

using nlohmann::json;

namespace {

json spec_to_json(const NetworkSpec& s) {
  return {{"frames", s.frames},
          {"height", s.height},
          {"width", s.width},
          {"conv_channels", s.conv_channels},
          {"dense_widths", s.dense_widths},
          {"outputs", s.outputs}};
}

NetworkSpec spec_from_json(const json& j) {
  NetworkSpec s;
  s.frames = j.at("frames").get<int>();
  s.height = j.at("height").get<int>();
  s.width = j.at("width").get<int>();
  s.conv_channels = j.at("conv_channels").get<std::vector<int>>();
  s.dense_widths = j.at("dense_widths").get<std::vector<int>>();
  s.outputs = j.at("outputs").get<int>();
  return s;
}

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw CheckpointError("cannot open checkpoint: " + path);
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw CheckpointError("malformed checkpoint " + path + ": " + e.what());
  }
  if (j.value("format", "") != "advicelab-checkpoint") {
    throw CheckpointError(path + " is not an advicelab checkpoint");
  }
  if (j.value("version", 0) != kCheckpointVersion) {
    throw CheckpointError("unsupported checkpoint version in " + path);
  }
  return j;
}

}  // namespace

void save_checkpoint(const DqnLearner& learner, const std::string& path) {
  const auto& net = learner.online();
  json tracker_losses = json::array();
  for (const auto& l : learner.tracker().losses()) tracker_losses.push_back(l ? json(*l) : json(nullptr));
  json j = {
      {"format", "advicelab-checkpoint"},
      {"version", kCheckpointVersion},
      {"spec", spec_to_json(net.spec())},
      {"parameters", std::vector<float>(net.parameters().begin(), net.parameters().end())},
      {"running_stats", std::vector<float>(net.running_stats().begin(), net.running_stats().end())},
      {"adam", {{"step", learner.adam().step}, {"m", learner.adam().m}, {"v", learner.adam().v}}},
      {"train_steps", learner.train_steps()},
      {"tracker", {{"losses", tracker_losses}, {"max", learner.tracker().max_loss()}}},
  };
  std::ofstream out(path);
  if (!out) throw CheckpointError("cannot write checkpoint: " + path);
  out << j.dump() << '\n';
  if (!out) throw CheckpointError("short write to checkpoint: " + path);
}

NetworkSpec read_checkpoint_spec(const std::string& path) {
  return spec_from_json(read_json(path).at("spec"));
}

void load_checkpoint(DqnLearner& learner, const std::string& path) {
  json j = read_json(path);
  try {
    NetworkSpec spec = spec_from_json(j.at("spec"));
    if (!(spec == learner.spec())) throw CheckpointError("checkpoint spec differs from learner spec");
    QNetwork<float> net(spec);
    auto params = j.at("parameters").get<std::vector<float>>();
    auto running = j.at("running_stats").get<std::vector<float>>();
    if (params.size() != net.parameter_count() || running.size() != net.running_stats().size()) {
      throw CheckpointError("checkpoint tensor sizes do not match its spec");
    }
    std::copy(params.begin(), params.end(), net.parameters().begin());
    std::copy(running.begin(), running.end(), net.running_stats().begin());
    AdamState<float> adam;
    adam.step = j.at("adam").at("step").get<long>();
    adam.m = j.at("adam").at("m").get<std::vector<float>>();
    adam.v = j.at("adam").at("v").get<std::vector<float>>();
    learner.restore(net, std::move(adam), j.at("train_steps").get<long>());
    std::vector<std::optional<double>> losses;
    for (const auto& l : j.at("tracker").at("losses")) {
      losses.push_back(l.is_null() ? std::nullopt : std::optional<double>(l.get<double>()));
    }
    learner.tracker().restore(std::move(losses), j.at("tracker").at("max").get<double>());
  } catch (const json::exception& e) {
    throw CheckpointError("malformed checkpoint " + path + ": " + e.what());
  }
}

}  // namespace advicelab::qnet
