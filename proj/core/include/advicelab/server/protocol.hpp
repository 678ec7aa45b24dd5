#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "advicelab/world/environment.hpp"

namespace advicelab::server {

struct StateMessage {
  int episode = 0;
  int step = 0;
  world::AgentPose pose;
  double score = 0.0;
  world::Action last_action = world::Action::kForward;
  bool advice_active = false;
  int frame_width = 0;
  int frame_height = 0;
  std::vector<std::uint8_t> frame;  // row-major grayscale
  std::string map_digest;
};

struct AdviceRequest {
  world::Heading direction;
};

enum class ControlCommand { kPause, kResume };

struct ControlRequest {
  ControlCommand cmd;
};

struct ProtocolError {
  std::string reason;
};

using Inbound = std::variant<AdviceRequest, ControlRequest, ProtocolError>;

// Parses one inbound text frame. Never throws: anything unusable becomes a
// ProtocolError carrying the reply reason.
Inbound parse_inbound(const std::string& text);

std::string encode_state(const StateMessage& msg);
std::string encode_error(const std::string& reason);
std::string encode_control_ack(ControlCommand cmd, bool paused);
std::string encode_advice_ack(world::Heading direction);
// Sent once per connection: the client's role plus the map layout, so a
// viewer can cache the grid by digest.
std::string encode_hello(bool controller, const world::GridMap* map);

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

}  // namespace advicelab::server
