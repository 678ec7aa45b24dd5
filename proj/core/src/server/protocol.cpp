#include "advicelab/server/protocol.hpp"

#include <boost/archive/iterators/base64_from_binary.hpp>
#include <boost/archive/iterators/binary_from_base64.hpp>
#include <boost/archive/iterators/transform_width.hpp>
#include <nlohmann/json.hpp>

namespace advicelab::server {

using nlohmann::json;

namespace {

const char* command_name(ControlCommand cmd) { return cmd == ControlCommand::kPause ? "pause" : "resume"; }

}  // namespace

Inbound parse_inbound(const std::string& text) {
  json j = json::parse(text, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return ProtocolError{"malformed json"};
  auto type = j.find("type");
  if (type == j.end() || !type->is_string()) return ProtocolError{"missing type"};
  const std::string t = type->get<std::string>();
  if (t == "advice") {
    auto dir = j.find("direction");
    if (dir == j.end() || !dir->is_string()) return ProtocolError{"bad direction"};
    auto h = world::heading_from_string(dir->get<std::string>());
    if (!h) return ProtocolError{"bad direction"};
    return AdviceRequest{*h};
  }
  if (t == "control") {
    auto cmd = j.find("cmd");
    if (cmd != j.end() && cmd->is_string()) {
      if (*cmd == "pause") return ControlRequest{ControlCommand::kPause};
      if (*cmd == "resume") return ControlRequest{ControlCommand::kResume};
    }
    return ProtocolError{"unknown command"};
  }
  return ProtocolError{"unknown type"};
}

std::string encode_state(const StateMessage& msg) {
  json j;
  j["type"] = "state";
  j["episode"] = msg.episode;
  j["step"] = msg.step;
  j["pose"] = {{"x", msg.pose.x}, {"y", msg.pose.y}, {"heading", world::to_string(msg.pose.heading)}};
  j["score"] = msg.score;
  j["lastAction"] = world::to_string(msg.last_action);
  j["adviceActive"] = msg.advice_active;
  j["frame"] = {{"w", msg.frame_width}, {"h", msg.frame_height}, {"b64", base64_encode(msg.frame)}};
  j["mapDigest"] = msg.map_digest;
  return j.dump();
}

std::string encode_error(const std::string& reason) { return json{{"type", "error"}, {"reason", reason}}.dump(); }

std::string encode_control_ack(ControlCommand cmd, bool paused) {
  return json{{"type", "ack"}, {"cmd", command_name(cmd)}, {"paused", paused}}.dump();
}

std::string encode_advice_ack(world::Heading direction) {
  return json{{"type", "ack"}, {"cmd", "advice"}, {"direction", world::to_string(direction)}}.dump();
}

std::string encode_hello(bool controller, const world::GridMap* map) {
  json j;
  j["type"] = "hello";
  j["role"] = controller ? "controller" : "observer";
  if (map) {
    j["mapDigest"] = map->digest();
    json rows = json::array();
    std::string text = map->grid_text();
    std::size_t start = 0;
    while (start < text.size()) {
      std::size_t end = text.find('\n', start);
      if (end == std::string::npos) end = text.size();
      rows.push_back(text.substr(start, end - start));
      start = end + 1;
    }
    j["map"] = {{"width", map->width()}, {"height", map->height()}, {"rows", rows}};
  }
  return j.dump();
}

std::string base64_encode(std::span<const std::uint8_t> bytes) {
  using namespace boost::archive::iterators;
  using It = base64_from_binary<transform_width<const std::uint8_t*, 6, 8>>;
  std::string out(It(bytes.data()), It(bytes.data() + bytes.size()));
  out.append((3 - bytes.size() % 3) % 3, '=');
  return out;
}

std::vector<std::uint8_t> base64_decode(const std::string& text) {
  using namespace boost::archive::iterators;
  using It = transform_width<binary_from_base64<std::string::const_iterator>, 8, 6>;
  std::size_t pad = 0;
  while (pad < text.size() && pad < 2 && text[text.size() - 1 - pad] == '=') ++pad;
  if (text.size() % 4 != 0) throw std::invalid_argument("base64 length must be a multiple of 4");
  std::string body = text.substr(0, text.size() - pad);
  body.append(pad, 'A');
  std::vector<std::uint8_t> out(It(body.cbegin()), It(body.cend()));
  out.resize(out.size() - pad);
  return out;
}

}  // namespace advicelab::server
