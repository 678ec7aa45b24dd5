#include "advicelab/oracle/oracle.hpp"

#include <stdexcept>

namespace advicelab::oracle {

using world::Heading;

void OracleConfig::validate() const {
  if (frequency < 0.0 || frequency > 1.0) throw std::invalid_argument("oracle frequency must lie in [0, 1]");
  if (accuracy < 0.0 || accuracy > 1.0) throw std::invalid_argument("oracle accuracy must lie in [0, 1]");
}

std::string_view to_string(Condition c) {
  switch (c) {
    case Condition::kHfha: return "hfha";
    case Condition::kHfla: return "hfla";
    case Condition::kLfha: return "lfha";
    case Condition::kLfla: return "lfla";
    case Condition::kHuman: return "human";
    case Condition::kNone: return "none";
  }
  return "?";
}

std::optional<Condition> condition_from_string(std::string_view text) {
  for (Condition c : {Condition::kHfha, Condition::kHfla, Condition::kLfha, Condition::kLfla,
                      Condition::kHuman, Condition::kNone}) {
    if (to_string(c) == text) return c;
  }
  return std::nullopt;
}

std::optional<OracleConfig> preset(Condition c, std::uint64_t seed) {
  constexpr double kHighFrequency = 0.05, kLowFrequency = 0.01;
  constexpr double kHighAccuracy = 1.0, kLowAccuracy = 0.5;
  switch (c) {
    case Condition::kHfha: return OracleConfig{kHighFrequency, kHighAccuracy, seed};
    case Condition::kHfla: return OracleConfig{kHighFrequency, kLowAccuracy, seed};
    case Condition::kLfha: return OracleConfig{kLowFrequency, kHighAccuracy, seed};
    case Condition::kLfla: return OracleConfig{kLowFrequency, kLowAccuracy, seed};
    case Condition::kHuman:
    case Condition::kNone: return std::nullopt;
  }
  return std::nullopt;
}

PolicyField::PolicyField(int width, int height, std::vector<std::optional<Heading>> directions,
                         std::vector<int> distances)
    : width_(width), height_(height), directions_(std::move(directions)), distances_(std::move(distances)) {
  const auto n = static_cast<std::size_t>(width) * height;
  if (directions_.size() != n || distances_.size() != n) {
    throw std::invalid_argument("policy field size mismatch");
  }
}

std::optional<Heading> PolicyField::direction(int x, int y) const {
  if (x < 0 || y < 0 || x >= width_ || y >= height_) return std::nullopt;
  return directions_[static_cast<std::size_t>(y) * width_ + x];
}

int PolicyField::distance(int x, int y) const {
  if (x < 0 || y < 0 || x >= width_ || y >= height_) return -1;
  return distances_[static_cast<std::size_t>(y) * width_ + x];
}

PolicyField compute_policy_field(const world::GridMap& map) {
  // The grid graph is undirected, so BFS from the goal gives distances to it.
  std::vector<int> dist = world::bfs_distances(map, map.goal());
  std::vector<std::optional<Heading>> dirs(dist.size());
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      int d = dist[map.index(x, y)];
      if (d <= 0) continue;
      for (Heading h : world::kAllHeadings) {
        world::Cell step = world::heading_delta(h);
        int nx = x + step.x, ny = y + step.y;
        if (map.traversable(nx, ny) && dist[map.index(nx, ny)] == d - 1) {
          dirs[map.index(x, y)] = h;
          break;
        }
      }
    }
  }
  return PolicyField(map.width(), map.height(), std::move(dirs), std::move(dist));
}

std::optional<int> follow_field(const world::GridMap& map, const PolicyField& field, world::Cell from) {
  world::Cell c = from;
  const int limit = map.width() * map.height();
  for (int moves = 0; moves <= limit; ++moves) {
    if (c == map.goal()) return moves;
    auto h = field.direction(c.x, c.y);
    if (!h) return std::nullopt;
    world::Cell d = world::heading_delta(*h);
    c = {c.x + d.x, c.y + d.y};
    if (!map.traversable(c.x, c.y)) return std::nullopt;
  }
  return std::nullopt;
}

std::optional<agents::AdviceEvent> advise(const PolicyField& field, const world::AgentPose& pose,
                                          const OracleConfig& cfg, std::mt19937_64& rng, long now) {
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  if (!(coin(rng) < cfg.frequency)) return std::nullopt;
  auto best = field.direction(pose.x, pose.y);
  Heading dir;
  if (best && coin(rng) < cfg.accuracy) {
    dir = *best;
  } else {
    std::uniform_int_distribution<int> pick(0, 3);
    dir = static_cast<Heading>(pick(rng));
  }
  return agents::AdviceEvent{dir, now, agents::AdviceSource::kOracle};
}

}  // namespace advicelab::oracle
