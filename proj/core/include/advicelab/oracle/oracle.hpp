#pragma once

#include <optional>
#include <random>
#include <string_view>
#include <vector>

#include "advicelab/agents/advice.hpp"
#include "advicelab/world/grid_map.hpp"

namespace advicelab::oracle {

struct OracleConfig {
  double frequency = 0.05;  // per-step probability of emitting advice
  double accuracy = 1.0;    // probability that emitted advice is optimal
  std::uint64_t seed = 0;

  void validate() const;
};

// Experimental conditions. kHuman disables the oracle in favour of live
// advice; kNone runs without any advice source.
enum class Condition { kHfha, kHfla, kLfha, kLfla, kHuman, kNone };

std::string_view to_string(Condition c);
std::optional<Condition> condition_from_string(std::string_view text);
// Preset frequency/accuracy for oracle conditions; nullopt for human/none.
std::optional<OracleConfig> preset(Condition c, std::uint64_t seed = 0);

// Optimal cardinal direction per cell, from a reverse BFS rooted at the goal.
class PolicyField {
 public:
  PolicyField(int width, int height, std::vector<std::optional<world::Heading>> directions,
              std::vector<int> distances);

  int width() const { return width_; }
  int height() const { return height_; }
  // nullopt at the goal itself and at cells that cannot reach it.
  std::optional<world::Heading> direction(int x, int y) const;
  // Steps to the goal, -1 when unreachable or not traversable.
  int distance(int x, int y) const;
  bool reachable(int x, int y) const { return distance(x, y) >= 0; }

 private:
  int width_;
  int height_;
  std::vector<std::optional<world::Heading>> directions_;
  std::vector<int> distances_;
};

// Ties between equally short neighbours resolve north, east, south, west.
PolicyField compute_policy_field(const world::GridMap& map);

// Number of moves needed to reach the goal by following the field; nullopt
// if the walk leaves the field or loops.
std::optional<int> follow_field(const world::GridMap& map, const PolicyField& field, world::Cell from);

// Bernoulli(frequency) emission; emitted advice is the field direction with
// probability accuracy, else uniform over the four cardinals.
std::optional<agents::AdviceEvent> advise(const PolicyField& field, const world::AgentPose& pose,
                                          const OracleConfig& cfg, std::mt19937_64& rng,
                                          long now = 0);

}  // namespace advicelab::oracle
