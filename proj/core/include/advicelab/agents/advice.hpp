#pragma once

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <deque>
#include <mutex>
#include <optional>
#include <string_view>
#include <vector>

#include "advicelab/world/environment.hpp"

namespace advicelab::agents {

enum class AdviceSource { kOracle, kHuman };

std::string_view to_string(AdviceSource source);

struct AdviceEvent {
  world::Heading direction = world::Heading::kNorth;
  long issued_at = 0;  // global step index
  AdviceSource source = AdviceSource::kOracle;
  friend bool operator==(const AdviceEvent&, const AdviceEvent&) = default;
};

// FIFO of pending advice shared between one producer (oracle loop or advice
// server) and the agent thread. When full, the oldest event is dropped.
// Events older than ttl_steps are discarded on access.
class PendingAdviceQueue {
 public:
  explicit PendingAdviceQueue(std::size_t capacity = 5, long ttl_steps = 20);

  std::size_t capacity() const { return capacity_; }
  long ttl_steps() const { return ttl_; }

  void push(const AdviceEvent& event);
  std::optional<AdviceEvent> pop(long now);
  bool has_pending(long now);
  std::size_t size(long now);
  void clear();
  std::vector<AdviceEvent> snapshot(long now);
  // Events ever pushed, including ones later dropped or expired.
  std::uint64_t total_pushed() const { return pushed_.load(std::memory_order_relaxed); }

 private:
  void expire_locked(long now);

  std::size_t capacity_;
  long ttl_;
  std::mutex mu_;
  std::deque<AdviceEvent> events_;
  std::atomic<std::uint64_t> pushed_{0};
};

// Cardinal advice relative to the current heading: same direction walks
// forward, otherwise the single turn that faces the advised direction.
world::Action cardinal_to_action(world::Heading heading, world::Heading direction);

}  // namespace advicelab::agents
