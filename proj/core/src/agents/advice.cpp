#include "advicelab/agents/advice.hpp"

#include <stdexcept>

namespace advicelab::agents {

std::string_view to_string(AdviceSource source) {
  return source == AdviceSource::kOracle ? "oracle" : "human";
}

PendingAdviceQueue::PendingAdviceQueue(std::size_t capacity, long ttl_steps)
    : capacity_(capacity), ttl_(ttl_steps) {
  if (capacity == 0) throw std::invalid_argument("advice queue capacity must be positive");
  if (ttl_steps < 0) throw std::invalid_argument("advice ttl must be non-negative");
}

void PendingAdviceQueue::push(const AdviceEvent& event) {
  std::lock_guard lock(mu_);
  events_.push_back(event);
  pushed_.fetch_add(1, std::memory_order_relaxed);
  while (events_.size() > capacity_) events_.pop_front();
}

void PendingAdviceQueue::expire_locked(long now) {
  while (!events_.empty() && now - events_.front().issued_at > ttl_) events_.pop_front();
}

std::optional<AdviceEvent> PendingAdviceQueue::pop(long now) {
  std::lock_guard lock(mu_);
  expire_locked(now);
  if (events_.empty()) return std::nullopt;
  AdviceEvent e = events_.front();
  events_.pop_front();
  return e;
}

bool PendingAdviceQueue::has_pending(long now) { return size(now) > 0; }

std::size_t PendingAdviceQueue::size(long now) {
  std::lock_guard lock(mu_);
  expire_locked(now);
  return events_.size();
}

void PendingAdviceQueue::clear() {
  std::lock_guard lock(mu_);
  events_.clear();
}

std::vector<AdviceEvent> PendingAdviceQueue::snapshot(long now) {
  std::lock_guard lock(mu_);
  expire_locked(now);
  return {events_.begin(), events_.end()};
}

world::Action cardinal_to_action(world::Heading heading, world::Heading direction) {
  int diff = (static_cast<int>(direction) - static_cast<int>(heading) + 4) % 4;
  switch (diff) {
    case 0: return world::Action::kForward;
    case 1: return world::Action::kTurnRight;
    case 2: return world::Action::kTurnAround;
    default: return world::Action::kTurnLeft;
  }
}

}  // namespace advicelab::agents
