#include "advicelab/qnet/replay.hpp"

#include <algorithm>
#include <cmath>

namespace advicelab::qnet {

PackedObservation pack_observation(std::span<const float> obs) {
  PackedObservation out(obs.size());
  std::transform(obs.begin(), obs.end(), out.begin(), [](float v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
  });
  return out;
}

void unpack_observation(const PackedObservation& packed, std::span<float> out) {
  if (out.size() != packed.size()) throw std::invalid_argument("unpack_observation: size mismatch");
  for (std::size_t i = 0; i < packed.size(); ++i) out[i] = static_cast<float>(packed[i]) / 255.0f;
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw std::invalid_argument("replay capacity must be positive");
  items_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::push(Transition t) {
  if (items_.size() < capacity_) {
    items_.push_back(std::move(t));
  } else {
    items_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t batch, std::mt19937_64& rng) const {
  if (items_.empty()) throw InsufficientReplay("cannot sample from an empty replay buffer");
  std::uniform_int_distribution<std::size_t> pick(0, items_.size() - 1);
  std::vector<std::size_t> out(batch);
  for (auto& i : out) i = pick(rng);
  return out;
}

}  // namespace advicelab::qnet
