#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <vector>

namespace advicelab::qnet {

// Observations are stored at 8 bits per value. Rendered frames are already
// quantized to multiples of 1/255, so the round trip is exact for them.
using PackedObservation = std::vector<std::uint8_t>;

PackedObservation pack_observation(std::span<const float> obs);
void unpack_observation(const PackedObservation& packed, std::span<float> out);

struct Transition {
  PackedObservation observation;
  int action = 0;
  float reward = 0.0f;  // already divided by the reward scale
  PackedObservation next_observation;
  bool terminal = false;
};

class InsufficientReplay : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Fixed-capacity ring; the oldest transition is overwritten when full.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  std::size_t capacity() const { return capacity_; }
  std::size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

  void push(Transition t);
  const Transition& at(std::size_t i) const { return items_.at(i); }

  // Uniform sampling with replacement.
  std::vector<std::size_t> sample_indices(std::size_t batch, std::mt19937_64& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> items_;
};

}  // namespace advicelab::qnet
