#pragma once

#include <stdexcept>
#include <string>

#include "advicelab/qnet/trainer.hpp"

namespace advicelab::qnet {

inline constexpr int kCheckpointVersion = 1;

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Structured-text (JSON) dump of the network spec, parameters, running
// statistics, Adam moments and confidence tracker.
void save_checkpoint(const DqnLearner& learner, const std::string& path);

// Restores weights, optimizer and tracker into a learner built with the same spec.
void load_checkpoint(DqnLearner& learner, const std::string& path);

// Reads only the spec, so a caller can build a matching learner first.
NetworkSpec read_checkpoint_spec(const std::string& path);

}  // namespace advicelab::qnet
