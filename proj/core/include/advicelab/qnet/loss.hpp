#pragma once

#include <span>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace advicelab::qnet {

enum class LossKind { kSquaredLogError, kHuber };

std::string_view to_string(LossKind kind);
LossKind loss_kind_from_string(std::string_view text);

struct LossConfig {
  LossKind kind = LossKind::kSquaredLogError;
  // Squared-log-error compares ln(1 + shift + max(x, -shift)).
  double shift = 1.0;
  double huber_delta = 1.0;
};

struct ElementLoss {
  double value = 0.0;
  double grad = 0.0;  // d value / d pred
};

ElementLoss element_loss(double pred, double target, const LossConfig& cfg);

struct BatchLoss {
  double value = 0.0;
  std::vector<double> sample_losses;  // on the same scale as value
  std::vector<double> grads;  // d value / d pred_i
};

// Squared-log-error reduces as the root of the mean (RMSLE); huber reduces
// as the mean. Throws std::domain_error on non-finite input.
BatchLoss batch_loss(std::span<const double> preds, std::span<const double> targets,
                     const LossConfig& cfg);

}  // namespace advicelab::qnet
