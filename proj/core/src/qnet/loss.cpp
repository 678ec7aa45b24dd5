#include "advicelab/qnet/loss.hpp"

#include <cmath>
#include <string>

namespace advicelab::qnet {

std::string_view to_string(LossKind kind) {
  return kind == LossKind::kSquaredLogError ? "squared-log-error" : "huber";
}

LossKind loss_kind_from_string(std::string_view text) {
  if (text == "squared-log-error" || text == "msle") return LossKind::kSquaredLogError;
  if (text == "huber") return LossKind::kHuber;
  throw std::invalid_argument("unknown loss kind: " + std::string(text));
}

ElementLoss element_loss(double pred, double target, const LossConfig& cfg) {
  if (!std::isfinite(pred) || !std::isfinite(target)) {
    throw std::domain_error("loss received a non-finite value");
  }
  ElementLoss out;
  if (cfg.kind == LossKind::kSquaredLogError) {
    const double s = cfg.shift;
    const double p = 1.0 + s + std::max(pred, -s);
    const double t = 1.0 + s + std::max(target, -s);
    const double diff = std::log(p) - std::log(t);
    out.value = diff * diff;
    out.grad = pred > -s ? 2.0 * diff / p : 0.0;
  } else {
    const double e = pred - target;
    const double a = std::fabs(e);
    if (a <= cfg.huber_delta) {
      out.value = 0.5 * e * e;
      out.grad = e;
    } else {
      out.value = cfg.huber_delta * (a - 0.5 * cfg.huber_delta);
      out.grad = e > 0 ? cfg.huber_delta : -cfg.huber_delta;
    }
  }
  return out;
}

BatchLoss batch_loss(std::span<const double> preds, std::span<const double> targets,
                     const LossConfig& cfg) {
  if (preds.size() != targets.size() || preds.empty()) {
    throw std::invalid_argument("batch_loss needs equal-length, non-empty inputs");
  }
  const double n = static_cast<double>(preds.size());
  BatchLoss out;
  out.sample_losses.resize(preds.size());
  out.grads.resize(preds.size());
  double mean = 0.0;
  for (std::size_t i = 0; i < preds.size(); ++i) {
    ElementLoss e = element_loss(preds[i], targets[i], cfg);
    out.sample_losses[i] = e.value;
    out.grads[i] = e.grad / n;
    mean += e.value / n;
  }
  if (cfg.kind == LossKind::kSquaredLogError) {
    out.value = std::sqrt(mean);
    // Per-sample losses use the same root, i.e. the absolute log error.
    for (double& l : out.sample_losses) l = std::sqrt(l);
    const double scale = out.value > 0.0 ? 0.5 / out.value : 0.0;
    for (double& g : out.grads) g *= scale;
  } else {
    out.value = mean;
  }
  return out;
}

}  // namespace advicelab::qnet
