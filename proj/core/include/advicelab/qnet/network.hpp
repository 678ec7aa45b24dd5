#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace advicelab::qnet {

// Input is frames x height x width. Each conv stage is
// conv3x3 (same padding) -> relu -> batch norm -> 2x2 max pool.
// Dense stages are relu layers; the final linear layer has `outputs` units.
struct NetworkSpec {
  int frames = 4;
  int height = 32;
  int width = 32;
  std::vector<int> conv_channels = {8, 16};
  std::vector<int> dense_widths = {64};
  int outputs = 4;

  std::size_t input_size() const {
    return static_cast<std::size_t>(frames) * height * width;
  }
  // Throws std::invalid_argument on an unusable spec.
  void validate() const;
  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;
};

class ShapeMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

class NumericalDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Mode {
  kTrain,      // batch statistics; running statistics updated
  kTrainFrozen,  // batch statistics; running statistics left alone
  kInference,  // running statistics
};

inline constexpr double kBatchNormEps = 1e-5;
inline constexpr double kBatchNormMomentum = 0.99;

// Offsets of each tensor inside the flat parameter vector.
struct ConvSlots {
  std::size_t weight, bias, gamma, beta;
  int in_channels, out_channels;
  int in_height, in_width;    // spatial size of the stage input
  int out_height, out_width;  // after pooling
};
struct DenseSlots {
  std::size_t weight, bias;
  int inputs, outputs;
};

template <class T>
struct Workspace;

template <class T>
class QNetwork {
 public:
  explicit QNetwork(NetworkSpec spec);

  const NetworkSpec& spec() const { return spec_; }
  std::size_t parameter_count() const { return params_.size(); }
  std::span<T> parameters() { return params_; }
  std::span<const T> parameters() const { return params_; }
  // Per conv stage: running mean then running variance, out_channels each.
  std::span<T> running_stats() { return running_; }
  std::span<const T> running_stats() const { return running_; }
  const std::vector<ConvSlots>& conv_slots() const { return conv_; }
  const std::vector<DenseSlots>& dense_slots() const { return dense_; }

  // He-uniform weights, zero biases, unit BN scale, zero BN shift.
  void init_he_uniform(std::mt19937_64& rng);
  void copy_from(const QNetwork& other);

  // Returns batch x outputs values. The workspace, when given, receives the
  // activations needed by backward().
  std::vector<T> forward(std::span<const T> inputs, int batch, Mode mode,
                         Workspace<T>* ws = nullptr);
  std::vector<T> forward(std::span<const T> inputs, int batch) const;
  // Inference through caller-owned scratch buffers (no allocation once warm).
  std::vector<T> forward(std::span<const T> inputs, int batch, Workspace<T>& scratch) const;

  // Accumulates d(loss)/d(params) into grad (same size as parameters()).
  void backward(const Workspace<T>& ws, std::span<const T> grad_out, std::span<T> grad) const;

 private:
  std::vector<T> run(std::span<const T> inputs, int batch, Mode mode, Workspace<T>* ws,
                     std::span<T> running) const;

  NetworkSpec spec_;
  std::vector<ConvSlots> conv_;
  std::vector<DenseSlots> dense_;
  std::vector<T> params_;
  std::vector<T> running_;
};

template <class T>
struct ConvCache {
  std::vector<T> input;    // batch x in_c x H x W
  std::vector<T> relu;     // batch x out_c x H x W, post-activation
  std::vector<T> xhat;     // normalized relu output
  std::vector<T> inv_std;  // per channel
  std::vector<std::uint32_t> argmax;  // pooled index into the BN output plane
};

template <class T>
struct DenseCache {
  std::vector<T> input;
  std::vector<T> output;  // post-activation (identity for the last layer)
};

// Activations from forward() plus scratch reused across calls.
template <class T>
struct Workspace {
  int batch = 0;
  std::vector<ConvCache<T>> conv;
  std::vector<DenseCache<T>> dense;
  std::vector<T> output;
  mutable std::vector<T> delta, next_delta, dy;
  // Zero-padded planes for the convolutions.
  mutable std::vector<T> pad, wide, dpad;
};

extern template class QNetwork<float>;
extern template class QNetwork<double>;

// Index of the largest value; ties resolve to the lowest index.
template <class T>
int argmax(std::span<const T> values) {
  int best = 0;
  for (int i = 1; i < static_cast<int>(values.size()); ++i) {
    if (values[i] > values[best]) best = i;
  }
  return best;
}

}  // namespace advicelab::qnet
