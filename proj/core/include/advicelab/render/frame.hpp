#pragma once

#include <cstdint>
#include <deque>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace advicelab::render {

// Grayscale image, row-major, intensities in [0, 1].
class Frame {
 public:
  Frame() = default;
  Frame(int width, int height, float fill = 0.0f);

  int width() const { return width_; }
  int height() const { return height_; }
  float at(int x, int y) const { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  float& at(int x, int y) { return pixels_[static_cast<std::size_t>(y) * width_ + x]; }
  std::span<const float> pixels() const { return pixels_; }
  std::span<float> pixels() { return pixels_; }

  // 8-bit view of the intensities (round to nearest).
  std::vector<std::uint8_t> to_bytes() const;
  // Box-filtered copy with integer downsampling factor.
  Frame downsample(int factor) const;

  friend bool operator==(const Frame&, const Frame&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<float> pixels_;
};

double mean_abs_difference(const Frame& a, const Frame& b);

// Binary PGM (P5, maxval 255).
void write_pgm(const Frame& frame, const std::string& path);
Frame read_pgm(const std::string& path);

class DimensionMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Most-recent-first stack of the last N frames.
class FrameStack {
 public:
  FrameStack(int capacity, int width, int height);

  int capacity() const { return capacity_; }
  int size() const { return static_cast<int>(frames_.size()); }
  void clear() { frames_.clear(); }

  // Pushes a frame and returns the stacked observation
  // (capacity x height x width, newest frame first).
  std::vector<float> push_and_stack(const Frame& frame);
  // Stacked observation for the current contents; slots past the oldest
  // available frame repeat it. Empty stacks yield zeros.
  std::vector<float> observation() const;
  const Frame& frame(int i) const { return frames_.at(i); }

 private:
  int capacity_;
  int width_;
  int height_;
  std::deque<Frame> frames_;
};

}  // namespace advicelab::render
