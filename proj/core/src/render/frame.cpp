#include "advicelab/render/frame.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

namespace advicelab::render {

Frame::Frame(int width, int height, float fill)
    : width_(width), height_(height), pixels_(static_cast<std::size_t>(width) * height, fill) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("frame dimensions must be positive");
}

std::vector<std::uint8_t> Frame::to_bytes() const {
  std::vector<std::uint8_t> out(pixels_.size());
  std::transform(pixels_.begin(), pixels_.end(), out.begin(), [](float v) {
    return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0f, 1.0f) * 255.0f));
  });
  return out;
}

Frame Frame::downsample(int factor) const {
  if (factor <= 1) return *this;
  int w = std::max(1, width_ / factor);
  int h = std::max(1, height_ / factor);
  Frame out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      float sum = 0.0f;
      int n = 0;
      for (int dy = 0; dy < factor; ++dy) {
        for (int dx = 0; dx < factor; ++dx) {
          int sx = x * factor + dx;
          int sy = y * factor + dy;
          if (sx < width_ && sy < height_) {
            sum += at(sx, sy);
            ++n;
          }
        }
      }
      out.at(x, y) = sum / static_cast<float>(n);
    }
  }
  return out;
}

double mean_abs_difference(const Frame& a, const Frame& b) {
  if (a.width() != b.width() || a.height() != b.height()) {
    throw DimensionMismatch("frames differ in size");
  }
  auto pa = a.pixels();
  auto pb = b.pixels();
  double sum = 0.0;
  for (std::size_t i = 0; i < pa.size(); ++i) sum += std::fabs(pa[i] - pb[i]);
  return pa.empty() ? 0.0 : sum / static_cast<double>(pa.size());
}

void write_pgm(const Frame& frame, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write PGM: " + path);
  out << "P5\n" << frame.width() << ' ' << frame.height() << "\n255\n";
  auto bytes = frame.to_bytes();
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw std::runtime_error("short write to PGM: " + path);
}

Frame read_pgm(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read PGM: " + path);
  std::string magic;
  int w = 0, h = 0, maxval = 0;
  in >> magic >> w >> h >> maxval;
  if (magic != "P5" || w <= 0 || h <= 0 || maxval != 255) {
    throw std::runtime_error("unsupported PGM header in " + path);
  }
  in.get();
  std::vector<unsigned char> bytes(static_cast<std::size_t>(w) * h);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!in) throw std::runtime_error("truncated PGM: " + path);
  Frame f(w, h);
  auto px = f.pixels();
  for (std::size_t i = 0; i < bytes.size(); ++i) px[i] = static_cast<float>(bytes[i]) / 255.0f;
  return f;
}

FrameStack::FrameStack(int capacity, int width, int height)
    : capacity_(capacity), width_(width), height_(height) {
  if (capacity <= 0) throw std::invalid_argument("frame stack capacity must be positive");
}

std::vector<float> FrameStack::push_and_stack(const Frame& frame) {
  if (frame.width() != width_ || frame.height() != height_) {
    throw DimensionMismatch("frame is " + std::to_string(frame.width()) + "x" +
                            std::to_string(frame.height()) + ", stack expects " +
                            std::to_string(width_) + "x" + std::to_string(height_));
  }
  frames_.push_front(frame);
  if (static_cast<int>(frames_.size()) > capacity_) frames_.pop_back();
  return observation();
}

std::vector<float> FrameStack::observation() const {
  const std::size_t plane = static_cast<std::size_t>(width_) * height_;
  std::vector<float> out(plane * capacity_, 0.0f);
  if (frames_.empty()) return out;
  for (int i = 0; i < capacity_; ++i) {
    const Frame& src = frames_[std::min<std::size_t>(i, frames_.size() - 1)];
    std::copy(src.pixels().begin(), src.pixels().end(), out.begin() + plane * i);
  }
  return out;
}

}  // namespace advicelab::render
