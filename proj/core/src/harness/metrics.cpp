#include "advicelab/harness/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace advicelab::harness {

VisitHeatmap::VisitHeatmap(int width, int height)
    : width_(width), height_(height), counts_(static_cast<std::size_t>(width) * height, 0) {
  if (width <= 0 || height <= 0) throw std::invalid_argument("heatmap dimensions must be positive");
}

void VisitHeatmap::add(world::Cell c, std::int64_t n) {
  if (c.x < 0 || c.y < 0 || c.x >= width_ || c.y >= height_) {
    throw std::out_of_range("heatmap cell out of range");
  }
  if (n < 0) throw std::invalid_argument("visit counts cannot decrease");
  counts_[static_cast<std::size_t>(c.y) * width_ + c.x] += n;
  total_ += n;
}

VisitHeatmap& VisitHeatmap::operator+=(const VisitHeatmap& other) {
  if (other.width_ != width_ || other.height_ != height_) {
    throw HeatmapMismatch("heatmap dimensions differ");
  }
  for (std::size_t i = 0; i < counts_.size(); ++i) counts_[i] += other.counts_[i];
  total_ += other.total_;
  return *this;
}

std::vector<double> moving_average(std::span<const double> series, int window) {
  if (window < 1) throw std::invalid_argument("moving average window must be >= 1");
  if (series.empty()) throw std::invalid_argument("moving average of an empty series");
  std::vector<double> out(series.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < series.size(); ++i) {
    sum += series[i];
    if (i >= static_cast<std::size_t>(window)) sum -= series[i - window];
    std::size_t n = std::min<std::size_t>(window, i + 1);
    out[i] = sum / static_cast<double>(n);
  }
  return out;
}

double kl_divergence(std::span<const std::int64_t> p_counts, std::span<const std::int64_t> q_counts) {
  if (p_counts.size() != q_counts.size()) throw HeatmapMismatch("heatmap dimensions differ");
  if (p_counts.empty()) throw HeatmapMismatch("empty heatmaps");
  const double n = static_cast<double>(p_counts.size());
  double p_total = n, q_total = n;
  for (std::size_t i = 0; i < p_counts.size(); ++i) {
    if (p_counts[i] < 0 || q_counts[i] < 0) throw std::invalid_argument("negative visit count");
    p_total += static_cast<double>(p_counts[i]);
    q_total += static_cast<double>(q_counts[i]);
  }
  double kl = 0.0;
  for (std::size_t i = 0; i < p_counts.size(); ++i) {
    double pc = static_cast<double>(p_counts[i]) + 1.0;
    double qc = static_cast<double>(q_counts[i]) + 1.0;
    // Identical smoothed cells contribute exactly zero.
    if (pc / p_total == qc / q_total) continue;
    kl += pc / p_total * std::log((pc / p_total) / (qc / q_total));
  }
  return std::max(kl, 0.0);
}

double kl_divergence(const VisitHeatmap& p, const VisitHeatmap& q) {
  if (p.width() != q.width() || p.height() != q.height()) throw HeatmapMismatch("heatmap dimensions differ");
  return kl_divergence(p.counts(), q.counts());
}

double progress_band_mass(const VisitHeatmap& heat, const world::GridMap& map, int lo, int hi) {
  if (heat.width() != map.width() || heat.height() != map.height()) {
    throw HeatmapMismatch("heatmap does not match the map");
  }
  if (heat.total() == 0) return 0.0;
  std::int64_t in_band = 0;
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      if (!map.traversable(x, y)) continue;
      int p = map.progress(x, y);
      if (p >= lo && p < hi) in_band += heat.at(x, y);
    }
  }
  return static_cast<double>(in_band) / static_cast<double>(heat.total());
}

double corridor_second_half_mass(const VisitHeatmap& heat, const world::GridMap& map) {
  const int entry = map.milestone_entry(), exit = map.milestone_exit();
  const int mid = entry + (exit - entry + 1) / 2;
  return progress_band_mass(heat, map, mid, exit);
}

std::optional<int> episodes_to_stable_goal(std::span<const EpisodeRecord> records, int run) {
  if (run < 1) throw std::invalid_argument("run length must be >= 1");
  int streak = 0;
  for (std::size_t i = 0; i < records.size(); ++i) {
    streak = records[i].reached_goal ? streak + 1 : 0;
    if (streak == run) return static_cast<int>(i) + 1;
  }
  return std::nullopt;
}

std::optional<int> reconvergence_episode(std::span<const double> scores, double reference, int window,
                                         double fraction) {
  if (scores.empty()) return std::nullopt;
  const double threshold = reference - (1.0 - fraction) * std::abs(reference);
  auto ma = moving_average(scores, window);
  for (std::size_t i = 0; i < ma.size(); ++i) {
    if (ma[i] > threshold) return static_cast<int>(i) + 1;
  }
  return std::nullopt;
}

std::vector<double> scores_of(std::span<const EpisodeRecord> records) {
  std::vector<double> out;
  out.reserve(records.size());
  for (const auto& r : records) out.push_back(r.score);
  return out;
}

double mean(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double stddev(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  double m = mean(xs), ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

double median(std::vector<double> xs) {
  if (xs.empty()) throw std::invalid_argument("median of an empty set");
  std::sort(xs.begin(), xs.end());
  std::size_t n = xs.size();
  return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

}  // namespace advicelab::harness
