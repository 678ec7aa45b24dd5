#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "advicelab/world/grid_map.hpp"

namespace advicelab::harness {

struct EpisodeRecord {
  int session = 0;
  int episode = 0;
  double score = 0.0;
  int steps = 0;
  int advice_offered = 0;
  int advice_used = 0;
  bool reached_goal = false;
  friend bool operator==(const EpisodeRecord&, const EpisodeRecord&) = default;
};

// Per-cell visit counts accumulated over training.
class VisitHeatmap {
 public:
  VisitHeatmap() = default;
  VisitHeatmap(int width, int height);

  int width() const { return width_; }
  int height() const { return height_; }
  void add(world::Cell c, std::int64_t n = 1);
  std::int64_t at(int x, int y) const { return counts_[static_cast<std::size_t>(y) * width_ + x]; }
  std::int64_t total() const { return total_; }
  std::span<const std::int64_t> counts() const { return counts_; }
  // Element-wise sum; dimensions must match.
  VisitHeatmap& operator+=(const VisitHeatmap& other);
  friend bool operator==(const VisitHeatmap&, const VisitHeatmap&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<std::int64_t> counts_;
  std::int64_t total_ = 0;
};

class HeatmapMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Trailing mean over min(window, i + 1) values.
std::vector<double> moving_average(std::span<const double> series, int window = 10);

// Add-one smoothed KL divergence sum p ln(p / q), in nats.
double kl_divergence(std::span<const std::int64_t> p_counts, std::span<const std::int64_t> q_counts);
double kl_divergence(const VisitHeatmap& p, const VisitHeatmap& q);

// Share of visits landing on traversable cells whose progress coordinate lies
// in [lo, hi).
double progress_band_mass(const VisitHeatmap& heat, const world::GridMap& map, int lo, int hi);
// Visit share of the second half of the corridor between the two milestones.
double corridor_second_half_mass(const VisitHeatmap& heat, const world::GridMap& map);

// 1-based episode at which `run` consecutive goal episodes first complete.
std::optional<int> episodes_to_stable_goal(std::span<const EpisodeRecord> records, int run = 3);

// 1-based episode at which the trailing moving average first exceeds
// `reference - (1 - fraction) * |reference|` (90% of the plateau for positive
// plateaus, with the same margin below it for negative ones).
std::optional<int> reconvergence_episode(std::span<const double> scores, double reference,
                                         int window = 10, double fraction = 0.9);

std::vector<double> scores_of(std::span<const EpisodeRecord> records);
double mean(std::span<const double> xs);
double stddev(std::span<const double> xs);
double median(std::vector<double> xs);

}  // namespace advicelab::harness
