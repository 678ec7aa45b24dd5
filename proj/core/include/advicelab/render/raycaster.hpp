#pragma once

#include <optional>
#include <span>
#include <string_view>
#include <utility>
#include <vector>

#include "advicelab/render/frame.hpp"
#include "advicelab/world/grid_map.hpp"

namespace advicelab::render {

enum class AliasingMode { kAliased, kLandmarked };

std::string_view to_string(AliasingMode mode);
std::optional<AliasingMode> aliasing_mode_from_string(std::string_view text);

// Per-cell-kind block textures. In aliased mode every solid cell shares one
// texture; in landmarked mode the buildings and the goal NPC get their own
// intensity bands.
class TexturePalette {
 public:
  explicit TexturePalette(AliasingMode mode = AliasingMode::kAliased);

  AliasingMode mode() const { return mode_; }
  float sky() const { return kSky; }
  float floor() const { return kFloor; }

  // Intensity of a wall surface point. u runs along the wall face, v down the
  // slice; both in [0, 1).
  float shade(world::CellKind kind, double u, double v, double distance) const;
  // Closed intensity range that shade() can produce for this kind at this distance.
  std::pair<float, float> band(world::CellKind kind, double distance) const;
  float base_intensity(world::CellKind kind) const;

  static constexpr float kSky = 0.92f;
  static constexpr float kFloor = 0.12f;
  static constexpr float kMortar = 0.7f;

 private:
  AliasingMode mode_;
};

struct CameraConfig {
  int width = 32;
  int height = 32;
  double fov_degrees = 90.0;
};

// Wall slice height in pixels for a perpendicular ray distance.
double wall_slice_height(double perpendicular_distance, int frame_height);

struct RayHit {
  world::Cell cell;
  world::CellKind kind = world::CellKind::kPerimeterWall;
  double perpendicular_distance = 0.0;
  double u = 0.0;
};

// DDA grid traversal from the centre of the pose cell.
RayHit cast_ray(const world::GridMap& map, const world::AgentPose& pose, double camera_x,
                double fov_degrees);

// Column raycaster. Pure function of its inputs; output intensities are
// quantized to multiples of 1/255.
Frame render(const world::GridMap& map, const world::AgentPose& pose,
             const TexturePalette& palette, const CameraConfig& camera = {});

// Lazily memoized render() results for one (map, palette, camera) triple.
class FrameCache {
 public:
  FrameCache(const world::GridMap& map, TexturePalette palette, CameraConfig camera);
  const Frame& get(const world::AgentPose& pose);

 private:
  const world::GridMap& map_;
  TexturePalette palette_;
  CameraConfig camera_;
  std::vector<std::optional<Frame>> frames_;
};

inline constexpr double kAliasingThreshold = 0.02;

// Every (traversable cell, heading) state except the goal cell.
std::vector<world::AgentPose> enumerate_states(const world::GridMap& map);

// Fraction of distinct state pairs whose frames differ by mean absolute
// pixel difference below the threshold.
double aliasing_index(const world::GridMap& map, const TexturePalette& palette,
                      const CameraConfig& camera = {});
double aliasing_index(const world::GridMap& map, const TexturePalette& palette,
                      std::span<const world::AgentPose> states, const CameraConfig& camera = {});

}  // namespace advicelab::render
