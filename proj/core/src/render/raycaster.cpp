#include "advicelab/render/raycaster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace advicelab::render {

using world::CellKind;

std::string_view to_string(AliasingMode mode) {
  return mode == AliasingMode::kAliased ? "aliased" : "landmarked";
}

std::optional<AliasingMode> aliasing_mode_from_string(std::string_view text) {
  if (text == "aliased") return AliasingMode::kAliased;
  if (text == "landmarked") return AliasingMode::kLandmarked;
  return std::nullopt;
}

namespace {

float quantize(double v) {
  return static_cast<float>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)) / 255.0f;
}

double attenuation(double distance) { return 1.0 / (1.0 + 0.12 * std::max(0.0, distance)); }

}  // namespace

TexturePalette::TexturePalette(AliasingMode mode) : mode_(mode) {}

float TexturePalette::base_intensity(CellKind kind) const {
  if (mode_ == AliasingMode::kAliased) return 0.55f;
  switch (kind) {
    case CellKind::kBuildingRed: return 0.82f;
    case CellKind::kBuildingGreen: return 0.34f;
    case CellKind::kBuildingBlue: return 0.21f;
    case CellKind::kGoalNpc: return 1.0f;
    default: return 0.55f;
  }
}

float TexturePalette::shade(CellKind kind, double u, double v, double distance) const {
  double base = base_intensity(kind);
  // Brick courses: four rows per block, joints offset by half a brick on odd rows.
  double course = v * 4.0;
  int row = static_cast<int>(std::floor(course));
  double cv = course - row;
  double cu = u * 2.0 + ((row & 1) ? 0.5 : 0.0);
  cu -= std::floor(cu);
  bool mortar = cv < 0.12 || cu < 0.06;
  if (mode_ == AliasingMode::kLandmarked && kind == CellKind::kGoalNpc) mortar = false;
  double value = base * (mortar ? kMortar : 1.0) * attenuation(distance);
  return quantize(value);
}

std::pair<float, float> TexturePalette::band(CellKind kind, double distance) const {
  double base = base_intensity(kind) * attenuation(distance);
  double lo = (mode_ == AliasingMode::kLandmarked && kind == CellKind::kGoalNpc) ? base
                                                                               : base * kMortar;
  return {quantize(lo), quantize(base)};
}

double wall_slice_height(double perpendicular_distance, int frame_height) {
  return static_cast<double>(frame_height) / std::max(perpendicular_distance, 1e-6);
}

RayHit cast_ray(const world::GridMap& map, const world::AgentPose& pose, double camera_x,
                double fov_degrees) {
  world::Cell d = world::heading_delta(pose.heading);
  const double plane_len = std::tan(fov_degrees * std::numbers::pi / 360.0);
  const double dir_x = d.x;
  const double dir_y = d.y;
  const double plane_x = -dir_y * plane_len;
  const double plane_y = dir_x * plane_len;
  const double pos_x = pose.x + 0.5;
  const double pos_y = pose.y + 0.5;
  const double ray_x = dir_x + plane_x * camera_x;
  const double ray_y = dir_y + plane_y * camera_x;

  int map_x = pose.x;
  int map_y = pose.y;
  const double inf = std::numeric_limits<double>::infinity();
  const double delta_x = ray_x == 0.0 ? inf : std::fabs(1.0 / ray_x);
  const double delta_y = ray_y == 0.0 ? inf : std::fabs(1.0 / ray_y);
  int step_x = 0, step_y = 0;
  double side_x = inf, side_y = inf;
  if (ray_x < 0) {
    step_x = -1;
    side_x = (pos_x - map_x) * delta_x;
  } else if (ray_x > 0) {
    step_x = 1;
    side_x = (map_x + 1.0 - pos_x) * delta_x;
  }
  if (ray_y < 0) {
    step_y = -1;
    side_y = (pos_y - map_y) * delta_y;
  } else if (ray_y > 0) {
    step_y = 1;
    side_y = (map_y + 1.0 - pos_y) * delta_y;
  }

  RayHit hit;
  int side = 0;
  const int max_steps = 2 * (map.width() + map.height()) + 4;
  for (int i = 0; i < max_steps; ++i) {
    if (side_x < side_y) {
      side_x += delta_x;
      map_x += step_x;
      side = 0;
    } else {
      side_y += delta_y;
      map_y += step_y;
      side = 1;
    }
    CellKind k = map.at_or_wall(map_x, map_y);
    if (k != CellKind::kFloor) {
      hit.kind = k;
      break;
    }
  }
  hit.cell = {map_x, map_y};
  hit.perpendicular_distance = side == 0 ? side_x - delta_x : side_y - delta_y;
  double wall = side == 0 ? pos_y + hit.perpendicular_distance * ray_y
                          : pos_x + hit.perpendicular_distance * ray_x;
  double u = wall - std::floor(wall);
  if ((side == 0 && ray_x > 0) || (side == 1 && ray_y < 0)) u = 1.0 - u;
  hit.u = std::clamp(u, 0.0, std::nextafter(1.0, 0.0));
  return hit;
}

Frame render(const world::GridMap& map, const world::AgentPose& pose,
             const TexturePalette& palette, const CameraConfig& camera) {
  Frame frame(camera.width, camera.height);
  const float sky = quantize(palette.sky());
  const float floor = quantize(palette.floor());
  const double half = camera.height / 2.0;
  for (int col = 0; col < camera.width; ++col) {
    double camera_x = 2.0 * (col + 0.5) / camera.width - 1.0;
    RayHit hit = cast_ray(map, pose, camera_x, camera.fov_degrees);
    double line = wall_slice_height(hit.perpendicular_distance, camera.height);
    double top = half - line / 2.0;
    double bottom = half + line / 2.0;
    for (int row = 0; row < camera.height; ++row) {
      double center = row + 0.5;
      float value;
      if (center < top) {
        value = sky;
      } else if (center >= bottom) {
        value = floor;
      } else {
        double v = (center - top) / line;
        value = palette.shade(hit.kind, hit.u, v, hit.perpendicular_distance);
      }
      frame.at(col, row) = value;
    }
  }
  return frame;
}

FrameCache::FrameCache(const world::GridMap& map, TexturePalette palette, CameraConfig camera)
    : map_(map),
      palette_(palette),
      camera_(camera),
      frames_(static_cast<std::size_t>(map.width()) * map.height() * 4) {}

const Frame& FrameCache::get(const world::AgentPose& pose) {
  auto& slot = frames_[map_.index(pose.x, pose.y) * 4 + static_cast<std::size_t>(pose.heading)];
  if (!slot) slot = render(map_, pose, palette_, camera_);
  return *slot;
}

std::vector<world::AgentPose> enumerate_states(const world::GridMap& map) {
  std::vector<world::AgentPose> states;
  for (int y = 0; y < map.height(); ++y) {
    for (int x = 0; x < map.width(); ++x) {
      if (!map.traversable(x, y) || map.goal() == world::Cell{x, y}) continue;
      for (auto h : world::kAllHeadings) states.push_back({x, y, h});
    }
  }
  return states;
}

double aliasing_index(const world::GridMap& map, const TexturePalette& palette,
                      const CameraConfig& camera) {
  auto states = enumerate_states(map);
  return aliasing_index(map, palette, states, camera);
}

double aliasing_index(const world::GridMap& map, const TexturePalette& palette,
                      std::span<const world::AgentPose> states, const CameraConfig& camera) {
  const std::size_t n = states.size();
  if (n < 2) return 0.0;
  std::vector<Frame> frames;
  frames.reserve(n);
  for (const auto& s : states) frames.push_back(render(map, s, palette, camera));
  const std::size_t pixels = frames.front().pixels().size();
  const double budget = kAliasingThreshold * static_cast<double>(pixels);
  std::size_t similar = 0;
  for (std::size_t i = 0; i < n; ++i) {
    auto a = frames[i].pixels();
    for (std::size_t j = i + 1; j < n; ++j) {
      auto b = frames[j].pixels();
      double sum = 0.0;
      std::size_t k = 0;
      for (; k < pixels && sum < budget; ++k) sum += std::fabs(a[k] - b[k]);
      if (k == pixels && sum < budget) ++similar;
    }
  }
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return static_cast<double>(similar) / pairs;
}

}  // namespace advicelab::render
