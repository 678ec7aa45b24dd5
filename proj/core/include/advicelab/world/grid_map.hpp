#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace advicelab::world {

enum class CellKind : std::uint8_t {
  kFloor,
  kPerimeterWall,
  kHedge,
  kBuildingRed,
  kBuildingGreen,
  kBuildingBlue,
  kGoalNpc,
};

// Headings are ordered clockwise; turning right adds one modulo four.
enum class Heading : std::uint8_t { kNorth = 0, kEast = 1, kSouth = 2, kWest = 3 };

inline constexpr std::array<Heading, 4> kAllHeadings = {Heading::kNorth, Heading::kEast,
                                                        Heading::kSouth, Heading::kWest};

struct Cell {
  int x = 0;
  int y = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
};

struct AgentPose {
  int x = 0;
  int y = 0;
  Heading heading = Heading::kEast;
  friend bool operator==(const AgentPose&, const AgentPose&) = default;
  Cell cell() const { return {x, y}; }
};

// Axis along which corridor progress is measured. Loaded maps always use
// kPlusX; each clockwise rotation advances it one step.
enum class ProgressAxis : std::uint8_t { kPlusX = 0, kPlusY = 1, kMinusX = 2, kMinusY = 3 };

std::string_view to_string(CellKind kind);
std::string_view to_string(Heading heading);
std::optional<Heading> heading_from_string(std::string_view text);

Heading turn_left(Heading h);
Heading turn_right(Heading h);
Heading turn_around(Heading h);
// Unit step for a heading; north is -y (row 0 is the top of the map).
Cell heading_delta(Heading h);

class MapParseError : public std::runtime_error {
 public:
  MapParseError(int line, int column, const std::string& what);
  int line() const { return line_; }
  int column() const { return column_; }

 private:
  int line_;
  int column_;
};

class MapValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Immutable after construction; safe to share across threads.
class GridMap {
 public:
  // Validates every invariant and throws MapValidationError on failure.
  GridMap(int width, int height, std::vector<CellKind> cells, AgentPose spawn,
          int milestone_entry, int milestone_exit, ProgressAxis axis = ProgressAxis::kPlusX);

  int width() const { return width_; }
  int height() const { return height_; }
  const AgentPose& spawn() const { return spawn_; }
  Cell goal() const { return goal_; }
  int milestone_entry() const { return milestone_entry_; }
  int milestone_exit() const { return milestone_exit_; }
  ProgressAxis progress_axis() const { return axis_; }

  bool in_bounds(int x, int y) const { return x >= 0 && y >= 0 && x < width_ && y < height_; }
  CellKind at(int x, int y) const { return cells_[index(x, y)]; }
  // Out-of-bounds cells read as perimeter wall.
  CellKind at_or_wall(int x, int y) const;
  // Floor and the goal NPC cell are walkable; entering the NPC cell reaches the goal.
  bool traversable(int x, int y) const;
  int traversable_count() const;
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

  // Corridor progress coordinate of a cell along progress_axis(), in [0, extent).
  int progress(int x, int y) const;
  // Extent of the grid along the progress axis.
  int progress_extent() const;

  // Canonical ASCII rendering (grid rows only, spawn marked).
  std::string grid_text() const;
  // Hex FNV-1a digest of the canonical layout, used to identify maps on the wire.
  std::string digest() const;

  friend bool operator==(const GridMap&, const GridMap&) = default;

 private:
  int width_;
  int height_;
  std::vector<CellKind> cells_;
  AgentPose spawn_;
  Cell goal_;
  int milestone_entry_;
  int milestone_exit_;
  ProgressAxis axis_;
};

// Parses the ASCII map format. Throws MapParseError for malformed input and
// MapValidationError for well-formed maps that violate an invariant.
GridMap load_map(std::string_view text);
GridMap load_map_file(const std::string& path);

// Clockwise rotation: cell (x, y) moves to (height-1-y, x). Milestone
// thresholds are kept in progress coordinates and the progress axis rotates.
GridMap rotate_map_90(const GridMap& map);

// 4-connected BFS distance over traversable cells; nullopt when unreachable.
std::optional<int> shortest_path_length(const GridMap& map, Cell from, Cell to);

// All-cells BFS distances from a source (-1 for unreachable / non-traversable).
std::vector<int> bfs_distances(const GridMap& map, Cell source);

}  // namespace advicelab::world
