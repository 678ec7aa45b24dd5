#include "advicelab/world/grid_map.hpp"

#include <charconv>
#include <cstdio>
#include <deque>
#include <fstream>
#include <sstream>

namespace advicelab::world {

std::string_view to_string(CellKind kind) {
  switch (kind) {
    case CellKind::kFloor: return "floor";
    case CellKind::kPerimeterWall: return "perimeter-wall";
    case CellKind::kHedge: return "hedge";
    case CellKind::kBuildingRed: return "building-red";
    case CellKind::kBuildingGreen: return "building-green";
    case CellKind::kBuildingBlue: return "building-blue";
    case CellKind::kGoalNpc: return "goal-npc";
  }
  return "?";
}

std::string_view to_string(Heading heading) {
  switch (heading) {
    case Heading::kNorth: return "north";
    case Heading::kEast: return "east";
    case Heading::kSouth: return "south";
    case Heading::kWest: return "west";
  }
  return "?";
}

std::optional<Heading> heading_from_string(std::string_view text) {
  for (Heading h : kAllHeadings) {
    if (to_string(h) == text) return h;
  }
  return std::nullopt;
}

Heading turn_left(Heading h) { return static_cast<Heading>((static_cast<int>(h) + 3) % 4); }
Heading turn_right(Heading h) { return static_cast<Heading>((static_cast<int>(h) + 1) % 4); }
Heading turn_around(Heading h) { return static_cast<Heading>((static_cast<int>(h) + 2) % 4); }

Cell heading_delta(Heading h) {
  switch (h) {
    case Heading::kNorth: return {0, -1};
    case Heading::kEast: return {1, 0};
    case Heading::kSouth: return {0, 1};
    case Heading::kWest: return {-1, 0};
  }
  return {0, 0};
}

MapParseError::MapParseError(int line, int column, const std::string& what)
    : std::runtime_error("map parse error at line " + std::to_string(line) + ", column " +
                         std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

namespace {

char glyph(CellKind kind) {
  switch (kind) {
    case CellKind::kFloor: return '.';
    case CellKind::kPerimeterWall: return '#';
    case CellKind::kHedge: return 'H';
    case CellKind::kBuildingRed: return 'R';
    case CellKind::kBuildingGreen: return 'G';
    case CellKind::kBuildingBlue: return 'B';
    case CellKind::kGoalNpc: return 'N';
  }
  return '?';
}

std::optional<CellKind> kind_from_glyph(char c) {
  switch (c) {
    case '.':
    case 'S': return CellKind::kFloor;
    case '#': return CellKind::kPerimeterWall;
    case 'H': return CellKind::kHedge;
    case 'R': return CellKind::kBuildingRed;
    case 'G': return CellKind::kBuildingGreen;
    case 'B': return CellKind::kBuildingBlue;
    case 'N': return CellKind::kGoalNpc;
    default: return std::nullopt;
  }
}

}  // namespace

GridMap::GridMap(int width, int height, std::vector<CellKind> cells, AgentPose spawn,
                 int milestone_entry, int milestone_exit, ProgressAxis axis)
    : width_(width),
      height_(height),
      cells_(std::move(cells)),
      spawn_(spawn),
      milestone_entry_(milestone_entry),
      milestone_exit_(milestone_exit),
      axis_(axis) {
  if (width_ < 4 || height_ < 4) throw MapValidationError("map must be at least 4x4");
  if (cells_.size() != static_cast<std::size_t>(width_) * height_) {
    throw MapValidationError("cell count does not match width*height");
  }
  int goals = 0;
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      if (at(x, y) == CellKind::kGoalNpc) {
        ++goals;
        goal_ = {x, y};
      }
    }
  }
  if (goals != 1) throw MapValidationError("map must contain exactly one goal-npc cell");
  if (!in_bounds(spawn_.x, spawn_.y) || at(spawn_.x, spawn_.y) != CellKind::kFloor) {
    throw MapValidationError("spawn must be a floor cell");
  }
  if (milestone_entry_ < 0 || milestone_entry_ >= milestone_exit_ ||
      milestone_exit_ >= progress_extent()) {
    throw MapValidationError("milestones must satisfy 0 <= entry < exit < extent");
  }
  if (!shortest_path_length(*this, spawn_.cell(), goal_)) {
    throw MapValidationError("goal unreachable from spawn");
  }
}

CellKind GridMap::at_or_wall(int x, int y) const {
  return in_bounds(x, y) ? at(x, y) : CellKind::kPerimeterWall;
}

bool GridMap::traversable(int x, int y) const {
  if (!in_bounds(x, y)) return false;
  CellKind k = at(x, y);
  return k == CellKind::kFloor || k == CellKind::kGoalNpc;
}

int GridMap::traversable_count() const {
  int n = 0;
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) n += traversable(x, y) ? 1 : 0;
  }
  return n;
}

int GridMap::progress(int x, int y) const {
  switch (axis_) {
    case ProgressAxis::kPlusX: return x;
    case ProgressAxis::kPlusY: return y;
    case ProgressAxis::kMinusX: return width_ - 1 - x;
    case ProgressAxis::kMinusY: return height_ - 1 - y;
  }
  return x;
}

int GridMap::progress_extent() const {
  return (axis_ == ProgressAxis::kPlusX || axis_ == ProgressAxis::kMinusX) ? width_ : height_;
}

std::string GridMap::grid_text() const {
  std::string out;
  out.reserve(static_cast<std::size_t>(width_ + 1) * height_);
  for (int y = 0; y < height_; ++y) {
    for (int x = 0; x < width_; ++x) {
      out.push_back(x == spawn_.x && y == spawn_.y ? 'S' : glyph(at(x, y)));
    }
    out.push_back('\n');
  }
  return out;
}

std::string GridMap::digest() const {
  std::uint64_t h = 14695981039346656037ull;
  auto mix = [&h](unsigned char c) {
    h ^= c;
    h *= 1099511628211ull;
  };
  for (char c : grid_text()) mix(static_cast<unsigned char>(c));
  for (int v : {milestone_entry_, milestone_exit_, static_cast<int>(axis_),
                static_cast<int>(spawn_.heading)}) {
    mix(static_cast<unsigned char>(v & 0xff));
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

GridMap load_map(std::string_view text) {
  std::vector<std::string> lines;
  {
    std::string cur;
    for (char c : text) {
      if (c == '\n') {
        if (!cur.empty() && cur.back() == '\r') cur.pop_back();
        lines.push_back(std::move(cur));
        cur.clear();
      } else {
        cur.push_back(c);
      }
    }
    if (!cur.empty()) lines.push_back(std::move(cur));
  }

  std::optional<int> width, height, entry, exit;
  Heading spawn_heading = Heading::kEast;
  std::size_t li = 0;
  auto parse_int = [](const std::string& v, int line, int col) {
    int out = 0;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || ptr != v.data() + v.size()) {
      throw MapParseError(line, col, "expected integer, got '" + v + "'");
    }
    return out;
  };
  for (; li < lines.size(); ++li) {
    const std::string& line = lines[li];
    if (line.empty() || line[0] == ';') continue;
    auto eq = line.find('=');
    if (eq == std::string::npos) break;
    std::string key = line.substr(0, eq);
    std::string value = line.substr(eq + 1);
    int lineno = static_cast<int>(li) + 1;
    int col = static_cast<int>(eq) + 2;
    if (key == "width") {
      width = parse_int(value, lineno, col);
    } else if (key == "height") {
      height = parse_int(value, lineno, col);
    } else if (key == "milestone_entry_x") {
      entry = parse_int(value, lineno, col);
    } else if (key == "milestone_exit_x") {
      exit = parse_int(value, lineno, col);
    } else if (key == "spawn_heading") {
      auto h = heading_from_string(value);
      if (!h) throw MapParseError(lineno, col, "unknown heading '" + value + "'");
      spawn_heading = *h;
    } else {
      throw MapParseError(lineno, 1, "unknown header key '" + key + "'");
    }
  }
  int header_end_line = static_cast<int>(li) + 1;
  if (!width) throw MapParseError(header_end_line, 1, "missing header 'width='");
  if (!height) throw MapParseError(header_end_line, 1, "missing header 'height='");
  if (!entry) throw MapParseError(header_end_line, 1, "missing header 'milestone_entry_x='");
  if (!exit) throw MapParseError(header_end_line, 1, "missing header 'milestone_exit_x='");
  if (*width <= 0 || *height <= 0) {
    throw MapParseError(header_end_line, 1, "width and height must be positive");
  }

  std::vector<CellKind> cells;
  cells.reserve(static_cast<std::size_t>(*width) * *height);
  std::optional<AgentPose> spawn;
  int row = 0;
  for (; li < lines.size() && row < *height; ++li, ++row) {
    const std::string& line = lines[li];
    int lineno = static_cast<int>(li) + 1;
    if (static_cast<int>(line.size()) != *width) {
      throw MapParseError(lineno, std::min<int>(static_cast<int>(line.size()), *width) + 1,
                          "row has " + std::to_string(line.size()) + " characters, expected " +
                              std::to_string(*width));
    }
    for (int x = 0; x < *width; ++x) {
      auto kind = kind_from_glyph(line[x]);
      if (!kind) {
        throw MapParseError(lineno, x + 1, std::string("unknown cell glyph '") + line[x] + "'");
      }
      if (line[x] == 'S') {
        if (spawn) throw MapParseError(lineno, x + 1, "more than one spawn 'S'");
        spawn = AgentPose{x, row, spawn_heading};
      }
      cells.push_back(*kind);
    }
  }
  if (row < *height) {
    throw MapParseError(static_cast<int>(li) + 1, 1,
                        "expected " + std::to_string(*height) + " rows, got " + std::to_string(row));
  }
  for (; li < lines.size(); ++li) {
    if (!lines[li].empty()) {
      throw MapParseError(static_cast<int>(li) + 1, 1, "unexpected content after grid");
    }
  }
  if (!spawn) throw MapValidationError("map has no spawn 'S'");
  return GridMap(*width, *height, std::move(cells), *spawn, *entry, *exit);
}

GridMap load_map_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open map file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_map(ss.str());
}

GridMap rotate_map_90(const GridMap& map) {
  const int w = map.width();
  const int h = map.height();
  // New grid has width h and height w; (x, y) -> (h-1-y, x).
  std::vector<CellKind> cells(static_cast<std::size_t>(w) * h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      int nx = h - 1 - y;
      int ny = x;
      cells[static_cast<std::size_t>(ny) * h + nx] = map.at(x, y);
    }
  }
  const AgentPose& s = map.spawn();
  AgentPose spawn{h - 1 - s.y, s.x, turn_right(s.heading)};
  auto axis = static_cast<ProgressAxis>((static_cast<int>(map.progress_axis()) + 1) % 4);
  return GridMap(h, w, std::move(cells), spawn, map.milestone_entry(), map.milestone_exit(), axis);
}

std::vector<int> bfs_distances(const GridMap& map, Cell source) {
  std::vector<int> dist(static_cast<std::size_t>(map.width()) * map.height(), -1);
  if (!map.traversable(source.x, source.y)) return dist;
  std::deque<Cell> frontier{source};
  dist[map.index(source.x, source.y)] = 0;
  while (!frontier.empty()) {
    Cell c = frontier.front();
    frontier.pop_front();
    int d = dist[map.index(c.x, c.y)];
    for (Heading h : kAllHeadings) {
      Cell step = heading_delta(h);
      int nx = c.x + step.x;
      int ny = c.y + step.y;
      if (!map.traversable(nx, ny)) continue;
      int& nd = dist[map.index(nx, ny)];
      if (nd >= 0) continue;
      nd = d + 1;
      frontier.push_back({nx, ny});
    }
  }
  return dist;
}

std::optional<int> shortest_path_length(const GridMap& map, Cell from, Cell to) {
  if (!map.traversable(from.x, from.y) || !map.traversable(to.x, to.y)) return std::nullopt;
  auto dist = bfs_distances(map, from);
  int d = dist[map.index(to.x, to.y)];
  if (d < 0) return std::nullopt;
  return d;
}

}  // namespace advicelab::world
