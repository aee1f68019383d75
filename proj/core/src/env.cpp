#include "ioc/env.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <numbers>
#include <sstream>
#include <stdexcept>

namespace ioc {

std::string to_string(EnvKind kind) {
  switch (kind) {
    case EnvKind::kFourRooms: return "fourrooms";
    case EnvKind::kTMaze: return "tmaze";
  }
  return "unknown";
}

EnvKind parse_env_kind(std::string_view name) {
  if (name == "fourrooms") return EnvKind::kFourRooms;
  if (name == "tmaze") return EnvKind::kTMaze;
  throw std::invalid_argument("unknown environment '" + std::string(name) + "'");
}

// ---------------------------------------------------------------------------
// Grid

namespace {

constexpr std::array<Cell, 4> kMoves = {{{-1, 0}, {1, 0}, {0, -1}, {0, 1}}};

constexpr std::string_view kFourRoomsMap =
    "#############\n"
    "#.....#.....#\n"
    "#.....#.....#\n"
    "#...........#\n"
    "#.....#.....#\n"
    "#.....#.....#\n"
    "##.####.....#\n"
    "#.....###.###\n"
    "#.....#.....#\n"
    "#.....#.....#\n"
    "#...........#\n"
    "#.....#.....#\n"
    "#############\n";

constexpr Cell kEastHallway{7, 9};

Cell offset(Cell c, GridAction a) {
  const Cell d = kMoves[static_cast<std::size_t>(a)];
  return {c.row + d.row, c.col + d.col};
}

bool in_bounds(const GridSpec& spec, Cell c) {
  return c.row >= 0 && c.row < spec.height && c.col >= 0 && c.col < spec.width;
}

bool open_in(const GridSpec& spec, Cell c) {
  return in_bounds(spec, c) && !spec.walls.contains(c);
}

}  // namespace

GridSpec four_rooms_default() {
  GridSpec base;
  base.slip_prob = 1.0 / 3.0;
  base.goal_reward = 50.0;
  base.step_reward = 0.0;
  GridSpec spec = parse_grid_map(kFourRoomsMap, base);
  spec.goal = kEastHallway;
  return spec;
}

GridSpec parse_grid_map(std::string_view text, const GridSpec& base) {
  GridSpec spec = base;
  spec.walls.clear();
  std::vector<std::string> rows;
  std::istringstream in{std::string(text)};
  for (std::string line; std::getline(in, line);) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    rows.push_back(line);
  }
  if (rows.empty()) throw std::invalid_argument("grid map is empty");

  spec.height = static_cast<int>(rows.size());
  spec.width = static_cast<int>(rows.front().size());
  bool have_goal = false;
  for (int r = 0; r < spec.height; ++r) {
    if (static_cast<int>(rows[r].size()) != spec.width) {
      throw std::invalid_argument("grid map row " + std::to_string(r) + " has inconsistent width");
    }
    for (int c = 0; c < spec.width; ++c) {
      switch (rows[r][c]) {
        case '#': spec.walls.insert({r, c}); break;
        case '.': break;
        case 'G':
          if (have_goal) throw std::invalid_argument("grid map has more than one goal");
          spec.goal = {r, c};
          have_goal = true;
          break;
        default:
          throw std::invalid_argument(std::string("grid map has unknown symbol '") + rows[r][c] + "'");
      }
    }
  }
  if (!have_goal) spec.goal = base.goal;
  return spec;
}

void validate(const GridSpec& spec) {
  if (spec.width <= 0 || spec.height <= 0) throw std::invalid_argument("grid dimensions must be positive");
  if (!(spec.slip_prob >= 0.0 && spec.slip_prob <= 1.0)) {
    throw std::invalid_argument("slip_prob must lie in [0, 1]");
  }
  if (!open_in(spec, spec.goal)) throw std::invalid_argument("goal must be an open cell");

  // Every open cell must reach the goal; search backwards from it.
  std::set<Cell> seen{spec.goal};
  std::deque<Cell> frontier{spec.goal};
  while (!frontier.empty()) {
    const Cell c = frontier.front();
    frontier.pop_front();
    for (int a = 0; a < kNumGridActions; ++a) {
      const Cell n = offset(c, static_cast<GridAction>(a));
      if (open_in(spec, n) && seen.insert(n).second) frontier.push_back(n);
    }
  }
  for (int r = 0; r < spec.height; ++r) {
    for (int c = 0; c < spec.width; ++c) {
      if (open_in(spec, {r, c}) && !seen.contains({r, c})) {
        throw std::invalid_argument("cell (" + std::to_string(r) + ", " + std::to_string(c) +
                                    ") cannot reach the goal");
      }
    }
  }
}

GridWorld::GridWorld(GridSpec spec) : spec_(std::move(spec)) {
  validate(spec_);
  index_grid_.assign(static_cast<std::size_t>(spec_.width * spec_.height), -1);
  for (int r = 0; r < spec_.height; ++r) {
    for (int c = 0; c < spec_.width; ++c) {
      if (spec_.walls.contains({r, c})) continue;
      index_grid_[static_cast<std::size_t>(r * spec_.width + c)] = static_cast<int>(open_cells_.size());
      open_cells_.push_back({r, c});
    }
  }
}

bool GridWorld::is_open(Cell cell) const { return open_in(spec_, cell); }

std::size_t GridWorld::index_of(Cell cell) const {
  if (!is_open(cell)) {
    throw std::out_of_range("cell (" + std::to_string(cell.row) + ", " + std::to_string(cell.col) +
                            ") is not an open cell");
  }
  return static_cast<std::size_t>(index_grid_[static_cast<std::size_t>(cell.row * spec_.width + cell.col)]);
}

EnvState GridWorld::reset(Rng& rng) const {
  const std::size_t goal = index_of(spec_.goal);
  // Draw over the open cells with the goal removed.
  std::size_t i = uniform_index(rng, open_cells_.size() - 1);
  if (i >= goal) ++i;
  return GridState{open_cells_[i], i};
}

Transition grid_step(const GridWorld& world, const GridState& state, GridAction action, Rng& rng) {
  const auto a = static_cast<int>(action);
  if (a < 0 || a >= kNumGridActions) throw std::invalid_argument("invalid grid action");
  const GridSpec& spec = world.spec();

  Transition tr;
  tr.state = state;
  tr.action = action;

  Cell next = state.cell;
  if (uniform01(rng) < spec.slip_prob) {
    tr.slipped = true;
    std::array<Cell, 4> neighbours{};
    std::size_t n = 0;
    for (int m = 0; m < kNumGridActions; ++m) {
      const Cell c = offset(state.cell, static_cast<GridAction>(m));
      if (world.is_open(c)) neighbours[n++] = c;
    }
    if (n > 0) next = neighbours[uniform_index(rng, n)];
  } else {
    const Cell c = offset(state.cell, action);
    if (world.is_open(c)) next = c;
  }

  tr.next_state = world.state_at(next);
  tr.terminal = next == spec.goal;
  if (tr.terminal) {
    tr.reward = spec.goal_reward;
    tr.goal_index = 0;
  } else {
    tr.reward = spec.step_reward;
  }
  return tr;
}

Transition GridWorld::step(const EnvState& state, int action, Rng& rng) const {
  if (action < 0 || action >= kNumGridActions) throw std::invalid_argument("invalid grid action");
  return grid_step(*this, std::get<GridState>(state), static_cast<GridAction>(action), rng);
}

std::unique_ptr<Environment> GridWorld::clone() const { return std::make_unique<GridWorld>(*this); }

// ---------------------------------------------------------------------------
// Maze

namespace {

// True when the open segment p -> q passes through the interior of `r`.
bool segment_hits(const Rect& r, const Vec2& p, const Vec2& q) {
  double t0 = 0.0;
  double t1 = 1.0;
  const Vec2 d = q - p;
  for (int axis = 0; axis < 2; ++axis) {
    if (d[axis] == 0.0) {
      if (!(p[axis] > r.lo[axis] && p[axis] < r.hi[axis])) return false;
      continue;
    }
    double ta = (r.lo[axis] - p[axis]) / d[axis];
    double tb = (r.hi[axis] - p[axis]) / d[axis];
    if (ta > tb) std::swap(ta, tb);
    t0 = std::max(t0, ta);
    t1 = std::min(t1, tb);
    if (t0 >= t1) return false;
  }
  return t0 < t1;
}

bool move_legal(const MazeSpec& spec, const Vec2& from, const Vec2& to) {
  if (!spec.bounds.contains_closed(to)) return false;
  return std::none_of(spec.walls.begin(), spec.walls.end(),
                      [&](const Rect& w) { return w.contains_interior(to) || segment_hits(w, from, to); });
}

}  // namespace

bool MazeSpec::is_free(const Vec2& p) const {
  if (!bounds.contains_closed(p)) return false;
  return std::none_of(walls.begin(), walls.end(), [&](const Rect& w) { return w.contains_interior(p); });
}

int MazeSpec::num_active_goals() const {
  return static_cast<int>(std::count_if(goals.begin(), goals.end(), [](const MazeGoal& g) { return g.active; }));
}

MazeSpec tmaze_default(bool two_goals) {
  MazeSpec spec;
  spec.bounds = {{-0.4, -0.2}, {0.4, 0.4}};
  spec.walls = {
      {{-0.4, -0.2}, {-0.1, 0.2}},
      {{0.1, -0.2}, {0.4, 0.2}},
  };
  spec.start = {0.0, -0.1};
  spec.goals.push_back({{0.3, 0.3}, 0.1, 1.0, true});
  if (two_goals) spec.goals.push_back({{-0.3, 0.3}, 0.1, 1.0, true});
  return spec;
}

void validate(const MazeSpec& spec) {
  if (!(spec.bounds.lo.array() < spec.bounds.hi.array()).all()) {
    throw std::invalid_argument("maze bounds are empty");
  }
  if (!spec.is_free(spec.start)) throw std::invalid_argument("maze start lies inside a wall");
  if (spec.goals.empty()) throw std::invalid_argument("maze needs at least one goal");
  for (const MazeGoal& g : spec.goals) {
    if (!(g.radius > 0.0)) throw std::invalid_argument("goal radius must be positive");
    if (!spec.is_free(g.center)) throw std::invalid_argument("goal center lies inside a wall");
  }
  if (!(spec.action_scale > 0.0) || !(spec.max_force > 0.0)) {
    throw std::invalid_argument("action_scale and max_force must be positive");
  }
  if (spec.num_directions < 1) throw std::invalid_argument("num_directions must be positive");
}

Transition maze_step(const MazeSpec& spec, const MazeState& state, const Vec2& force) {
  const Vec2 clamped = force.cwiseMax(-spec.max_force).cwiseMin(spec.max_force);
  const Vec2 from = state.position;
  const Vec2 delta = spec.action_scale * clamped;

  Vec2 pos = from;
  if (move_legal(spec, from, from + delta)) {
    pos = from + delta;
  } else {
    const Vec2 along_x{from.x() + delta.x(), from.y()};
    if (move_legal(spec, from, along_x)) pos = along_x;
    const Vec2 along_y{pos.x(), pos.y() + delta.y()};
    if (move_legal(spec, pos, along_y)) pos = along_y;
  }

  Transition tr;
  tr.state = state;
  tr.action = clamped;
  tr.next_state = MazeState{pos};
  tr.reward = spec.step_reward;
  for (std::size_t g = 0; g < spec.goals.size(); ++g) {
    const MazeGoal& goal = spec.goals[g];
    if (goal.active && (pos - goal.center).norm() <= goal.radius) {
      tr.terminal = true;
      tr.reward = goal.reward;
      tr.goal_index = static_cast<int>(g);
      break;
    }
  }
  return tr;
}

MazeSpec remove_most_visited_goal(const MazeSpec& spec, std::span<const int> visit_counts) {
  if (spec.num_active_goals() < 2) throw std::invalid_argument("nothing to remove");
  int best = -1;
  for (std::size_t g = 0; g < spec.goals.size(); ++g) {
    if (!spec.goals[g].active) continue;
    const int count = g < visit_counts.size() ? visit_counts[g] : 0;
    if (best < 0 || count > visit_counts[static_cast<std::size_t>(best)]) best = static_cast<int>(g);
  }
  MazeSpec out = spec;
  out.goals[static_cast<std::size_t>(best)].active = false;
  return out;
}

PointMaze::PointMaze(MazeSpec spec) : spec_(std::move(spec)) { validate(spec_); }

void PointMaze::set_spec(MazeSpec spec) {
  validate(spec);
  spec_ = std::move(spec);
}

Vec2 PointMaze::force_for(int action) const {
  if (action < 0 || action >= spec_.num_directions) throw std::invalid_argument("invalid maze action");
  const double angle = 2.0 * std::numbers::pi * action / spec_.num_directions;
  return spec_.max_force * Vec2{std::cos(angle), std::sin(angle)};
}

EnvState PointMaze::reset(Rng& rng) const {
  if (!spec_.random_start) return MazeState{spec_.start};
  const Vec2 extent = spec_.bounds.hi - spec_.bounds.lo;
  for (;;) {
    const double ux = uniform01(rng);
    const double uy = uniform01(rng);
    const Vec2 p = spec_.bounds.lo + Vec2{ux * extent.x(), uy * extent.y()};
    if (!spec_.is_free(p)) continue;
    const bool at_goal = std::any_of(spec_.goals.begin(), spec_.goals.end(), [&](const MazeGoal& g) {
      return g.active && (p - g.center).norm() <= g.radius;
    });
    if (!at_goal) return MazeState{p};
  }
}

Transition PointMaze::step(const EnvState& state, int action, Rng& /*rng*/) const {
  return maze_step(spec_, std::get<MazeState>(state), force_for(action));
}

std::unique_ptr<Environment> PointMaze::clone() const { return std::make_unique<PointMaze>(*this); }

}  // namespace ioc
