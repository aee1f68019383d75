#pragma once

#include <compare>
#include <cstddef>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "ioc/random.hpp"

namespace ioc {

using Vec2 = Eigen::Vector2d;

// ---------------------------------------------------------------------------
// Shared episodic types

struct Cell {
  int row = 0;
  int col = 0;
  auto operator<=>(const Cell&) const = default;
};

struct GridState {
  Cell cell;
  std::size_t index = 0;  // flat index into the open cells, row-major
  bool operator==(const GridState&) const = default;
};

struct MazeState {
  Vec2 position = Vec2::Zero();
  bool operator==(const MazeState& other) const { return position == other.position; }
};

using EnvState = std::variant<GridState, MazeState>;

enum class GridAction : int { kUp = 0, kDown = 1, kLeft = 2, kRight = 3 };
inline constexpr int kNumGridActions = 4;

/// A grid move or a point-mass force.
using Action = std::variant<GridAction, Vec2>;

struct Transition {
  EnvState state;
  Action action;
  double reward = 0.0;
  EnvState next_state;
  bool terminal = false;
  /// Goal reached on this step (maze goals are indexed; the grid has goal 0).
  std::optional<int> goal_index;
  /// Grid only: the move was replaced by a random adjacent cell.
  bool slipped = false;
};

enum class EnvKind { kFourRooms, kTMaze };

std::string to_string(EnvKind kind);
EnvKind parse_env_kind(std::string_view name);

/// Common episodic interface over discrete action indices. Continuous
/// environments map each index onto a fixed force.
class Environment {
 public:
  virtual ~Environment() = default;

  virtual EnvKind kind() const = 0;
  virtual int num_actions() const = 0;
  virtual EnvState reset(Rng& rng) const = 0;
  virtual Transition step(const EnvState& state, int action, Rng& rng) const = 0;
  virtual std::unique_ptr<Environment> clone() const = 0;
};

// ---------------------------------------------------------------------------
// Four-Rooms grid

struct GridSpec {
  int width = 0;
  int height = 0;
  std::set<Cell> walls;
  Cell goal;
  double slip_prob = 1.0 / 3.0;
  double goal_reward = 50.0;
  double step_reward = 0.0;
};

/// 13x13 four-rooms layout: 104 open cells, one hallway per inner wall,
/// goal in the east hallway, slip 1/3, goal reward 50.
GridSpec four_rooms_default();

/// Parses a plain-text map: one row per line, '#' wall, '.' open, 'G' goal.
/// Reward and slip settings are taken from `base`.
GridSpec parse_grid_map(std::string_view text, const GridSpec& base = GridSpec{});

/// Throws std::invalid_argument on a malformed spec (goal on a wall, slip
/// outside [0,1], or an open cell that cannot reach the goal).
void validate(const GridSpec& spec);

class GridWorld final : public Environment {
 public:
  explicit GridWorld(GridSpec spec);

  EnvKind kind() const override { return EnvKind::kFourRooms; }
  int num_actions() const override { return kNumGridActions; }

  /// Uniform over open cells other than the goal.
  EnvState reset(Rng& rng) const override;
  Transition step(const EnvState& state, int action, Rng& rng) const override;
  std::unique_ptr<Environment> clone() const override;

  const GridSpec& spec() const { return spec_; }
  std::size_t num_states() const { return open_cells_.size(); }
  bool is_open(Cell cell) const;
  std::size_t index_of(Cell cell) const;
  Cell cell_of(std::size_t index) const { return open_cells_.at(index); }
  GridState state_at(Cell cell) const { return {cell, index_of(cell)}; }
  std::span<const Cell> open_cells() const { return open_cells_; }

 private:
  GridSpec spec_;
  std::vector<Cell> open_cells_;
  std::vector<int> index_grid_;  // height*width, -1 on walls
};

/// One grid transition. With probability 1 - slip_prob the chosen move is
/// attempted (blocked moves stay put); otherwise a uniformly random open
/// neighbour is entered.
Transition grid_step(const GridWorld& world, const GridState& state, GridAction action, Rng& rng);

// ---------------------------------------------------------------------------
// Point-mass maze

struct Rect {
  Vec2 lo = Vec2::Zero();
  Vec2 hi = Vec2::Zero();

  /// Strict interior test; rectangle boundaries belong to free space.
  bool contains_interior(const Vec2& p) const {
    return p.x() > lo.x() && p.x() < hi.x() && p.y() > lo.y() && p.y() < hi.y();
  }
  bool contains_closed(const Vec2& p) const {
    return p.x() >= lo.x() && p.x() <= hi.x() && p.y() >= lo.y() && p.y() <= hi.y();
  }
};

struct MazeGoal {
  Vec2 center = Vec2::Zero();
  double radius = 0.1;
  double reward = 1.0;
  bool active = true;
};

struct MazeSpec {
  Rect bounds;
  std::vector<Rect> walls;
  Vec2 start = Vec2::Zero();
  std::vector<MazeGoal> goals;
  double action_scale = 0.05;
  double max_force = 1.0;
  double step_reward = 0.0;
  /// Number of evenly spaced force directions exposed as discrete actions.
  int num_directions = 8;
  /// Start uniformly over free space (away from goals) instead of at `start`.
  bool random_start = false;

  bool is_free(const Vec2& p) const;
  int num_active_goals() const;
};

/// T-shaped maze: vertical corridor [-0.1,0.1]x[-0.2,0.3] joined to a
/// horizontal corridor [-0.4,0.4]x[0.2,0.4]. Start (0,-0.1). With
/// `two_goals` goals sit at (0.3,0.3) and (-0.3,0.3); otherwise only the
/// right goal exists. Goal radius 0.1, reward +1.
MazeSpec tmaze_default(bool two_goals = true);

void validate(const MazeSpec& spec);

/// Moves by action_scale * clamp(force). A move whose segment crosses a wall
/// is resolved per axis: x first if legal, then y if legal.
Transition maze_step(const MazeSpec& spec, const MazeState& state, const Vec2& force);

/// Deactivates the goal with the largest visit count, lowest index on ties.
/// Throws std::invalid_argument("nothing to remove") with < 2 active goals.
MazeSpec remove_most_visited_goal(const MazeSpec& spec, std::span<const int> visit_counts);

class PointMaze final : public Environment {
 public:
  explicit PointMaze(MazeSpec spec);

  EnvKind kind() const override { return EnvKind::kTMaze; }
  int num_actions() const override { return spec_.num_directions; }
  EnvState reset(Rng& rng) const override;
  Transition step(const EnvState& state, int action, Rng& rng) const override;
  std::unique_ptr<Environment> clone() const override;

  const MazeSpec& spec() const { return spec_; }
  void set_spec(MazeSpec spec);
  Vec2 force_for(int action) const;

 private:
  MazeSpec spec_;
};

}  // namespace ioc
