#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "usher/mdp.hpp"

namespace usher {

// ---------------------------------------------------------------------------
// Grid maps
// ---------------------------------------------------------------------------

enum class Cell : std::uint8_t { Free, Wall, Start, Goal, Hazard };

struct GridMap {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<Cell> cells;  // row-major
  double hazard_stop_prob = 0.75;

  Cell at(std::uint32_t row, std::uint32_t col) const { return cells[row * width + col]; }
  std::uint32_t start_index() const;  // unique by construction
};

// Map symbols: '#' wall, '.' free, 'S' start, 'G' goal, '!' hazard.
// Throws std::invalid_argument naming the offending row/column (1-based).
GridMap parse_grid_map(const std::string& text);

GridMap load_grid_map(const std::string& path);

// Grid actions, in tie-break order.
enum GridAction : ActionId { kUp = 0, kDown = 1, kLeft = 2, kRight = 3, kStay = 4 };

struct RiskyGridEnv {
  MultiGoalMdp mdp;
  GridMap map;
  StateId start_state = 0;
  StateId fail_state = 0;
  GoalId fail_goal = 0;
  GoalId goal_cell_goal = 0;           // goal id of the map's 'G' cell
  std::vector<GoalId> pursue_goals;    // navigable-cell goals, start cell excluded
  std::vector<StateId> cell_to_state;  // width*height, fail_state for walls
};

// 5 actions (up/down/left/right/stay); moves into walls or off the border are
// no-ops. A step that ends on a hazard cell is redirected to the absorbing
// fail state with probability map.hazard_stop_prob. Goals are the navigable
// cells (phi = cell identity); the fail state carries its own reserved goal.
RiskyGridEnv build_risky_gridworld(const GridMap& map, std::uint32_t horizon, double gamma);

// ---------------------------------------------------------------------------
// Red light corridor
// ---------------------------------------------------------------------------

struct RedLightConfig {
  std::uint32_t road_length = 10;
  std::uint32_t intersection_cell = 5;
  std::uint32_t green_steps = 1;
  std::uint32_t yellow_steps = 1;
  std::uint32_t red_steps = 4;
  double crash_prob = 0.75;
  bool random_initial_phase = true;
};

enum RedLightAction : ActionId { kForward = 0, kWait = 1 };

struct RedLightEnv {
  MultiGoalMdp mdp;
  RedLightConfig cfg;
  GoalId fail_goal = 0;
  std::vector<GoalId> pursue_goals;  // cells past the start

  std::uint32_t period() const { return cfg.green_steps + cfg.yellow_steps + cfg.red_steps; }
  bool is_red(std::uint32_t phase) const { return phase >= cfg.green_steps + cfg.yellow_steps; }
  StateId state_of(std::uint32_t cell, std::uint32_t phase) const { return cell * period() + phase; }
  std::uint32_t cell_of(StateId s) const { return s / period(); }
  std::uint32_t phase_of(StateId s) const { return s % period(); }
  bool occupies_red_intersection(StateId s) const {
    return s != fail_state && cell_of(s) == cfg.intersection_cell && is_red(phase_of(s));
  }
  StateId fail_state = 0;
};

// State = (cell, light phase). Ending a step on the intersection while the
// light is red crashes to the absorbing fail state with crash_prob.
RedLightEnv build_red_light(const RedLightConfig& cfg, std::uint32_t horizon, double gamma);

// ---------------------------------------------------------------------------
// Torus with freeze
// ---------------------------------------------------------------------------

struct TorusFreezeConfig {
  std::uint32_t dims = 2;
  std::uint32_t cells_per_dim = 8;
};

struct TorusFreezeEnv {
  MultiGoalMdp mdp;
  TorusFreezeConfig cfg;
  StateId start_state = 0;  // cell 0, unfrozen
  ActionId freeze_action = 0;
  std::uint32_t num_cells = 0;
  std::vector<GoalId> pursue_goals;  // all cells except the start cell

  StateId frozen_state(std::uint32_t cell) const { return num_cells + cell; }
  bool is_frozen(StateId s) const { return s >= num_cells; }
};

// 2*dims wrapping move actions (+d then -d per dimension) plus Freeze, which
// teleports uniformly over cells and sets the frozen flag. Frozen states
// ignore every action. phi returns the cell; the frozen flag is not part of
// the goal.
TorusFreezeEnv build_torus_freeze(const TorusFreezeConfig& cfg, std::uint32_t horizon, double gamma);

}  // namespace usher
