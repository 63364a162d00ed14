#include "usher/environments.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace usher {

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char c : text) {
    if (c == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur.push_back(c);
    }
  }
  if (!cur.empty()) lines.push_back(cur);
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

[[noreturn]] void parse_fail(std::uint32_t row, std::uint32_t col, const std::string& what) {
  std::ostringstream os;
  os << "grid map parse error at row " << row << ", column " << col << ": " << what;
  throw std::invalid_argument(os.str());
}

}  // namespace

std::uint32_t GridMap::start_index() const {
  for (std::uint32_t i = 0; i < cells.size(); ++i)
    if (cells[i] == Cell::Start) return i;
  throw std::logic_error("grid map without start cell");
}

GridMap parse_grid_map(const std::string& text) {
  auto lines = split_lines(text);
  if (lines.empty()) parse_fail(1, 1, "empty map");

  GridMap map;
  map.height = static_cast<std::uint32_t>(lines.size());
  map.width = static_cast<std::uint32_t>(lines[0].size());
  if (map.width == 0) parse_fail(1, 1, "empty first row");
  map.cells.reserve(static_cast<std::size_t>(map.width) * map.height);

  std::uint32_t starts = 0, goals = 0;
  for (std::uint32_t r = 0; r < map.height; ++r) {
    const std::string& line = lines[r];
    if (line.size() != map.width)
      parse_fail(r + 1, static_cast<std::uint32_t>(line.size()) + 1,
                 "row length " + std::to_string(line.size()) + " does not match width " +
                     std::to_string(map.width));
    for (std::uint32_t c = 0; c < map.width; ++c) {
      switch (line[c]) {
        case '#': map.cells.push_back(Cell::Wall); break;
        case '.': map.cells.push_back(Cell::Free); break;
        case 'S': map.cells.push_back(Cell::Start); ++starts; break;
        case 'G': map.cells.push_back(Cell::Goal); ++goals; break;
        case '!': map.cells.push_back(Cell::Hazard); break;
        default: parse_fail(r + 1, c + 1, std::string("unknown symbol '") + line[c] + "'");
      }
    }
  }
  if (starts == 0) parse_fail(1, 1, "no start cell 'S'");
  if (starts > 1) parse_fail(1, 1, "multiple start cells");
  if (goals == 0) parse_fail(1, 1, "no goal cell 'G'");
  return map;
}

GridMap load_grid_map(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open grid map file: " + path);
  std::ostringstream os;
  os << in.rdbuf();
  return parse_grid_map(os.str());
}

RiskyGridEnv build_risky_gridworld(const GridMap& map, std::uint32_t horizon, double gamma) {
  RiskyGridEnv env;
  env.map = map;

  const std::uint32_t n_cells = map.width * map.height;
  env.cell_to_state.assign(n_cells, 0);

  // Navigable cells become states 0..n-1 in row-major order; the absorbing
  // fail state goes last. Goals mirror the state order so phi(state) = state
  // for cells and the fail state maps to a reserved goal.
  std::vector<std::uint32_t> state_cell;
  for (std::uint32_t i = 0; i < n_cells; ++i) {
    if (map.cells[i] == Cell::Wall) continue;
    env.cell_to_state[i] = static_cast<StateId>(state_cell.size());
    state_cell.push_back(i);
  }
  const std::uint32_t n_nav = static_cast<std::uint32_t>(state_cell.size());
  env.fail_state = n_nav;
  env.fail_goal = n_nav;

  MultiGoalMdp& mdp = env.mdp;
  mdp.num_states = n_nav + 1;
  mdp.num_actions = 5;
  mdp.num_goals = n_nav + 1;
  mdp.horizon = horizon;
  mdp.discount = gamma;
  mdp.goal_map.resize(mdp.num_states);
  mdp.terminal_flags.assign(mdp.num_states, 0);
  mdp.terminal_flags[env.fail_state] = 1;
  mdp.start_distribution.assign(mdp.num_states, 0.0);
  mdp.state_names.resize(mdp.num_states);

  for (StateId s = 0; s < n_nav; ++s) {
    mdp.goal_map[s] = s;
    std::uint32_t cell = state_cell[s];
    std::uint32_t r = cell / map.width, c = cell % map.width;
    mdp.state_names[s] = "(" + std::to_string(r) + "," + std::to_string(c) + ")";
    if (map.cells[cell] == Cell::Start) {
      env.start_state = s;
      mdp.start_distribution[s] = 1.0;
    }
    if (map.cells[cell] == Cell::Goal) env.goal_cell_goal = s;
  }
  mdp.goal_map[env.fail_state] = env.fail_goal;
  mdp.state_names[env.fail_state] = "(fail)";

  mdp.transition.assign(static_cast<std::size_t>(mdp.num_states) * mdp.num_actions,
                        std::vector<double>(mdp.num_states, 0.0));

  const int dr[5] = {-1, 1, 0, 0, 0};
  const int dc[5] = {0, 0, -1, 1, 0};
  for (StateId s = 0; s < n_nav; ++s) {
    std::uint32_t cell = state_cell[s];
    int r = static_cast<int>(cell / map.width), c = static_cast<int>(cell % map.width);
    for (ActionId a = 0; a < 5; ++a) {
      int nr = r + dr[a], nc = c + dc[a];
      std::uint32_t dest_cell = cell;
      if (nr >= 0 && nr < static_cast<int>(map.height) && nc >= 0 &&
          nc < static_cast<int>(map.width) &&
          map.at(static_cast<std::uint32_t>(nr), static_cast<std::uint32_t>(nc)) != Cell::Wall) {
        dest_cell = static_cast<std::uint32_t>(nr) * map.width + static_cast<std::uint32_t>(nc);
      }
      StateId dest = env.cell_to_state[dest_cell];
      auto& row = mdp.transition[mdp.row_index(s, a)];
      if (map.cells[dest_cell] == Cell::Hazard) {
        row[env.fail_state] += map.hazard_stop_prob;
        row[dest] += 1.0 - map.hazard_stop_prob;
      } else {
        row[dest] += 1.0;
      }
    }
  }
  for (ActionId a = 0; a < 5; ++a)
    mdp.transition[mdp.row_index(env.fail_state, a)][env.fail_state] = 1.0;

  for (StateId s = 0; s < n_nav; ++s)
    if (s != env.start_state) env.pursue_goals.push_back(s);

  mdp.validate();
  return env;
}

RedLightEnv build_red_light(const RedLightConfig& cfg, std::uint32_t horizon, double gamma) {
  if (cfg.road_length < 2) throw std::invalid_argument("red light: road too short");
  if (cfg.intersection_cell >= cfg.road_length)
    throw std::invalid_argument("red light: intersection outside the road");
  if (cfg.green_steps == 0 || cfg.yellow_steps == 0 || cfg.red_steps == 0)
    throw std::invalid_argument("red light: phase lengths must be >= 1");
  if (cfg.crash_prob < 0.0 || cfg.crash_prob > 1.0)
    throw std::invalid_argument("red light: crash probability outside [0,1]");

  RedLightEnv env;
  env.cfg = cfg;
  const std::uint32_t period = env.period();
  const std::uint32_t n_drive = cfg.road_length * period;
  env.fail_state = n_drive;
  env.fail_goal = cfg.road_length;

  MultiGoalMdp& mdp = env.mdp;
  mdp.num_states = n_drive + 1;
  mdp.num_actions = 2;
  mdp.num_goals = cfg.road_length + 1;
  mdp.horizon = horizon;
  mdp.discount = gamma;
  mdp.goal_map.resize(mdp.num_states);
  mdp.terminal_flags.assign(mdp.num_states, 0);
  mdp.terminal_flags[env.fail_state] = 1;
  mdp.start_distribution.assign(mdp.num_states, 0.0);
  mdp.state_names.resize(mdp.num_states);

  for (std::uint32_t cell = 0; cell < cfg.road_length; ++cell) {
    for (std::uint32_t phase = 0; phase < period; ++phase) {
      StateId s = env.state_of(cell, phase);
      mdp.goal_map[s] = cell;
      mdp.state_names[s] = "cell" + std::to_string(cell) + "/phase" + std::to_string(phase);
    }
  }
  mdp.goal_map[env.fail_state] = env.fail_goal;
  mdp.state_names[env.fail_state] = "(crashed)";

  if (cfg.random_initial_phase) {
    for (std::uint32_t phase = 0; phase < period; ++phase)
      mdp.start_distribution[env.state_of(0, phase)] = 1.0 / period;
  } else {
    mdp.start_distribution[env.state_of(0, 0)] = 1.0;
  }

  mdp.transition.assign(static_cast<std::size_t>(mdp.num_states) * mdp.num_actions,
                        std::vector<double>(mdp.num_states, 0.0));
  for (std::uint32_t cell = 0; cell < cfg.road_length; ++cell) {
    for (std::uint32_t phase = 0; phase < period; ++phase) {
      StateId s = env.state_of(cell, phase);
      std::uint32_t next_phase = (phase + 1) % period;
      for (ActionId a = 0; a < 2; ++a) {
        std::uint32_t next_cell =
            (a == kForward) ? std::min(cell + 1, cfg.road_length - 1) : cell;
        StateId dest = env.state_of(next_cell, next_phase);
        auto& row = mdp.transition[mdp.row_index(s, a)];
        if (next_cell == cfg.intersection_cell && env.is_red(next_phase)) {
          row[env.fail_state] += cfg.crash_prob;
          row[dest] += 1.0 - cfg.crash_prob;
        } else {
          row[dest] += 1.0;
        }
      }
    }
  }
  for (ActionId a = 0; a < 2; ++a)
    mdp.transition[mdp.row_index(env.fail_state, a)][env.fail_state] = 1.0;

  for (std::uint32_t cell = 1; cell < cfg.road_length; ++cell) env.pursue_goals.push_back(cell);

  mdp.validate();
  return env;
}

TorusFreezeEnv build_torus_freeze(const TorusFreezeConfig& cfg, std::uint32_t horizon,
                                  double gamma) {
  if (cfg.dims == 0 || cfg.cells_per_dim < 2)
    throw std::invalid_argument("torus: need dims >= 1 and cells_per_dim >= 2");

  TorusFreezeEnv env;
  env.cfg = cfg;
  std::uint32_t n_cells = 1;
  for (std::uint32_t d = 0; d < cfg.dims; ++d) n_cells *= cfg.cells_per_dim;
  env.num_cells = n_cells;
  env.freeze_action = 2 * cfg.dims;

  MultiGoalMdp& mdp = env.mdp;
  mdp.num_states = 2 * n_cells;  // unfrozen row, then frozen row
  mdp.num_actions = 2 * cfg.dims + 1;
  mdp.num_goals = n_cells;
  mdp.horizon = horizon;
  mdp.discount = gamma;
  mdp.goal_map.resize(mdp.num_states);
  mdp.terminal_flags.assign(mdp.num_states, 0);
  mdp.start_distribution.assign(mdp.num_states, 0.0);
  mdp.start_distribution[0] = 1.0;
  env.start_state = 0;

  for (std::uint32_t cell = 0; cell < n_cells; ++cell) {
    mdp.goal_map[cell] = cell;
    mdp.goal_map[env.frozen_state(cell)] = cell;  // frozen flag excluded from the goal
    mdp.terminal_flags[env.frozen_state(cell)] = 1;
  }

  mdp.transition.assign(static_cast<std::size_t>(mdp.num_states) * mdp.num_actions,
                        std::vector<double>(mdp.num_states, 0.0));

  // Mixed-radix coordinates over cells_per_dim.
  auto move = [&](std::uint32_t cell, std::uint32_t dim, int delta) {
    std::uint32_t stride = 1;
    for (std::uint32_t d = 0; d < dim; ++d) stride *= cfg.cells_per_dim;
    std::uint32_t coord = (cell / stride) % cfg.cells_per_dim;
    std::uint32_t next =
        (coord + cfg.cells_per_dim + static_cast<std::uint32_t>(delta)) % cfg.cells_per_dim;
    return cell + (next - coord) * stride;
  };

  for (std::uint32_t cell = 0; cell < n_cells; ++cell) {
    for (std::uint32_t d = 0; d < cfg.dims; ++d) {
      mdp.transition[mdp.row_index(cell, 2 * d)][move(cell, d, +1)] = 1.0;
      mdp.transition[mdp.row_index(cell, 2 * d + 1)][move(cell, d, -1)] = 1.0;
    }
    auto& freeze_row = mdp.transition[mdp.row_index(cell, env.freeze_action)];
    for (std::uint32_t land = 0; land < n_cells; ++land)
      freeze_row[env.frozen_state(land)] = 1.0 / n_cells;
    for (ActionId a = 0; a < mdp.num_actions; ++a)
      mdp.transition[mdp.row_index(env.frozen_state(cell), a)][env.frozen_state(cell)] = 1.0;
  }

  for (std::uint32_t cell = 1; cell < n_cells; ++cell) env.pursue_goals.push_back(cell);

  mdp.validate();
  return env;
}

}  // namespace usher
