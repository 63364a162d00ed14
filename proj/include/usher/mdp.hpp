#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "usher/rng.hpp"

namespace usher {

using StateId = std::uint32_t;
using ActionId = std::uint32_t;
using GoalId = std::uint32_t;

// Enumerable multi-goal MDP: dense transition table, per-state goal map phi,
// sparse reward R(s', g) = 1{phi(s') = g}. Immutable after construction;
// share freely across threads.
struct MultiGoalMdp {
  std::uint32_t num_states = 0;
  std::uint32_t num_actions = 0;
  std::uint32_t num_goals = 0;
  std::vector<double> start_distribution;       // [num_states]
  std::vector<std::vector<double>> transition;  // [s * num_actions + a] -> row over s'
  std::vector<GoalId> goal_map;                 // phi: state -> goal
  std::vector<std::uint8_t> terminal_flags;     // absorbing states (rows self-loop)
  std::uint32_t horizon = 0;
  double discount = 1.0;
  std::vector<std::string> state_names;         // optional, for dumps and errors

  std::size_t row_index(StateId s, ActionId a) const {
    return static_cast<std::size_t>(s) * num_actions + a;
  }

  // Checks every construction invariant: row sums within 1e-9 of 1, terminal
  // self-loops, start distribution normalized, goal map total and in range.
  // Throws std::invalid_argument naming the first offender.
  void validate() const;
};

// Exact transition row, read-only.
std::span<const double> transition_distribution(const MultiGoalMdp& mdp, StateId s, ActionId a);

// Draws s' ~ P(. | s, a).
StateId sample_step(const MultiGoalMdp& mdp, StateId s, ActionId a, Rng& rng);

// 1 if phi(s_next) == g else 0.
double reward(const MultiGoalMdp& mdp, StateId s_next, GoalId g);

StateId sample_start(const MultiGoalMdp& mdp, Rng& rng);

}  // namespace usher
