#include "usher/mdp.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace usher {

namespace {

std::string state_label(const MultiGoalMdp& mdp, StateId s) {
  if (s < mdp.state_names.size() && !mdp.state_names[s].empty()) return mdp.state_names[s];
  return "state " + std::to_string(s);
}

}  // namespace

void MultiGoalMdp::validate() const {
  if (num_states == 0 || num_actions == 0 || num_goals == 0)
    throw std::invalid_argument("mdp: empty state/action/goal space");
  if (horizon == 0) throw std::invalid_argument("mdp: horizon must be positive");
  if (discount < 0.0 || discount > 1.0)
    throw std::invalid_argument("mdp: discount outside [0,1]");
  if (start_distribution.size() != num_states)
    throw std::invalid_argument("mdp: start distribution size mismatch");
  if (goal_map.size() != num_states)
    throw std::invalid_argument("mdp: goal map must be total over states");
  if (terminal_flags.size() != num_states)
    throw std::invalid_argument("mdp: terminal flag vector size mismatch");
  if (transition.size() != static_cast<std::size_t>(num_states) * num_actions)
    throw std::invalid_argument("mdp: transition table size mismatch");

  double start_sum = 0.0;
  for (double p : start_distribution) {
    if (p < 0.0) throw std::invalid_argument("mdp: negative start probability");
    start_sum += p;
  }
  if (std::abs(start_sum - 1.0) > 1e-9)
    throw std::invalid_argument("mdp: start distribution sums to " + std::to_string(start_sum));

  for (StateId s = 0; s < num_states; ++s) {
    if (goal_map[s] >= num_goals)
      throw std::invalid_argument("mdp: goal map out of range at " + state_label(*this, s));
    for (ActionId a = 0; a < num_actions; ++a) {
      const auto& row = transition[row_index(s, a)];
      if (row.size() != num_states)
        throw std::invalid_argument("mdp: transition row size mismatch at " + state_label(*this, s));
      double sum = 0.0;
      for (double p : row) {
        if (p < 0.0)
          throw std::invalid_argument("mdp: negative transition probability at " +
                                      state_label(*this, s));
        sum += p;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("mdp: transition row for " + state_label(*this, s) +
                                    ", action " + std::to_string(a) + " sums to " +
                                    std::to_string(sum));
      if (terminal_flags[s] && std::abs(row[s] - 1.0) > 1e-12)
        throw std::invalid_argument("mdp: terminal " + state_label(*this, s) +
                                    " must self-loop with probability 1");
    }
  }
}

std::span<const double> transition_distribution(const MultiGoalMdp& mdp, StateId s, ActionId a) {
  if (s >= mdp.num_states || a >= mdp.num_actions)
    throw std::out_of_range("transition_distribution: index out of range");
  return mdp.transition[mdp.row_index(s, a)];
}

StateId sample_step(const MultiGoalMdp& mdp, StateId s, ActionId a, Rng& rng) {
  auto row = transition_distribution(mdp, s, a);
  double u = rng.next_double();
  double acc = 0.0;
  StateId last_positive = s;
  for (StateId next = 0; next < mdp.num_states; ++next) {
    double p = row[next];
    if (p <= 0.0) continue;
    acc += p;
    last_positive = next;
    if (u < acc) return next;
  }
  // Row sums to 1 within tolerance; u landed in the rounding slack.
  return last_positive;
}

double reward(const MultiGoalMdp& mdp, StateId s_next, GoalId g) {
  if (s_next >= mdp.num_states || g >= mdp.num_goals)
    throw std::out_of_range("reward: index out of range");
  return mdp.goal_map[s_next] == g ? 1.0 : 0.0;
}

StateId sample_start(const MultiGoalMdp& mdp, Rng& rng) {
  double u = rng.next_double();
  double acc = 0.0;
  StateId last_positive = 0;
  for (StateId s = 0; s < mdp.num_states; ++s) {
    double p = mdp.start_distribution[s];
    if (p <= 0.0) continue;
    acc += p;
    last_positive = s;
    if (u < acc) return s;
  }
  return last_positive;
}

}  // namespace usher
