#pragma once

#include <cstdint>
#include <deque>
#include <utility>
#include <vector>

#include "usher/mdp.hpp"
#include "usher/rng.hpp"

namespace usher {

struct Transition {
  StateId s = 0;
  ActionId a = 0;
  StateId s_next = 0;
  GoalId g_p = 0;
  GoalId g_achieved = 0;            // phi(s_next), recorded at collection time
  std::uint32_t t_remaining = 0;    // steps left in the trajectory counting this one
  std::uint32_t episode_id = 0;
  std::uint32_t step_index = 0;
};

// One episode: g_p is fixed before the trajectory begins and never changes.
struct Trajectory {
  GoalId g_p = 0;
  std::vector<Transition> steps;
};

enum class GoalSource : std::uint8_t { kept_policy_goal, hindsight_future, uniform_space };

struct GoalSample {
  GoalId g_r = 0;
  GoalSource source = GoalSource::kept_policy_goal;
};

// Bounded FIFO over whole trajectories; sampling is uniform over stored
// transitions. Single writer; reads may share between writes.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity_episodes);

  void record_trajectory(Trajectory traj);
  std::size_t num_episodes() const { return trajs_.size(); }
  std::size_t num_transitions() const { return total_; }
  const Trajectory& trajectory(std::size_t i) const { return trajs_[i]; }

  // (trajectory index, step index), uniform over all stored transitions.
  std::pair<std::size_t, std::size_t> sample_transition(Rng& rng) const;

 private:
  std::size_t capacity_;
  std::deque<Trajectory> trajs_;
  std::vector<std::size_t> cum_;  // cumulative step counts per trajectory
  std::size_t total_ = 0;

  void rebuild_cumulative();
};

// With probability 1/(k+1) keeps the trajectory's g_p; otherwise returns the
// achieved goal of a state drawn uniformly from the future sub-trajectory
// starting at this step (s_next included).
GoalSample relabel_her(const Trajectory& traj, std::size_t step_index, int k, Rng& rng);

GoalSample sample_uniform_goal(std::uint32_t num_goals, Rng& rng);

struct BatchItem {
  Transition t;
  GoalSample g_r;      // hindsight / kept goal
  GoalSample g_r_alt;  // uniform alternative goal
};

std::vector<BatchItem> sample_batch(const ReplayBuffer& buffer, std::size_t batch_size, int k,
                                    std::uint32_t num_goals, Rng& rng);

}  // namespace usher
