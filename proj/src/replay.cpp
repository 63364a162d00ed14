#include "usher/replay.hpp"

#include <stdexcept>

namespace usher {

ReplayBuffer::ReplayBuffer(std::size_t capacity_episodes) : capacity_(capacity_episodes) {
  if (capacity_ == 0) throw std::invalid_argument("replay buffer: zero capacity");
}

void ReplayBuffer::record_trajectory(Trajectory traj) {
  if (traj.steps.empty()) throw std::invalid_argument("record_trajectory: empty trajectory");
  const std::size_t n = traj.steps.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Transition& tr = traj.steps[i];
    if (tr.g_p != traj.g_p)
      throw std::invalid_argument("record_trajectory: g_p changed inside a trajectory");
    if (tr.t_remaining != n - i)
      throw std::invalid_argument("record_trajectory: t_remaining inconsistent with position");
  }
  if (trajs_.size() == capacity_) trajs_.pop_front();
  trajs_.push_back(std::move(traj));
  rebuild_cumulative();
}

void ReplayBuffer::rebuild_cumulative() {
  cum_.resize(trajs_.size());
  std::size_t acc = 0;
  for (std::size_t i = 0; i < trajs_.size(); ++i) {
    acc += trajs_[i].steps.size();
    cum_[i] = acc;
  }
  total_ = acc;
}

std::pair<std::size_t, std::size_t> ReplayBuffer::sample_transition(Rng& rng) const {
  if (total_ == 0) throw std::logic_error("sample_transition: empty buffer");
  std::size_t pick = rng.next_below(static_cast<std::uint32_t>(total_));
  // First trajectory whose cumulative count exceeds pick.
  std::size_t lo = 0, hi = cum_.size() - 1;
  while (lo < hi) {
    std::size_t mid = (lo + hi) / 2;
    if (cum_[mid] > pick)
      hi = mid;
    else
      lo = mid + 1;
  }
  std::size_t before = lo == 0 ? 0 : cum_[lo - 1];
  return {lo, pick - before};
}

GoalSample relabel_her(const Trajectory& traj, std::size_t step_index, int k, Rng& rng) {
  if (step_index >= traj.steps.size())
    throw std::out_of_range("relabel_her: step index outside trajectory");
  if (k < 0) throw std::invalid_argument("relabel_her: k must be non-negative");
  double keep_prob = 1.0 / (k + 1);
  if (rng.next_double() < keep_prob) return {traj.g_p, GoalSource::kept_policy_goal};
  // Uniform over the t_remaining future states; slot 0 is s_next itself.
  std::uint32_t span = traj.steps[step_index].t_remaining;
  std::uint32_t slot = rng.next_below(span);
  return {traj.steps[step_index + slot].g_achieved, GoalSource::hindsight_future};
}

GoalSample sample_uniform_goal(std::uint32_t num_goals, Rng& rng) {
  if (num_goals == 0) throw std::invalid_argument("sample_uniform_goal: empty goal space");
  return {rng.next_below(num_goals), GoalSource::uniform_space};
}

std::vector<BatchItem> sample_batch(const ReplayBuffer& buffer, std::size_t batch_size, int k,
                                    std::uint32_t num_goals, Rng& rng) {
  if (buffer.num_transitions() == 0) throw std::logic_error("sample_batch: empty buffer");
  std::vector<BatchItem> batch;
  batch.reserve(batch_size);
  for (std::size_t i = 0; i < batch_size; ++i) {
    auto [ti, si] = buffer.sample_transition(rng);
    const Trajectory& traj = buffer.trajectory(ti);
    BatchItem item;
    item.t = traj.steps[si];
    item.g_r = relabel_her(traj, si, k, rng);
    item.g_r_alt = sample_uniform_goal(num_goals, rng);
    batch.push_back(item);
  }
  return batch;
}

}  // namespace usher
