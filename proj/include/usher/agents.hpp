#pragma once

#include <cstdint>
#include <unordered_map>

#include "usher/density.hpp"
#include "usher/replay.hpp"

namespace usher {

struct LearnerConfig {
  double gamma = 0.825;
  int k = 8;
  double alpha_q = 0.01;
  double alpha_f = 0.5;
  double clip_c = 0.3;
  double lr0 = 0.01;
  double lr_decay = 0.75;
  double lr_decay_offset = 100.0;  // lr(n) = lr0 * (1 + n/offset)^(-lr_decay)
  double epsilon = 0.2;
  std::uint32_t batch_size = 64;
  std::uint32_t updates_per_episode = 1;  // batch passes per episode
  bool q_t_conditioned = false;
  int f_target_interval = 0;  // episodes between target snapshots; 0 = target is live
  enum class FMode { sampled, dense } f_mode = FMode::sampled;

  void validate() const;
  double lr(std::uint64_t episode) const;
};

// Sparse two-goal action-value table Q(s, a, g_r, g_p), default 0. The
// optional T axis exists for fidelity studies and is off by default.
class QTable {
 public:
  explicit QTable(bool t_conditioned = false) : t_conditioned_(t_conditioned) {}

  bool t_conditioned() const { return t_conditioned_; }
  std::size_t size() const { return q_.size(); }

  double get(StateId s, ActionId a, GoalId g_r, GoalId g_p, std::uint32_t T = 0) const {
    auto it = q_.find(key(s, a, g_r, g_p, T));
    return it == q_.end() ? 0.0 : it->second;
  }
  void add(StateId s, ActionId a, GoalId g_r, GoalId g_p, double delta, std::uint32_t T = 0) {
    q_[key(s, a, g_r, g_p, T)] += delta;
  }
  void set(StateId s, ActionId a, GoalId g_r, GoalId g_p, double value, std::uint32_t T = 0) {
    q_[key(s, a, g_r, g_p, T)] = value;
  }

 private:
  std::uint64_t key(StateId s, ActionId a, GoalId g_r, GoalId g_p, std::uint32_t T) const {
    // 14 bits per id, 8 bits action, 14 bits T slot.
    std::uint64_t t = t_conditioned_ ? T : 0;
    return (static_cast<std::uint64_t>(s) << 50) | (static_cast<std::uint64_t>(a & 0xff) << 42) |
           (static_cast<std::uint64_t>(g_r) << 28) | (static_cast<std::uint64_t>(g_p) << 14) | t;
  }
  std::unordered_map<std::uint64_t, double> q_;
  bool t_conditioned_;
};

// argmax_a Q(s, a, g_p, g_p); ties break toward the lowest action index.
ActionId greedy_action(const QTable& q, StateId s, GoalId g_p, std::uint32_t num_actions,
                       std::uint32_t T = 0);

// Uniform random action with probability epsilon, greedy otherwise.
ActionId behavior_action(const QTable& q, StateId s, GoalId g_p, std::uint32_t num_actions,
                         double epsilon, Rng& rng, std::uint32_t T = 0);

// min(max(w, 1/(1+c)), 1+c).
double clip_ratio(double w, double c);

// Theorem-2 mixture weight from the learned density table (unclipped).
double compute_w(const FTable& f, StateId s, ActionId a, StateId s_next, GoalId g_achieved,
                 GoalId g_p, GoalId g_r, std::uint32_t T, double alpha, int keep_k,
                 const PolicyFn& policy);

// Single-goal TD update Q(s,a,g,g) toward R + gamma*(1-done)*max_a' Q(s',a',g,g).
void q_update_vanilla(QTable& q, const Transition& tr, GoalId g, double lr, double gamma,
                      std::uint32_t num_actions);

// Classic HER baseline: identical TD update targeting the relabeled goal's
// diagonal entry Q(s,a,g_r,g_r).
void her_update(QTable& q, const Transition& tr, const GoalSample& g_r, double lr, double gamma,
                std::uint32_t num_actions);

// Importance-weighted two-goal update plus the configured density update.
void usher_update(QTable& q, FTable& f, const BatchItem& item, const LearnerConfig& cfg,
                  double lr, std::uint32_t num_actions);

}  // namespace usher
