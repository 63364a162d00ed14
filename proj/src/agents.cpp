#include "usher/agents.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace usher {

void LearnerConfig::validate() const {
  if (gamma < 0.0 || gamma > 1.0) throw std::invalid_argument("learner: gamma outside [0,1]");
  if (k < 0) throw std::invalid_argument("learner: k must be non-negative");
  if (alpha_q <= 0.0 || alpha_q > 1.0)
    throw std::invalid_argument("learner: alpha_q outside (0,1]");
  if (alpha_f <= 0.0 || alpha_f > 1.0)
    throw std::invalid_argument("learner: alpha_f outside (0,1]");
  if (clip_c <= 0.0) throw std::invalid_argument("learner: clip c must be positive");
  if (lr0 <= 0.0 || lr0 > 1.0) throw std::invalid_argument("learner: lr0 outside (0,1]");
  if (lr_decay < 0.0) throw std::invalid_argument("learner: negative lr decay exponent");
  if (lr_decay_offset <= 0.0) throw std::invalid_argument("learner: lr decay offset must be > 0");
  if (epsilon < 0.0 || epsilon > 1.0) throw std::invalid_argument("learner: epsilon outside [0,1]");
  if (batch_size == 0) throw std::invalid_argument("learner: zero batch size");
  if (f_target_interval < 0) throw std::invalid_argument("learner: negative target interval");
}

double LearnerConfig::lr(std::uint64_t episode) const {
  return lr0 * std::pow(1.0 + static_cast<double>(episode) / lr_decay_offset, -lr_decay);
}

ActionId greedy_action(const QTable& q, StateId s, GoalId g_p, std::uint32_t num_actions,
                       std::uint32_t T) {
  ActionId best = 0;
  double best_q = q.get(s, 0, g_p, g_p, T);
  for (ActionId a = 1; a < num_actions; ++a) {
    double v = q.get(s, a, g_p, g_p, T);
    if (v > best_q) {
      best_q = v;
      best = a;
    }
  }
  return best;
}

ActionId behavior_action(const QTable& q, StateId s, GoalId g_p, std::uint32_t num_actions,
                         double epsilon, Rng& rng, std::uint32_t T) {
  if (epsilon < 0.0 || epsilon > 1.0)
    throw std::invalid_argument("behavior_action: epsilon outside [0,1]");
  if (epsilon > 0.0 && rng.next_double() < epsilon) return rng.next_below(num_actions);
  return greedy_action(q, s, g_p, num_actions, T);
}

double clip_ratio(double w, double c) {
  if (c <= 0.0) throw std::invalid_argument("clip_ratio: c must be positive");
  if (w < 0.0) throw std::invalid_argument("clip_ratio: negative weight");
  return std::min(std::max(w, 1.0 / (1.0 + c)), 1.0 + c);
}

double compute_w(const FTable& f, StateId s, ActionId a, StateId s_next, GoalId g_achieved,
                 GoalId g_p, GoalId g_r, std::uint32_t T, double alpha, int keep_k,
                 const PolicyFn& policy) {
  return mixture_weight(f, s, a, s_next, g_achieved, g_p, g_r, T, alpha, keep_k, policy);
}

namespace {

void td_diagonal(QTable& q, const Transition& tr, GoalId g, double lr, double gamma,
                 std::uint32_t num_actions) {
  double r = (tr.g_achieved == g) ? 1.0 : 0.0;
  double bootstrap = 0.0;
  if (r != 1.0) {
    ActionId best = greedy_action(q, tr.s_next, g, num_actions);
    bootstrap = q.get(tr.s_next, best, g, g);
  }
  double target = r + gamma * bootstrap;
  double cur = q.get(tr.s, tr.a, g, g);
  q.add(tr.s, tr.a, g, g, lr * (target - cur));
}

}  // namespace

void q_update_vanilla(QTable& q, const Transition& tr, GoalId g, double lr, double gamma,
                      std::uint32_t num_actions) {
  td_diagonal(q, tr, g, lr, gamma, num_actions);
}

void her_update(QTable& q, const Transition& tr, const GoalSample& g_r, double lr, double gamma,
                std::uint32_t num_actions) {
  td_diagonal(q, tr, g_r.g_r, lr, gamma, num_actions);
}

void usher_update(QTable& q, FTable& f, const BatchItem& item, const LearnerConfig& cfg,
                  double lr, std::uint32_t num_actions) {
  const Transition& tr = item.t;
  const std::uint32_t T = tr.t_remaining;
  if (T == 0) throw std::invalid_argument("usher_update: t_remaining must be >= 1");

  PolicyFn pol = [&q, num_actions](StateId s, GoalId g) {
    return greedy_action(q, s, g, num_actions);
  };
  ActionId a_next = pol(tr.s_next, tr.g_p);

  auto clipped_w = [&](GoalId g_r) {
    double w = compute_w(f, tr.s, tr.a, tr.s_next, tr.g_achieved, tr.g_p, g_r, T, cfg.alpha_q,
                         cfg.k, pol);
    return clip_ratio(w, cfg.clip_c);
  };
  double w_hind = (1.0 - cfg.alpha_q) * clipped_w(item.g_r.g_r);
  double w_unif = cfg.alpha_q * clipped_w(item.g_r_alt.g_r);

  auto td = [&](GoalId g_r, double w) {
    double r = (tr.g_achieved == g_r) ? 1.0 : 0.0;
    double bootstrap = 0.0;
    if (r != 1.0) {
      if (!q.t_conditioned())
        bootstrap = q.get(tr.s_next, a_next, g_r, tr.g_p);
      else if (T > 1)
        bootstrap = q.get(tr.s_next, a_next, g_r, tr.g_p, T - 1);
    }
    double target = r + cfg.gamma * bootstrap;
    double cur = q.get(tr.s, tr.a, g_r, tr.g_p, T);
    q.add(tr.s, tr.a, g_r, tr.g_p, lr * w * (target - cur), T);
  };
  td(item.g_r.g_r, w_hind);
  td(item.g_r_alt.g_r, w_unif);

  if (cfg.f_mode == LearnerConfig::FMode::dense)
    f_update_dense(f, tr, pol, lr);
  else
    f_update_sampled(f, tr, item.g_r, item.g_r_alt, pol, lr, cfg.alpha_f, cfg.k);
}

}  // namespace usher
