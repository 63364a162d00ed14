#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "usher/density.hpp"
#include "usher/mdp.hpp"

namespace usher {

// ---------------------------------------------------------------------------
// Exact dynamic-programming references
// ---------------------------------------------------------------------------

// Finite-horizon optimal values for one goal, success absorbing.
struct ExactQ {
  GoalId goal = 0;
  double gamma = 1.0;
  std::uint32_t horizon = 0;
  std::uint32_t num_actions = 0;
  std::vector<double> q;           // [s * A + a] at the full horizon
  std::vector<double> v;           // [s]
  std::vector<double> sweep_linf;  // successive-sweep max differences

  double value(StateId s, ActionId a) const { return q[s * num_actions + a]; }
  double state_value(StateId s) const { return v[s]; }
  ActionId best_action(StateId s) const;
};

ExactQ value_iteration(const MultiGoalMdp& mdp, GoalId g, double gamma);

// Exact successor goal density f(g | s, a, g_p, T) for a fixed deterministic
// policy, by backward induction on T.
struct ExactF {
  GoalId g_p = 0;
  std::uint32_t t_max = 0;
  std::uint32_t num_states = 0;
  std::uint32_t num_actions = 0;
  std::uint32_t num_goals = 0;
  std::vector<ActionId> policy_action;    // pi(s, g_p) tabulated
  std::vector<std::vector<double>> f;     // [T-1][ (s*A + a) * G + g ]

  double value(std::uint32_t T, StateId s, ActionId a, GoalId g) const {
    return f[T - 1][(static_cast<std::size_t>(s) * num_actions + a) * num_goals + g];
  }
  // Draw probability of g at a transition whose realized next state is
  // s_next: (1/T) 1{phi(s_next)=g} + (1-1/T) f(g | s_next, pi(s_next), T-1).
  double draw_prob(const MultiGoalMdp& mdp, std::uint32_t T, StateId s_next, GoalId g) const;
  // Same quantities with the 1/(k+1) kept-goal branch folded in; these are
  // the full goal-selection probabilities of the HER sampler.
  double selection_prob(std::uint32_t T, StateId s, ActionId a, GoalId g, int keep_k) const;
  double selection_draw_prob(const MultiGoalMdp& mdp, std::uint32_t T, StateId s_next, GoalId g,
                             int keep_k) const;
};

ExactF exact_successor_density(const MultiGoalMdp& mdp, const PolicyFn& policy, GoalId g_p,
                               std::uint32_t t_max);

// ---------------------------------------------------------------------------
// Verification reports
// ---------------------------------------------------------------------------

struct CheckLine {
  std::string name;
  double measured = 0.0;
  double bound = 0.0;
  bool pass = false;
};

struct VerifyReport {
  std::vector<CheckLine> lines;
  std::size_t excluded_bins = 0;  // bins below the visit threshold
  bool all_pass() const;
  std::string to_text() const;  // one assertion per line: name, measured, bound, pass/fail
};

// Evaluates both sides of the mixture identity by exact summation for every
// (s, a, g_r, T <= t_max) and every test function; reports the maximum
// absolute discrepancy per test function. w_scale != 1 deliberately corrupts
// the weight (mutation hook for the test suite).
VerifyReport verify_mixture_identity(const MultiGoalMdp& mdp, const PolicyFn& policy, GoalId g_p,
                                     double alpha, int keep_k,
                                     std::span<const std::function<double(StateId)>> test_functions,
                                     double w_scale = 1.0);

// Simulates n_trajectories full-horizon rollouts of the fixed policy, relabels
// every transition with the HER sampler, and compares the empirical
// conditional law of s' given (s, a, T, g_r) against the bias-ratio
// prediction at 3 sigma. Bins with fewer than min_visits samples are excluded
// and counted.
VerifyReport verify_bias_ratio(const MultiGoalMdp& mdp, const PolicyFn& policy, GoalId g_p,
                               int keep_k, std::size_t n_trajectories, Rng& rng,
                               std::size_t min_visits = 100);

// ---------------------------------------------------------------------------
// Policy evaluation and start-state bias
// ---------------------------------------------------------------------------

struct BiasReport {
  std::size_t episodes = 0;
  double success_rate = 0.0;
  double mean_return = 0.0;
  double mean_predicted = 0.0;
  double bias = 0.0;           // predicted minus realized; positive = overestimation
  double ci_half_width = 0.0;  // 95% half-width on the bias
};

struct EvalResult {
  double success_rate = 0.0;
  double mean_return = 0.0;
};

// Greedy rollouts with absorbing-success semantics: an episode ends at the
// first state achieving the pursued goal (return gamma^t), at a terminal
// state (return 0), or at the horizon.
BiasReport bias_estimate(const std::function<double(StateId, GoalId)>& start_value,
                         const PolicyFn& policy, const MultiGoalMdp& mdp,
                         std::span<const GoalId> goal_pool, std::size_t n_episodes, double gamma,
                         Rng& rng);

EvalResult evaluate_policy(const MultiGoalMdp& mdp, const PolicyFn& policy,
                           std::span<const GoalId> goal_pool, std::size_t n_episodes, Rng& rng);

}  // namespace usher
