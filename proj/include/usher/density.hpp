#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <unordered_map>
#include <vector>

#include "usher/replay.hpp"

namespace usher {

using PolicyFn = std::function<ActionId(StateId, GoalId)>;

// Tabular successor goal density f(g_r | s, a, g_p, T). Rows are dense over
// goals and materialize on first write; unseen rows read as the uniform prior
// 1/num_goals so importance weights are defined before any learning. An
// optional frozen target copy mirrors the live table on snapshot.
class FTable {
 public:
  explicit FTable(std::uint32_t num_goals, bool target_enabled = false);

  std::uint32_t num_goals() const { return num_goals_; }
  bool target_enabled() const { return target_enabled_; }
  std::size_t num_rows() const { return rows_.size(); }

  double query(StateId s, ActionId a, GoalId g_p, std::uint32_t T, GoalId g_r) const;
  // Routes to the live table when the target copy is disabled.
  double query_target(StateId s, ActionId a, GoalId g_p, std::uint32_t T, GoalId g_r) const;

  std::vector<double>& row(StateId s, ActionId a, GoalId g_p, std::uint32_t T);
  const std::vector<double>* row_if_present(StateId s, ActionId a, GoalId g_p,
                                            std::uint32_t T) const;

  void snapshot_target();

  // Binary dump: little-endian, header (magic 'FTBL', version, num_goals,
  // row count) then per row the packed key and num_goals doubles.
  void dump(std::ostream& out) const;
  static FTable load(std::istream& in);

  static std::uint64_t pack_key(StateId s, ActionId a, GoalId g_p, std::uint32_t T);

 private:
  std::uint32_t num_goals_;
  double prior_;
  bool target_enabled_;
  std::unordered_map<std::uint64_t, std::vector<double>> rows_;
  std::unordered_map<std::uint64_t, std::vector<double>> target_rows_;

  double lookup(const std::unordered_map<std::uint64_t, std::vector<double>>& table,
                std::uint64_t key, GoalId g_r) const;
};

// Probability that the hindsight sampler picks g_r at a transition whose
// realized next state is s_next with T steps remaining:
//   (1/T) * 1{phi(s_next) = g_r} + (1 - 1/T) * f(g_r | s_next, pi(s_next, g_p), g_p, T-1)
// (target copy used for the bootstrap term). T = 1 collapses to the indicator.
double successor_draw_prob(const FTable& f, StateId s_next, GoalId g_achieved, GoalId g_p,
                           std::uint32_t T, GoalId g_r, const PolicyFn& policy);

// Mixture importance weight, unclipped:
//   W = num / (alpha * num + (1 - alpha) * succ)
// where num = f(g_r | s, a, g_p, T) and succ = successor_draw_prob(...). When
// g_r == g_p both terms fold in the 1/(k+1) keep probability, so the weight
// is exactly 1 when the goal is unreachable on both sides (the ratio the
// keep branch cancels to). Returns 1 when numerator and denominator are both
// zero; T = 1 returns 1 (the successor term is replaced by the numerator).
double mixture_weight(const FTable& f, StateId s, ActionId a, StateId s_next, GoalId g_achieved,
                      GoalId g_p, GoalId g_r, std::uint32_t T, double alpha, int keep_k,
                      const PolicyFn& policy);

// Exact expected update: row <- (1-lr)*row + lr*[(1/T) onehot(phi(s')) +
// (1-1/T) row(s', pi(s',g_p), g_p, T-1)]. Preserves normalization exactly.
void f_update_dense(FTable& f, const Transition& tr, const PolicyFn& policy, double lr);

// Stochastic counterpart: a W-weighted TD step toward the same recursion
// target at the two sampled goals, weights (1-alpha_f)*W(g_r) and
// alpha_f*W(g_r'). Entries are clamped at 0 after the step.
void f_update_sampled(FTable& f, const Transition& tr, const GoalSample& g_r,
                      const GoalSample& g_r_alt, const PolicyFn& policy, double lr,
                      double alpha_f, int keep_k);

}  // namespace usher
