#include "usher/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include "usher/replay.hpp"

namespace usher {

ActionId ExactQ::best_action(StateId s) const {
  ActionId best = 0;
  double best_q = q[s * num_actions];
  for (ActionId a = 1; a < num_actions; ++a) {
    double v_ = q[s * num_actions + a];
    if (v_ > best_q) {
      best_q = v_;
      best = a;
    }
  }
  return best;
}

ExactQ value_iteration(const MultiGoalMdp& mdp, GoalId g, double gamma) {
  mdp.validate();
  if (g >= mdp.num_goals) throw std::out_of_range("value_iteration: goal out of range");

  ExactQ out;
  out.goal = g;
  out.gamma = gamma;
  out.horizon = mdp.horizon;
  out.num_actions = mdp.num_actions;

  const std::size_t n_sa = static_cast<std::size_t>(mdp.num_states) * mdp.num_actions;
  std::vector<double> v_prev(mdp.num_states, 0.0);
  std::vector<double> q(n_sa, 0.0), v(mdp.num_states, 0.0);

  for (std::uint32_t h = 1; h <= mdp.horizon; ++h) {
    double linf = 0.0;
    for (StateId s = 0; s < mdp.num_states; ++s) {
      double best = 0.0;
      for (ActionId a = 0; a < mdp.num_actions; ++a) {
        const auto& row = mdp.transition[mdp.row_index(s, a)];
        double acc = 0.0;
        for (StateId next = 0; next < mdp.num_states; ++next) {
          double p = row[next];
          if (p <= 0.0) continue;
          double r = mdp.goal_map[next] == g ? 1.0 : 0.0;
          double cont = (r == 1.0 || mdp.terminal_flags[next]) ? 0.0 : v_prev[next];
          acc += p * (r + gamma * cont);
        }
        q[s * mdp.num_actions + a] = acc;
        if (a == 0 || acc > best) best = acc;
      }
      v[s] = best;
      linf = std::max(linf, std::abs(v[s] - v_prev[s]));
    }
    out.sweep_linf.push_back(linf);
    v_prev = v;
  }
  out.q = std::move(q);
  out.v = std::move(v);
  return out;
}

ExactF exact_successor_density(const MultiGoalMdp& mdp, const PolicyFn& policy, GoalId g_p,
                               std::uint32_t t_max) {
  mdp.validate();
  if (t_max == 0) throw std::invalid_argument("exact_successor_density: t_max must be >= 1");

  ExactF out;
  out.g_p = g_p;
  out.t_max = t_max;
  out.num_states = mdp.num_states;
  out.num_actions = mdp.num_actions;
  out.num_goals = mdp.num_goals;
  out.policy_action.resize(mdp.num_states);
  for (StateId s = 0; s < mdp.num_states; ++s) out.policy_action[s] = policy(s, g_p);

  const std::size_t n_sa = static_cast<std::size_t>(mdp.num_states) * mdp.num_actions;
  out.f.assign(t_max, std::vector<double>(n_sa * mdp.num_goals, 0.0));

  for (std::uint32_t T = 1; T <= t_max; ++T) {
    auto& cur = out.f[T - 1];
    const auto* prev = T > 1 ? &out.f[T - 2] : nullptr;
    for (StateId s = 0; s < mdp.num_states; ++s) {
      for (ActionId a = 0; a < mdp.num_actions; ++a) {
        const auto& row = mdp.transition[mdp.row_index(s, a)];
        double* dst = &cur[(static_cast<std::size_t>(s) * mdp.num_actions + a) * mdp.num_goals];
        for (StateId next = 0; next < mdp.num_states; ++next) {
          double p = row[next];
          if (p <= 0.0) continue;
          dst[mdp.goal_map[next]] += p / T;
          if (T > 1) {
            const double* boot =
                &(*prev)[(static_cast<std::size_t>(next) * mdp.num_actions +
                          out.policy_action[next]) *
                         mdp.num_goals];
            double w = p * (1.0 - 1.0 / T);
            for (GoalId g = 0; g < mdp.num_goals; ++g) dst[g] += w * boot[g];
          }
        }
      }
    }
  }
  return out;
}

double ExactF::draw_prob(const MultiGoalMdp& mdp, std::uint32_t T, StateId s_next,
                         GoalId g) const {
  double atom = mdp.goal_map[s_next] == g ? 1.0 / T : 0.0;
  if (T == 1) return atom;
  return atom + (1.0 - 1.0 / T) * value(T - 1, s_next, policy_action[s_next], g);
}

double ExactF::selection_prob(std::uint32_t T, StateId s, ActionId a, GoalId g, int keep_k) const {
  double keep = 1.0 / (keep_k + 1);
  double base = value(T, s, a, g);
  return (g == g_p) ? keep + (1.0 - keep) * base : (1.0 - keep) * base;
}

double ExactF::selection_draw_prob(const MultiGoalMdp& mdp, std::uint32_t T, StateId s_next,
                                   GoalId g, int keep_k) const {
  double keep = 1.0 / (keep_k + 1);
  double base = draw_prob(mdp, T, s_next, g);
  return (g == g_p) ? keep + (1.0 - keep) * base : (1.0 - keep) * base;
}

bool VerifyReport::all_pass() const {
  for (const auto& line : lines)
    if (!line.pass) return false;
  return true;
}

std::string VerifyReport::to_text() const {
  std::ostringstream os;
  for (const auto& line : lines) {
    os << (line.pass ? "pass" : "FAIL") << "  " << line.name << "  measured=" << line.measured
       << "  bound=" << line.bound << "\n";
  }
  if (excluded_bins > 0) os << "excluded bins below visit threshold: " << excluded_bins << "\n";
  return os.str();
}

VerifyReport verify_mixture_identity(const MultiGoalMdp& mdp, const PolicyFn& policy, GoalId g_p,
                                     double alpha, int keep_k,
                                     std::span<const std::function<double(StateId)>> test_functions,
                                     double w_scale) {
  if (alpha <= 0.0 || alpha > 1.0)
    throw std::invalid_argument("verify_mixture_identity: alpha outside (0,1]");
  ExactF ef = exact_successor_density(mdp, policy, g_p, mdp.horizon);

  VerifyReport report;
  for (std::size_t fi = 0; fi < test_functions.size(); ++fi) {
    const auto& F = test_functions[fi];
    double max_disc = 0.0;
    for (std::uint32_t T = 1; T <= mdp.horizon; ++T) {
      for (StateId s = 0; s < mdp.num_states; ++s) {
        for (ActionId a = 0; a < mdp.num_actions; ++a) {
          const auto& row = mdp.transition[mdp.row_index(s, a)];
          for (GoalId g_r = 0; g_r < mdp.num_goals; ++g_r) {
            double sel = ef.selection_prob(T, s, a, g_r, keep_k);
            if (sel <= 0.0) continue;  // goal never selected here; conditional law undefined
            double lhs = 0.0, rhs = 0.0;
            for (StateId next = 0; next < mdp.num_states; ++next) {
              double p = row[next];
              if (p <= 0.0) continue;
              double fv = F(next);
              lhs += p * fv;
              double h = ef.selection_draw_prob(mdp, T, next, g_r, keep_k);
              double w = w_scale * sel / (alpha * sel + (1.0 - alpha) * h);
              double cond = p * h / sel;  // Bayes: P(s' | g_r selected)
              rhs += alpha * p * w * fv + (1.0 - alpha) * cond * w * fv;
            }
            max_disc = std::max(max_disc, std::abs(lhs - rhs));
          }
        }
      }
    }
    CheckLine line;
    line.name = "mixture-identity F" + std::to_string(fi) + " alpha=" + std::to_string(alpha);
    line.measured = max_disc;
    line.bound = 1e-9;
    line.pass = max_disc <= line.bound;
    report.lines.push_back(line);
  }
  return report;
}

VerifyReport verify_bias_ratio(const MultiGoalMdp& mdp, const PolicyFn& policy, GoalId g_p,
                               int keep_k, std::size_t n_trajectories, Rng& rng,
                               std::size_t min_visits) {
  mdp.validate();
  ExactF ef = exact_successor_density(mdp, policy, g_p, mdp.horizon);

  // counts[(s,a,T,g_r)][s'] over HER-relabeled transitions.
  struct Bin {
    std::size_t total = 0;
    std::map<StateId, std::size_t> next_counts;
  };
  std::map<std::tuple<StateId, ActionId, std::uint32_t, GoalId>, Bin> bins;

  Trajectory traj;
  for (std::size_t n = 0; n < n_trajectories; ++n) {
    traj.g_p = g_p;
    traj.steps.clear();
    StateId s = sample_start(mdp, rng);
    for (std::uint32_t i = 0; i < mdp.horizon; ++i) {
      Transition tr;
      tr.s = s;
      tr.a = policy(s, g_p);
      tr.s_next = sample_step(mdp, s, tr.a, rng);
      tr.g_p = g_p;
      tr.g_achieved = mdp.goal_map[tr.s_next];
      tr.t_remaining = mdp.horizon - i;
      tr.step_index = i;
      traj.steps.push_back(tr);
      s = tr.s_next;
    }
    for (std::size_t i = 0; i < traj.steps.size(); ++i) {
      GoalSample g_r = relabel_her(traj, i, keep_k, rng);
      const Transition& tr = traj.steps[i];
      Bin& bin = bins[{tr.s, tr.a, tr.t_remaining, g_r.g_r}];
      bin.total += 1;
      bin.next_counts[tr.s_next] += 1;
    }
  }

  VerifyReport report;
  for (const auto& [key, bin] : bins) {
    auto [s, a, T, g_r] = key;
    if (bin.total < min_visits) {
      report.excluded_bins += 1;
      continue;
    }
    const auto& row = mdp.transition[mdp.row_index(s, a)];
    double sel = ef.selection_prob(T, s, a, g_r, keep_k);
    double max_z = 0.0;
    bool pass = true;
    for (StateId next = 0; next < mdp.num_states; ++next) {
      double p = row[next];
      double observed =
          bin.next_counts.count(next) ? static_cast<double>(bin.next_counts.at(next)) : 0.0;
      double phat = observed / static_cast<double>(bin.total);
      if (p <= 0.0) {
        if (observed > 0) pass = false;
        continue;
      }
      double pred = p * ef.selection_draw_prob(mdp, T, next, g_r, keep_k) / sel;
      double sigma = std::sqrt(std::max(pred * (1.0 - pred), 0.0) /
                               static_cast<double>(bin.total));
      if (sigma == 0.0) {
        if (std::abs(phat - pred) > 1e-12) pass = false;
        continue;
      }
      double z = std::abs(phat - pred) / sigma;
      max_z = std::max(max_z, z);
      if (z > 3.0) pass = false;
    }
    CheckLine line;
    std::ostringstream name;
    name << "bias-ratio s=" << s << " a=" << a << " T=" << T << " g_r=" << g_r
         << " n=" << bin.total;
    line.name = name.str();
    line.measured = max_z;
    line.bound = 3.0;
    line.pass = pass;
    report.lines.push_back(line);
  }
  return report;
}

namespace {

struct RolloutResult {
  bool success = false;
  double ret = 0.0;
};

RolloutResult greedy_rollout(const MultiGoalMdp& mdp, const PolicyFn& policy, StateId s0,
                             GoalId g, double gamma, Rng& rng) {
  if (mdp.goal_map[s0] == g) return {true, 1.0};
  StateId s = s0;
  double discount = 1.0;
  for (std::uint32_t t = 0; t < mdp.horizon; ++t) {
    ActionId a = policy(s, g);
    StateId next = sample_step(mdp, s, a, rng);
    if (mdp.goal_map[next] == g) return {true, discount};
    if (mdp.terminal_flags[next]) return {false, 0.0};
    discount *= gamma;
    s = next;
  }
  return {false, 0.0};
}

}  // namespace

BiasReport bias_estimate(const std::function<double(StateId, GoalId)>& start_value,
                         const PolicyFn& policy, const MultiGoalMdp& mdp,
                         std::span<const GoalId> goal_pool, std::size_t n_episodes, double gamma,
                         Rng& rng) {
  if (n_episodes == 0) throw std::invalid_argument("bias_estimate: need at least one episode");
  if (goal_pool.empty()) throw std::invalid_argument("bias_estimate: empty goal pool");

  BiasReport report;
  report.episodes = n_episodes;
  double sum_ret = 0.0, sum_pred = 0.0, sum_diff = 0.0, sum_diff_sq = 0.0;
  std::size_t successes = 0;
  for (std::size_t n = 0; n < n_episodes; ++n) {
    GoalId g = goal_pool.size() == 1
                   ? goal_pool[0]
                   : goal_pool[rng.next_below(static_cast<std::uint32_t>(goal_pool.size()))];
    StateId s0 = sample_start(mdp, rng);
    double pred = start_value(s0, g);
    RolloutResult rr = greedy_rollout(mdp, policy, s0, g, gamma, rng);
    if (rr.success) ++successes;
    double diff = pred - rr.ret;
    sum_ret += rr.ret;
    sum_pred += pred;
    sum_diff += diff;
    sum_diff_sq += diff * diff;
  }
  double n = static_cast<double>(n_episodes);
  report.success_rate = static_cast<double>(successes) / n;
  report.mean_return = sum_ret / n;
  report.mean_predicted = sum_pred / n;
  report.bias = sum_diff / n;
  if (n_episodes > 1) {
    double var = (sum_diff_sq - sum_diff * sum_diff / n) / (n - 1.0);
    report.ci_half_width = 1.96 * std::sqrt(std::max(var, 0.0) / n);
  }
  return report;
}

EvalResult evaluate_policy(const MultiGoalMdp& mdp, const PolicyFn& policy,
                           std::span<const GoalId> goal_pool, std::size_t n_episodes, Rng& rng) {
  auto zero = [](StateId, GoalId) { return 0.0; };
  BiasReport report =
      bias_estimate(zero, policy, mdp, goal_pool, n_episodes, mdp.discount, rng);
  return {report.success_rate, report.mean_return};
}

}  // namespace usher
