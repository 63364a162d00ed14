#include "usher/density.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace usher {

namespace {
constexpr std::uint32_t kMagic = 0x4c425446;  // "FTBL"
constexpr std::uint32_t kVersion = 1;
}  // namespace

FTable::FTable(std::uint32_t num_goals, bool target_enabled)
    : num_goals_(num_goals), prior_(1.0 / num_goals), target_enabled_(target_enabled) {
  if (num_goals == 0) throw std::invalid_argument("FTable: empty goal space");
}

std::uint64_t FTable::pack_key(StateId s, ActionId a, GoalId g_p, std::uint32_t T) {
  // 20 bits state, 8 bits action, 20 bits goal, 16 bits T.
  return (static_cast<std::uint64_t>(s) << 44) | (static_cast<std::uint64_t>(a & 0xff) << 36) |
         (static_cast<std::uint64_t>(g_p) << 16) | static_cast<std::uint64_t>(T & 0xffff);
}

double FTable::lookup(const std::unordered_map<std::uint64_t, std::vector<double>>& table,
                      std::uint64_t key, GoalId g_r) const {
  auto it = table.find(key);
  if (it == table.end()) return prior_;
  return it->second[g_r];
}

double FTable::query(StateId s, ActionId a, GoalId g_p, std::uint32_t T, GoalId g_r) const {
  if (T == 0) throw std::invalid_argument("FTable::query: T must be >= 1");
  if (g_r >= num_goals_) throw std::out_of_range("FTable::query: goal out of range");
  return lookup(rows_, pack_key(s, a, g_p, T), g_r);
}

double FTable::query_target(StateId s, ActionId a, GoalId g_p, std::uint32_t T, GoalId g_r) const {
  if (T == 0) throw std::invalid_argument("FTable::query_target: T must be >= 1");
  if (g_r >= num_goals_) throw std::out_of_range("FTable::query_target: goal out of range");
  return lookup(target_enabled_ ? target_rows_ : rows_, pack_key(s, a, g_p, T), g_r);
}

std::vector<double>& FTable::row(StateId s, ActionId a, GoalId g_p, std::uint32_t T) {
  auto [it, inserted] = rows_.try_emplace(pack_key(s, a, g_p, T));
  if (inserted) it->second.assign(num_goals_, prior_);
  return it->second;
}

const std::vector<double>* FTable::row_if_present(StateId s, ActionId a, GoalId g_p,
                                                  std::uint32_t T) const {
  auto it = rows_.find(pack_key(s, a, g_p, T));
  return it == rows_.end() ? nullptr : &it->second;
}

void FTable::snapshot_target() { target_rows_ = rows_; }

void FTable::dump(std::ostream& out) const {
  auto put_u32 = [&](std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), 4); };
  auto put_u64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), 8); };
  put_u32(kMagic);
  put_u32(kVersion);
  put_u32(num_goals_);
  put_u64(rows_.size());
  for (const auto& [key, row] : rows_) {
    put_u64(key);
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size() * sizeof(double)));
  }
}

FTable FTable::load(std::istream& in) {
  auto get_u32 = [&]() {
    std::uint32_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
  };
  auto get_u64 = [&]() {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
  };
  if (get_u32() != kMagic) throw std::invalid_argument("FTable::load: bad magic");
  if (get_u32() != kVersion) throw std::invalid_argument("FTable::load: unknown version");
  std::uint32_t goals = get_u32();
  std::uint64_t count = get_u64();
  FTable table(goals);
  for (std::uint64_t i = 0; i < count; ++i) {
    std::uint64_t key = get_u64();
    std::vector<double> row(goals);
    in.read(reinterpret_cast<char*>(row.data()),
            static_cast<std::streamsize>(row.size() * sizeof(double)));
    table.rows_.emplace(key, std::move(row));
  }
  if (!in) throw std::invalid_argument("FTable::load: truncated stream");
  return table;
}

double successor_draw_prob(const FTable& f, StateId s_next, GoalId g_achieved, GoalId g_p,
                           std::uint32_t T, GoalId g_r, const PolicyFn& policy) {
  if (T == 0) throw std::invalid_argument("successor_draw_prob: T must be >= 1");
  double atom = (g_r == g_achieved) ? 1.0 / T : 0.0;
  if (T == 1) return atom;
  ActionId a_next = policy(s_next, g_p);
  return atom + (1.0 - 1.0 / T) * f.query_target(s_next, a_next, g_p, T - 1, g_r);
}

double mixture_weight(const FTable& f, StateId s, ActionId a, StateId s_next, GoalId g_achieved,
                      GoalId g_p, GoalId g_r, std::uint32_t T, double alpha, int keep_k,
                      const PolicyFn& policy) {
  if (alpha <= 0.0 || alpha > 1.0)
    throw std::invalid_argument("mixture_weight: alpha outside (0,1]");
  if (T == 0) throw std::invalid_argument("mixture_weight: T must be >= 1");
  if (T == 1) return 1.0;  // no successor sub-trajectory to weight against

  double num = f.query(s, a, g_p, T, g_r);
  double succ = successor_draw_prob(f, s_next, g_achieved, g_p, T, g_r, policy);
  if (num < 0.0 || succ < 0.0) throw std::invalid_argument("mixture_weight: negative density");

  if (g_r == g_p && keep_k >= 0) {
    // The kept-goal branch selects g_p with probability 1/(k+1) regardless of
    // the outcome; folding it into both sides keeps the ratio pinned at 1
    // when the goal is unreachable through the future sub-trajectory.
    double keep = 1.0 / (keep_k + 1);
    num = keep + (1.0 - keep) * num;
    succ = keep + (1.0 - keep) * succ;
  }

  double den = alpha * num + (1.0 - alpha) * succ;
  if (num == 0.0 && den == 0.0) return 1.0;
  return num / den;
}

void f_update_dense(FTable& f, const Transition& tr, const PolicyFn& policy, double lr) {
  if (lr <= 0.0 || lr > 1.0) throw std::invalid_argument("f_update_dense: lr outside (0,1]");
  const std::uint32_t T = tr.t_remaining;
  if (T == 0) throw std::invalid_argument("f_update_dense: T must be >= 1");

  std::vector<double> target(f.num_goals(), 0.0);
  target[tr.g_achieved] = 1.0 / T;
  if (T > 1) {
    ActionId a_next = policy(tr.s_next, tr.g_p);
    double keep = 1.0 - 1.0 / T;
    for (GoalId g = 0; g < f.num_goals(); ++g)
      target[g] += keep * f.query_target(tr.s_next, a_next, tr.g_p, T - 1, g);
  }
  auto& row = f.row(tr.s, tr.a, tr.g_p, T);
  for (GoalId g = 0; g < f.num_goals(); ++g) row[g] = (1.0 - lr) * row[g] + lr * target[g];
}

void f_update_sampled(FTable& f, const Transition& tr, const GoalSample& g_r,
                      const GoalSample& g_r_alt, const PolicyFn& policy, double lr,
                      double alpha_f, int keep_k) {
  if (lr <= 0.0 || lr > 1.0) throw std::invalid_argument("f_update_sampled: lr outside (0,1]");
  const std::uint32_t T = tr.t_remaining;
  if (T == 0) throw std::invalid_argument("f_update_sampled: T must be >= 1");

  ActionId a_next = (T > 1) ? policy(tr.s_next, tr.g_p) : 0;
  auto target_for = [&](GoalId g) {
    double t = (g == tr.g_achieved) ? 1.0 / T : 0.0;
    if (T > 1) t += (1.0 - 1.0 / T) * f.query_target(tr.s_next, a_next, tr.g_p, T - 1, g);
    return t;
  };

  double w_hind = (1.0 - alpha_f) *
                  mixture_weight(f, tr.s, tr.a, tr.s_next, tr.g_achieved, tr.g_p, g_r.g_r, T,
                                 alpha_f, keep_k, policy);
  double w_unif = alpha_f *
                  mixture_weight(f, tr.s, tr.a, tr.s_next, tr.g_achieved, tr.g_p, g_r_alt.g_r, T,
                                 alpha_f, keep_k, policy);

  auto& row = f.row(tr.s, tr.a, tr.g_p, T);
  auto apply = [&](GoalId g, double w) {
    row[g] += lr * w * (target_for(g) - row[g]);
    row[g] = std::max(row[g], 0.0);
  };
  apply(g_r.g_r, w_hind);
  apply(g_r_alt.g_r, w_unif);
}

}  // namespace usher
