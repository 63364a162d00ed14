#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "usher/agents.hpp"
#include "usher/environments.hpp"
#include "usher/oracle.hpp"

namespace usher {

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

enum class GoalSampling { uniform, fixed };

struct EnvConfig {
  std::string kind;  // "grid" | "red_light" | "torus_freeze"
  std::uint32_t horizon = 30;
  double gamma = 0.825;
  GoalSampling goal_sampling = GoalSampling::uniform;
  // grid
  std::string map_path;        // resolved against the config file's directory
  std::string map_text;        // inline alternative to map_path
  double hazard_stop_prob = 0.75;
  // red light
  RedLightConfig red_light;
  // torus
  TorusFreezeConfig torus;
};

struct TrainConfig {
  std::uint64_t episodes = 1000;
  std::uint64_t seed = 1;
  std::uint32_t eval_interval = 10;
  std::uint32_t eval_episodes = 200;
  std::uint64_t replay_capacity = 0;  // episodes; 0 = no eviction
};

struct OutputConfig {
  std::string directory = "out";
  std::string csv = "metrics.csv";
};

struct ExperimentConfig {
  EnvConfig env;
  std::string agent_kind;  // "qlearning" | "her" | "usher"
  LearnerConfig learner;
  TrainConfig train;
  OutputConfig output;
  bool deterministic_timing = true;  // wallclock_ms column written as 0

  void validate() const;
  std::uint64_t hash() const;  // covers env + agent + train sans seed
};

ExperimentConfig load_config(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& json_text,
                              const std::filesystem::path& base_dir);

// ---------------------------------------------------------------------------
// Environments under one roof
// ---------------------------------------------------------------------------

struct Environment {
  std::string name;
  MultiGoalMdp mdp;
  std::vector<GoalId> pursue_goals;  // pool for uniform goal sampling
  GoalId canonical_goal = 0;         // fixed-goal training target
};

Environment build_environment(const EnvConfig& cfg);

// ---------------------------------------------------------------------------
// Training
// ---------------------------------------------------------------------------

struct MetricsRow {
  std::uint64_t episode = 0;
  double success_rate = 0.0;
  double avg_return = 0.0;
  double bias_start = 0.0;
  double bias_ci = 0.0;
  double wallclock_ms = 0.0;
};

struct RunMetrics {
  std::string agent;
  std::string env;
  std::uint64_t seed = 0;
  std::uint64_t config_hash = 0;
  std::vector<MetricsRow> rows;
};

struct TrainedAgent {
  std::string kind;
  QTable q;
  std::optional<FTable> f;  // usher only
};

// Full training loop: per episode samples g_p, rolls the behavior policy for
// exactly `horizon` steps, stores the trajectory, applies the agent's
// updates, and evaluates every eval_interval episodes (plus a final row).
// Deterministic given (config, seed).
RunMetrics run_training(const ExperimentConfig& cfg, TrainedAgent* out_agent = nullptr);

void write_metrics(const RunMetrics& metrics, const std::filesystem::path& path);

// Joins run CSVs into one tidy long-format CSV
// (agent,env,seed,episode,metric,value).
void compare_csvs(const std::vector<std::filesystem::path>& inputs,
                  const std::filesystem::path& output);

// Runs every oracle check on the bundled small MDPs; prints one line per
// assertion. Returns true when everything passes.
bool run_verification_suite(std::ostream& out, std::size_t bias_ratio_trajectories = 1000000);

}  // namespace usher
