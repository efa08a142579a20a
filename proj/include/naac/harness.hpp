#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "naac/agents.hpp"

namespace naac {

// Gradient-check pass thresholds shared by the CLI and the test suites.
inline constexpr double kGradTolShape = 1e-4;  // actor / critic shapes
inline constexpr double kGradTolPath = 1e-3;   // actor-through-critic path

struct RunConfig {
  std::string method = "naac";
  int episodes = 500;
  int slots_per_episode = 200;
  int eval_episodes = 20;
  uint64_t master_seed = 1;
  int lambda_override = -1;  // <0: use the scenario's lambda
  std::string out_dir = "out";
  TrainHyper hyper;
  // Programmatic only (not part of the config file schema): pin every
  // episode to one topology.
  std::optional<Topology> frozen_topology;

  void validate() const;
};

const std::vector<std::string>& known_methods();

// Flat JSON object covering ScenarioConfig and RunConfig; missing keys take
// the defaults, unknown keys are rejected, out-of-range values raise
// Error(parse) naming the key.
std::pair<ScenarioConfig, RunConfig> parse_config_json(const std::string& text);
std::pair<ScenarioConfig, RunConfig> load_config(const std::string& path);
std::string config_to_json(const ScenarioConfig& scenario, const RunConfig& run);
// Applies one key with a JSON-encoded value (e.g. "42", "\"dqn\"", "true").
void set_config_key(ScenarioConfig& scenario, RunConfig& run, const std::string& key,
                    const std::string& json_value);

struct MetricsRow {
  std::string method;
  uint64_t seed = 0;
  int n_d2d = 0;
  std::string episode;  // episode index or "eval"
  double total_reward = 0.0;
  double outage_prob = 0.0;
  double sum_rate_bps_hz = 0.0;
  double mean_critic_loss = 0.0;
};

// 9-significant-digit decimal formatting used for every CSV value.
std::string format_csv_value(double v);
void emit_csv(const std::vector<MetricsRow>& rows, const std::string& path);
std::vector<MetricsRow> parse_csv(const std::string& path);

// Trains run.method on the scenario, writes one row per episode to
// {out_dir}/{method}_seed{seed}_train.csv and final checkpoints named
// {method}_agent{idx}.params (none for the random baseline). Returns the rows.
std::vector<MetricsRow> run_training(const ScenarioConfig& scenario, const RunConfig& run);

struct EvalSummary {
  double outage_prob = 0.0;
  double sum_rate = 0.0;          // mean per slot
  double mean_episode_reward = 0.0;
};

// Greedy rollout over eval_episodes fresh topologies; never mutates
// checkpoints or buffers.
EvalSummary evaluate_policy(const Policy& policy, const ScenarioConfig& scenario,
                            const RunConfig& run, uint64_t eval_master);

// Loads checkpoints from out_dir, evaluates, writes a single "eval" row to
// {out_dir}/{method}_seed{seed}_eval.csv and returns it.
std::vector<MetricsRow> run_eval(const ScenarioConfig& scenario, const RunConfig& run);

// Full (method, N, seed-index) cross product: train, then evaluate on
// eval seeds shared across methods. One eval row per cell lands in a private
// staging file; the merge sorted by (method, n_d2d, seed) is written to
// {out_dir}/sweep.csv. threads < 0 reads NAAC_THREADS (0/unset: sequential).
std::vector<MetricsRow> run_sweep(const ScenarioConfig& scenario, const RunConfig& run,
                                  const std::vector<int>& n_list,
                                  const std::vector<std::string>& methods, int seeds,
                                  int threads = -1);

int threads_from_env();

struct OracleRun {
  OracleResult result;
  int n_d2d = 0;
  int n_rbs = 0;
};
// Samples one topology+gains instance from the seed and enumerates it.
OracleRun run_oracle(const ScenarioConfig& scenario, uint64_t seed);

struct GradcheckReport {
  double actor_err = 0.0;
  double critic_err = 0.0;
  double path_err = 0.0;
  bool pass() const {
    return actor_err <= kGradTolShape && critic_err <= kGradTolShape &&
           path_err <= kGradTolPath;
  }
};
// Finite-difference validation on the exact network shapes the scenario
// induces, plus the frozen-noise actor-through-critic path.
GradcheckReport run_gradcheck(const ScenarioConfig& scenario, const RunConfig& run,
                              uint64_t seed);

}  // namespace naac
