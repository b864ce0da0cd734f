#pragma once

// Episode and training-loop driver: goal-conditioned rollouts, go-explore
// tails, goal-chain continuation, relabeling, replay updates, evaluation and
// the nine named experiment configurations.

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "autokitchen/curriculum.hpp"
#include "autokitchen/goals.hpp"
#include "autokitchen/qmodel.hpp"
#include "autokitchen/replay.hpp"
#include "autokitchen/world.hpp"

namespace ak {

enum class BufferKind { Modular, Flat };

struct RunConfig {
  std::string name = "base";
  long total_steps = 150000;
  int episode_cap = 30;      // T
  int go_explore_steps = 0;  // 5 when the mechanism is on
  double goal_chain_p = 0.0; // 0.5 when the mechanism is on
  int max_chains = 4;
  long eval_period = 5000;

  RelabelMode relabel = RelabelMode::Selective;
  SamplerMode episode_sampler = SamplerMode::Uniform;
  WeightMode replay_weights = WeightMode::Uniform;
  BufferKind buffer = BufferKind::Modular;
  size_t buffer_capacity = 20000;
  size_t flat_capacity = 100000;
  int nonsense_goals = 0;

  int hidden = 32;
  int encoder_bits = 16;
  QHyperParams hp;
  int batch_size = 64;
  int update_every = 4;

  double sampler_alpha = 1.0;
  double sampler_beta = 0.2;
  double sampler_sigma = 0.25;
  bool sampler_bump = true;

  unsigned long long seed = 0;
  std::string goal_file;  // empty: the built-in canonical set
};

std::string run_config_to_json(const RunConfig& config);
RunConfig run_config_from_json(const std::string& json_text);

// The nine named configurations, keyed by name.
std::map<std::string, RunConfig> config_presets();

// Resolves a --config argument: a preset name, or a path to a JSON file that
// may itself start from {"preset": "..."}. Unknown names raise with the list
// of valid ones. `overrides` receives the keys changed from preset defaults.
RunConfig resolve_config(const std::string& name_or_path,
                         std::vector<std::string>* overrides = nullptr);

struct EvalReport {
  std::map<std::string, int> per_goal;  // goal text -> success in {0,1}
  double score_all = 0.0;               // x100 over all eval goals
  double score_hard = 0.0;              // x100 over the hard subset
};

EvalReport evaluate(const QModel& model, const TextEncoder& enc,
                    const GoalFile& goals, const ScenarioConfig& scenario,
                    int episode_cap);

struct EpisodeResult {
  TrajectoryRecord record;
  long env_steps = 0;
  std::vector<std::string> looks;  // reset look plus each post-step look
};

// Samples goal-chain continuation goals; may return nullopt.
using GoalSampler = std::function<std::optional<Goal>(std::mt19937_64&)>;

// One rollout: policy segment(s) with optional goal-chain continuations, then
// an optional go-explore tail, relabeling left to the caller.
EpisodeResult run_episode(Environment& env, const QModel& model,
                          const TextEncoder& enc, std::optional<Goal> goal,
                          const RunConfig& config, const GoalSampler& chain_goals,
                          std::mt19937_64& rng, TextPool& pool,
                          ActionHiddenCache* cache = nullptr);

struct TrainResult {
  long steps_done = 0;
  int evals_done = 0;
  double last10_all = 0.0;
  double last10_hard = 0.0;
  size_t goals_discovered = 0;
};

// Full training run; writes manifest.json, metrics.jsonl and checkpoint.bin
// into out_dir. Deterministic per (config, seed).
TrainResult train(const RunConfig& config, const std::string& out_dir,
                  const std::vector<std::string>& manifest_overrides = {});

// Uniform-random agent with periodic resets; counts, for every goal in the
// file, the timesteps whose look satisfies it.
std::map<std::string, long> run_random_baseline(long total_steps,
                                                int reset_period,
                                                const GoalFile& goals,
                                                unsigned long long seed);

}  // namespace ak
