#pragma once

// Goal-modular, trajectory-based replay buffer with multi-step transition
// sampling, plus the flat transition buffer used by the no-feedback ablation.

#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "autokitchen/goals.hpp"

namespace ak {

// Long texts (looks, action lists) repeat heavily across transitions; they
// are stored interned.
using TextRef = std::shared_ptr<const std::string>;
using ActionListRef = std::shared_ptr<const std::vector<std::string>>;

TextRef make_text(std::string s);
ActionListRef make_action_list(std::vector<std::string> v);

// Interning pool keyed by content.
class TextPool {
 public:
  TextRef intern(const std::string& s);
  ActionListRef intern_list(const std::vector<std::string>& v);

 private:
  std::map<std::string, TextRef> texts_;
  std::map<std::string, ActionListRef> lists_;
};

struct Transition {
  TextRef obs, look, inv;
  std::string action;
  int reward = 0;  // reward for the goal targeted at collection time
  TextRef next_obs, next_look, next_inv;
  ActionListRef valid_actions;       // A_t, surface texts
  ActionListRef next_valid_actions;  // A_{t+1}
  bool terminal = false;
};

struct TargetedGoal {
  Goal goal;
  bool achieved = false;
};

struct TrajectoryRecord {
  std::vector<Transition> transitions;
  // First entry is the episode's original goal; goal-chain continuations
  // append theirs. May be empty for goal-less random episodes.
  std::vector<TargetedGoal> targeted;
  GoalSet relabeled;
  // Per-goal reward of each transition's next look, for every relabeled and
  // targeted goal.
  std::map<std::string, std::vector<uint8_t>> per_goal_rewards;
  unsigned long long seed = 0;
  long step_index = 0;
};

// Computes the per-goal reward vectors from the transitions' next looks.
void finalize_record(TrajectoryRecord& record);

struct GoalEntry {
  std::vector<uint64_t> positives;  // trajectory ids where goal was relabeled
  std::vector<uint64_t> negatives;  // trajectory ids where goal was targeted but missed
  size_t transition_count = 0;      // transitions across positive trajectories
};

using GoalIndex = std::map<std::string, GoalEntry>;

struct SampledTransition {
  const Transition* transition = nullptr;
  Goal goal;
  int reward = 0;  // per-goal reward for the sampled goal
};

enum class WeightMode { Uniform, TransitionProportional, External };

// Normalized distribution over indexed goals. External mode requires a map;
// it is normalized and passed through.
std::map<std::string, double> goal_weights(
    WeightMode mode, const GoalIndex& index,
    const std::map<std::string, double>* external = nullptr);

class ReplayBuffer {
 public:
  explicit ReplayBuffer(size_t capacity = 20000) : capacity_(capacity) {}

  // Validates the record invariants; throws std::invalid_argument with a
  // diagnostic on violation. Evicts FIFO beyond capacity.
  void push(TrajectoryRecord record);

  // Multi-step sampling: goal ~ weights, then positive/negative trajectory
  // with probability 0.5, then (positive case) rewarded/unrewarded transition
  // with probability 0.5. Empty branches fall back to the non-empty one.
  // Returned pointers stay valid until the next push.
  std::vector<SampledTransition> sample_batch(
      size_t n, const std::map<std::string, double>& weights,
      std::mt19937_64& rng) const;

  const GoalIndex& index() const { return index_; }
  size_t size() const { return records_.size(); }
  bool empty() const { return records_.empty(); }
  size_t transition_count() const { return transition_count_; }
  const TrajectoryRecord* record(uint64_t id) const;

  // Rebuilds the goal index from scratch (test oracle).
  GoalIndex rebuild_index() const;

  // One trajectory per line, versioned JSON records.
  void snapshot(std::ostream& out) const;

 private:
  static void index_record(GoalIndex& index, uint64_t id,
                           const TrajectoryRecord& rec);
  void unindex_record(uint64_t id, const TrajectoryRecord& rec);

  size_t capacity_;
  std::deque<std::pair<uint64_t, TrajectoryRecord>> records_;
  uint64_t next_id_ = 0;
  GoalIndex index_;
  size_t transition_count_ = 0;
};

// Flat FIFO of (transition, goal, reward) used when the goal-modular buffer
// is disabled.
class FlatReplayBuffer {
 public:
  explicit FlatReplayBuffer(size_t capacity = 100000) : capacity_(capacity) {}

  void push(Transition t, Goal goal);
  std::vector<SampledTransition> sample_batch(size_t n,
                                              std::mt19937_64& rng) const;
  size_t size() const { return items_.size(); }
  bool empty() const { return items_.empty(); }

 private:
  size_t capacity_;
  std::deque<std::pair<Transition, Goal>> items_;
};

}  // namespace ak
