#pragma once

// Per-goal competence tracking over a sliding window and the episode
// goal-sampling strategies (uniform, intermediate-competence, difficulty,
// fixed extrinsic lists).

#include <deque>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "autokitchen/goals.hpp"

namespace ak {

inline constexpr int kCompetenceWindow = 50;

struct CompetenceRecord {
  std::deque<uint8_t> outcomes;  // at most kCompetenceWindow entries
  long attempts = 0;

  double competence() const {
    if (outcomes.empty()) return 0.0;  // cold start
    long s = 0;
    for (uint8_t v : outcomes) s += v;
    return static_cast<double>(s) / static_cast<double>(outcomes.size());
  }
};

class CompetenceTracker {
 public:
  void record_attempt(const std::string& goal_text, bool success);
  double competence(const std::string& goal_text) const;
  const CompetenceRecord* record(const std::string& goal_text) const;
  const std::map<std::string, CompetenceRecord>& records() const {
    return records_;
  }

 private:
  std::map<std::string, CompetenceRecord> records_;
};

enum class SamplerMode { Uniform, Intermediate, Difficulty, Extrinsic };

struct SamplerConfig {
  SamplerMode mode = SamplerMode::Uniform;
  double alpha = 1.0;
  double beta = 0.2;
  double sigma = 0.25;
  // Bump convention: weight peaks at competence 0.5 (negative exponent). The
  // printed positive-exponent form is available behind this switch.
  bool bump = true;
  std::vector<Goal> extrinsic;  // required in extrinsic mode
};

// w = alpha * exp(-+ (c - 0.5)^2 / (2 sigma^2)) + beta.
double competence_weight(double c, const SamplerConfig& config);

// Difficulty mode uses w = (1 - c) + epsilon.
inline constexpr double kDifficultyEpsilon = 0.05;

// Unnormalized sampling weight of one goal under the configured mode.
double goal_sampling_weight(const std::string& goal_text,
                            const CompetenceTracker& tracker,
                            const SamplerConfig& config);

// Samples an episode goal. Returns nullopt when the candidate pool is empty
// (caller falls back to a random-exploration episode).
std::optional<Goal> sample_goal(const std::vector<Goal>& discovered,
                                const CompetenceTracker& tracker,
                                const SamplerConfig& config,
                                std::mt19937_64& rng);

}  // namespace ak
