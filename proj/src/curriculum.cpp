#include "autokitchen/curriculum.hpp"

#include <cmath>

namespace ak {

void CompetenceTracker::record_attempt(const std::string& goal_text,
                                       bool success) {
  auto& rec = records_[goal_text];
  rec.outcomes.push_back(success ? 1 : 0);
  while (rec.outcomes.size() > static_cast<size_t>(kCompetenceWindow))
    rec.outcomes.pop_front();
  rec.attempts += 1;
}

double CompetenceTracker::competence(const std::string& goal_text) const {
  auto it = records_.find(goal_text);
  if (it == records_.end()) return 0.0;
  return it->second.competence();
}

const CompetenceRecord* CompetenceTracker::record(
    const std::string& goal_text) const {
  auto it = records_.find(goal_text);
  return it == records_.end() ? nullptr : &it->second;
}

double competence_weight(double c, const SamplerConfig& config) {
  double d = c - 0.5;
  double expo = d * d / (2.0 * config.sigma * config.sigma);
  if (config.bump) expo = -expo;
  return config.alpha * std::exp(expo) + config.beta;
}

double goal_sampling_weight(const std::string& goal_text,
                            const CompetenceTracker& tracker,
                            const SamplerConfig& config) {
  switch (config.mode) {
    case SamplerMode::Uniform:
    case SamplerMode::Extrinsic:
      return 1.0;
    case SamplerMode::Intermediate:
      return competence_weight(tracker.competence(goal_text), config);
    case SamplerMode::Difficulty:
      return (1.0 - tracker.competence(goal_text)) + kDifficultyEpsilon;
  }
  return 1.0;
}

std::optional<Goal> sample_goal(const std::vector<Goal>& discovered,
                                const CompetenceTracker& tracker,
                                const SamplerConfig& config,
                                std::mt19937_64& rng) {
  const std::vector<Goal>& pool =
      config.mode == SamplerMode::Extrinsic ? config.extrinsic : discovered;
  if (pool.empty()) return std::nullopt;

  std::vector<double> w(pool.size());
  for (size_t i = 0; i < pool.size(); ++i)
    w[i] = goal_sampling_weight(pool[i].text, tracker, config);
  std::discrete_distribution<size_t> dist(w.begin(), w.end());
  return pool[dist(rng)];
}

}  // namespace ak
