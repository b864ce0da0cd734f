#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <map>
#include <random>

#include "autokitchen/curriculum.hpp"

using namespace ak;

TEST_CASE("competence: cold start, fraction, sliding window") {
  CompetenceTracker t;
  CHECK(t.competence("g") == 0.0);  // cold start

  t.record_attempt("g", true);
  CHECK(t.competence("g") == 1.0);
  t.record_attempt("g", false);
  CHECK(t.competence("g") == 0.5);

  // Fill the window with failures, then successes push them out.
  CompetenceTracker w;
  for (int i = 0; i < kCompetenceWindow; ++i) w.record_attempt("g", false);
  CHECK(w.competence("g") == 0.0);
  for (int i = 0; i < kCompetenceWindow / 2; ++i) w.record_attempt("g", true);
  CHECK(w.competence("g") == 0.5);
  for (int i = 0; i < kCompetenceWindow; ++i) w.record_attempt("g", true);
  CHECK(w.competence("g") == 1.0);
  CHECK(w.record("g")->attempts == 2 * kCompetenceWindow + kCompetenceWindow / 2);
  CHECK(w.record("g")->outcomes.size() == size_t(kCompetenceWindow));
}

TEST_CASE("Eq. 5 weight law under the bump convention") {
  SamplerConfig cfg;  // alpha 1.0, beta 0.2, sigma 0.25, bump
  CHECK(competence_weight(0.5, cfg) == doctest::Approx(1.2));
  // Symmetry about 0.5.
  for (double d : {0.1, 0.25, 0.4}) {
    CHECK(competence_weight(0.5 - d, cfg) ==
          doctest::Approx(competence_weight(0.5 + d, cfg)));
  }
  // Lower bound beta everywhere; peak at the center.
  for (double c = 0.0; c <= 1.0; c += 0.05) {
    CHECK(competence_weight(c, cfg) >= 0.2);
    CHECK(competence_weight(c, cfg) <= 1.2 + 1e-12);
  }
  // Exact value at the extremes: 1.0 * exp(-0.25 / 0.125) + 0.2.
  CHECK(competence_weight(0.0, cfg) ==
        doctest::Approx(std::exp(-2.0) + 0.2));
  CHECK(competence_weight(1.0, cfg) ==
        doctest::Approx(std::exp(-2.0) + 0.2));

  // Printed positive-exponent convention behind the switch.
  SamplerConfig printed = cfg;
  printed.bump = false;
  CHECK(competence_weight(0.5, printed) == doctest::Approx(1.2));
  CHECK(competence_weight(0.0, printed) ==
        doctest::Approx(std::exp(2.0) + 0.2));
}

TEST_CASE("mode weights: uniform, intermediate, difficulty, extrinsic") {
  CompetenceTracker t;
  for (int i = 0; i < 10; ++i) t.record_attempt("half", i % 2 == 0);
  for (int i = 0; i < 10; ++i) t.record_attempt("solved", true);

  SamplerConfig uni;
  uni.mode = SamplerMode::Uniform;
  CHECK(goal_sampling_weight("half", t, uni) == 1.0);
  CHECK(goal_sampling_weight("solved", t, uni) == 1.0);

  SamplerConfig inter;
  inter.mode = SamplerMode::Intermediate;
  CHECK(goal_sampling_weight("half", t, inter) == doctest::Approx(1.2));
  CHECK(goal_sampling_weight("solved", t, inter) ==
        doctest::Approx(std::exp(-2.0) + 0.2));
  CHECK(goal_sampling_weight("half", t, inter) >
        goal_sampling_weight("solved", t, inter));

  SamplerConfig diff;
  diff.mode = SamplerMode::Difficulty;
  CHECK(goal_sampling_weight("half", t, diff) ==
        doctest::Approx(0.5 + kDifficultyEpsilon));
  CHECK(goal_sampling_weight("solved", t, diff) ==
        doctest::Approx(kDifficultyEpsilon));
  CHECK(goal_sampling_weight("never_seen", t, diff) ==
        doctest::Approx(1.0 + kDifficultyEpsilon));
}

TEST_CASE("sample_goal: empty pool yields nullopt") {
  CompetenceTracker t;
  SamplerConfig cfg;
  std::mt19937_64 rng(0);
  CHECK_FALSE(sample_goal({}, t, cfg, rng).has_value());

  SamplerConfig ext;
  ext.mode = SamplerMode::Extrinsic;  // empty extrinsic list
  CHECK_FALSE(sample_goal({Goal{"ignored"}}, t, ext, rng).has_value());
}

TEST_CASE("sample_goal frequencies match normalized weights within 0.03") {
  CompetenceTracker t;
  // Competences: a=0.5 (weight 1.2), b=1.0 (weight e^-2+0.2), c cold (0 ->
  // same weight as b under the bump).
  for (int i = 0; i < 50; ++i) t.record_attempt("a", i % 2 == 0);
  for (int i = 0; i < 50; ++i) t.record_attempt("b", true);

  SamplerConfig cfg;
  cfg.mode = SamplerMode::Intermediate;
  std::vector<Goal> pool{Goal{"a"}, Goal{"b"}, Goal{"c"}};

  double wa = 1.2, wb = std::exp(-2.0) + 0.2, wc = wb;
  double total = wa + wb + wc;

  std::mt19937_64 rng(99);
  std::map<std::string, int> counts;
  const int N = 10000;
  for (int i = 0; i < N; ++i) {
    auto g = sample_goal(pool, t, cfg, rng);
    REQUIRE(g.has_value());
    counts[g->text]++;
  }
  CHECK(std::abs(counts["a"] / double(N) - wa / total) < 0.03);
  CHECK(std::abs(counts["b"] / double(N) - wb / total) < 0.03);
  CHECK(std::abs(counts["c"] / double(N) - wc / total) < 0.03);
}

TEST_CASE("extrinsic mode samples uniformly from the fixed list") {
  CompetenceTracker t;
  for (int i = 0; i < 50; ++i) t.record_attempt("x", true);
  SamplerConfig ext;
  ext.mode = SamplerMode::Extrinsic;
  ext.extrinsic = {Goal{"x"}, Goal{"y"}, Goal{"z"}, Goal{"w"}};

  std::mt19937_64 rng(5);
  std::map<std::string, int> counts;
  const int N = 10000;
  // The discovered pool is ignored in extrinsic mode.
  for (int i = 0; i < N; ++i)
    counts[sample_goal({Goal{"decoy"}}, t, ext, rng)->text]++;
  CHECK(counts.count("decoy") == 0);
  for (const auto& [text, n] : counts)
    CHECK(std::abs(n / double(N) - 0.25) < 0.03);
}

TEST_CASE("sampling is deterministic per rng stream") {
  CompetenceTracker t;
  SamplerConfig cfg;
  std::vector<Goal> pool{Goal{"a"}, Goal{"b"}, Goal{"c"}};
  std::mt19937_64 r1(3), r2(3);
  for (int i = 0; i < 200; ++i)
    CHECK(sample_goal(pool, t, cfg, r1)->text ==
          sample_goal(pool, t, cfg, r2)->text);
}
