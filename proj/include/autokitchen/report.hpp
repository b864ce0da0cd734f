#pragma once

// Aggregation and presentation: merges per-seed metric logs into a Table-style
// summary (last-10-eval means per seed, population std across seeds) and
// renders deterministic SVG learning curves.

#include <string>
#include <vector>

namespace ak {

// One run's metrics log, parsed.
struct SeedSeries {
  unsigned long long seed = 0;
  std::vector<long> steps;
  std::vector<double> eval_all;
  std::vector<double> eval_hard;
  std::vector<double> goals_discovered;
  double wall_clock_sec = 0.0;
  int corrupt_lines = 0;

  // Mean of the last min(10, n) eval values.
  double last10_all() const;
  double last10_hard() const;
};

struct ConfigGroup {
  std::string config;
  std::vector<SeedSeries> seeds;  // sorted by seed
  // Gaps in [0, max seed] — reported, never silently dropped.
  std::vector<unsigned long long> missing_seeds;
};

struct RunSummary {
  std::string config;
  int seed_count = 0;
  double all_mean = 0.0, all_std = 0.0;    // over per-seed last-10 means
  double hard_mean = 0.0, hard_std = 0.0;  // population std
  double goals_mean = 0.0;                 // final discovered-goal count
  double wall_clock_mean = 0.0;
  int corrupt_lines = 0;
  bool single_seed = false;
  std::vector<unsigned long long> missing_seeds;
};

double mean_of(const std::vector<double>& xs);
double population_std(const std::vector<double>& xs);

// Scans a runs directory: every subdirectory holding a manifest.json and a
// metrics.jsonl is one run; runs are grouped by configuration name. Appends
// human-readable warnings (corrupt lines, unreadable runs).
std::vector<ConfigGroup> scan_runs(const std::string& runs_dir,
                                   std::vector<std::string>* warnings = nullptr);

std::vector<RunSummary> summarize(const std::vector<ConfigGroup>& groups);

// Delimited-text table plus the population-std footer and per-row caveats.
std::string format_summary_table(const std::vector<RunSummary>& summaries);

// One SVG per (configuration, metric) with per-seed traces and a mean +/- std
// band; byte-deterministic for fixed input. Returns the files written.
std::vector<std::string> render_curves(const std::vector<ConfigGroup>& groups,
                                       const std::string& out_dir);

}  // namespace ak
