// Command-line entry point: training runs, the random baseline study,
// checkpoint evaluation and report generation.

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "autokitchen/orchestrator.hpp"
#include "autokitchen/report.hpp"

namespace {

int cmd_run(const std::string& config_arg, long long seed, long steps,
            const std::string& out_dir) {
  std::vector<std::string> overrides;
  ak::RunConfig config = ak::resolve_config(config_arg, &overrides);
  if (seed >= 0) {
    config.seed = static_cast<unsigned long long>(seed);
    overrides.push_back("seed");
  }
  if (steps > 0) {
    config.total_steps = steps;
    overrides.push_back("total_steps");
  }
  ak::TrainResult res = ak::train(config, out_dir, overrides);
  std::cout << "config=" << config.name << " seed=" << config.seed
            << " steps=" << res.steps_done << " evals=" << res.evals_done
            << " last10_all=" << res.last10_all
            << " last10_hard=" << res.last10_hard
            << " goals_discovered=" << res.goals_discovered << "\n";
  return 0;
}

int cmd_baseline(long steps, int reset_period, long long seed,
                 const std::string& out_dir, const std::string& goal_path) {
  ak::GoalFile goals = goal_path.empty() ? ak::canonical_goals()
                                         : ak::load_goal_file(goal_path);
  auto counts = ak::run_random_baseline(
      steps, reset_period, goals, static_cast<unsigned long long>(seed));

  std::ostringstream table;
  table << "goal\toccurrences\n";
  // Print in descending occurrence order, ties by goal text.
  std::vector<std::pair<std::string, long>> rows(counts.begin(), counts.end());
  std::stable_sort(rows.begin(), rows.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  for (const auto& [goal, n] : rows) table << goal << "\t" << n << "\n";

  std::cout << table.str();
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    std::string path =
        out_dir + "/baseline_seed" + std::to_string(seed) + ".tsv";
    std::ofstream out(path);
    out << table.str();
    std::cout << "# written to " << path << "\n";
  }
  return 0;
}

int cmd_eval(const std::string& checkpoint, const std::string& goal_path,
             int episode_cap) {
  int bits = 0;
  ak::QModel model = ak::QModel::load(checkpoint, &bits);
  ak::HashedNgramEncoder enc(bits);
  ak::GoalFile goals = goal_path.empty() ? ak::canonical_goals()
                                         : ak::load_goal_file(goal_path);
  ak::EvalReport rep =
      ak::evaluate(model, enc, goals, ak::default_kitchen(), episode_cap);
  for (const auto& [goal, ok] : rep.per_goal)
    std::cout << (ok ? "PASS" : "FAIL") << "\t" << goal << "\n";
  std::printf("score_all=%.2f score_hard=%.2f\n", rep.score_all,
              rep.score_hard);
  return 0;
}

int cmd_report(const std::string& runs_dir) {
  std::vector<std::string> warnings;
  auto groups = ak::scan_runs(runs_dir, &warnings);
  if (groups.empty()) {
    std::cerr << "error: no usable runs under " << runs_dir << "\n";
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    return 1;
  }
  std::cout << ak::format_summary_table(ak::summarize(groups));
  auto files = ak::render_curves(groups, runs_dir + "/charts");
  for (const auto& f : files) std::cout << "# chart " << f << "\n";
  for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
  return warnings.empty() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Desk-scale autotelic kitchen agent"};
  app.require_subcommand(1);

  std::string config_arg = "base", out_dir = "runs/out", checkpoint,
              runs_dir = "runs", goal_path;
  long long seed = -1;
  long steps = 0;
  int reset_period = 30, episode_cap = 30;

  auto* run = app.add_subcommand("run", "Train one configuration");
  run->add_option("--config", config_arg,
                  "Preset name or JSON config file");
  run->add_option("--seed", seed, "Random seed (overrides the config)");
  run->add_option("--steps", steps, "Total env steps (overrides the config)");
  run->add_option("--out", out_dir, "Output directory")->required();

  auto* baseline =
      app.add_subcommand("baseline", "Random-agent goal occurrence study");
  baseline->add_option("--steps", steps, "Total env steps")->required();
  baseline->add_option("--out", out_dir, "Output directory");
  baseline->add_option("--seed", seed, "Random seed (default 0)");
  baseline->add_option("--reset-period", reset_period,
                       "Steps between resets (default 30)");
  baseline->add_option("--goals", goal_path, "Goal file (default built-in)");

  auto* eval = app.add_subcommand("eval", "Evaluate a saved checkpoint");
  eval->add_option("--checkpoint", checkpoint, "Checkpoint file")->required();
  eval->add_option("--goals", goal_path, "Goal file (default built-in)");
  eval->add_option("--episode-cap", episode_cap, "Episode cap T (default 30)");

  auto* report = app.add_subcommand("report", "Summarize a runs directory");
  report->add_option("--runs", runs_dir, "Runs directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (run->parsed()) return cmd_run(config_arg, seed, steps, out_dir);
    if (baseline->parsed())
      return cmd_baseline(steps, reset_period, seed < 0 ? 0 : seed,
                          baseline->count("--out") ? out_dir : "", goal_path);
    if (eval->parsed()) return cmd_eval(checkpoint, goal_path, episode_cap);
    if (report->parsed()) return cmd_report(runs_dir);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
