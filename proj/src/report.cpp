#include "autokitchen/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"

namespace ak {

namespace {

using nlohmann::json;

double tail_mean(const std::vector<double>& xs, size_t n) {
  if (xs.empty()) return 0.0;
  size_t k = std::min(n, xs.size());
  double s = 0.0;
  for (size_t i = xs.size() - k; i < xs.size(); ++i) s += xs[i];
  return s / static_cast<double>(k);
}

std::string fmt(double v, int prec = 2) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", prec, v);
  return buf;
}

}  // namespace

double SeedSeries::last10_all() const { return tail_mean(eval_all, 10); }
double SeedSeries::last10_hard() const { return tail_mean(eval_hard, 10); }

double mean_of(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double population_std(const std::vector<double>& xs) {
  if (xs.empty()) return 0.0;
  double m = mean_of(xs);
  double s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(xs.size()));
}

std::vector<ConfigGroup> scan_runs(const std::string& runs_dir,
                                   std::vector<std::string>* warnings) {
  namespace fs = std::filesystem;
  auto warn = [&](const std::string& msg) {
    if (warnings) warnings->push_back(msg);
  };

  std::map<std::string, ConfigGroup> by_config;
  if (!fs::is_directory(runs_dir)) {
    warn("runs directory not found: " + runs_dir);
    return {};
  }

  std::vector<fs::path> dirs;
  for (const auto& e : fs::directory_iterator(runs_dir))
    if (e.is_directory()) dirs.push_back(e.path());
  std::sort(dirs.begin(), dirs.end());

  for (const auto& dir : dirs) {
    fs::path manifest_path = dir / "manifest.json";
    fs::path metrics_path = dir / "metrics.jsonl";
    if (!fs::exists(manifest_path) || !fs::exists(metrics_path)) continue;

    std::string config_name;
    SeedSeries series;
    try {
      std::ifstream in(manifest_path);
      json m = json::parse(in);
      config_name = m.at("config").at("name").get<std::string>();
      series.seed = m.at("config").at("seed").get<unsigned long long>();
      if (m.contains("wall_clock_sec"))
        series.wall_clock_sec = m.at("wall_clock_sec").get<double>();
    } catch (const std::exception& e) {
      warn("unreadable manifest in " + dir.string() + ": " + e.what());
      continue;
    }

    std::ifstream in(metrics_path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        json j = json::parse(line);
        series.steps.push_back(j.at("step").get<long>());
        series.eval_all.push_back(j.at("eval_all").get<double>());
        series.eval_hard.push_back(j.at("eval_hard").get<double>());
        series.goals_discovered.push_back(
            j.at("goals_discovered").get<double>());
      } catch (const std::exception&) {
        series.corrupt_lines += 1;
      }
    }
    if (series.corrupt_lines > 0)
      warn(dir.string() + ": skipped " + std::to_string(series.corrupt_lines) +
           " corrupt metric line(s)");
    if (series.steps.empty()) {
      warn(dir.string() + ": metrics log has no usable lines, run dropped");
      continue;
    }

    auto& group = by_config[config_name];
    group.config = config_name;
    group.seeds.push_back(std::move(series));
  }

  std::vector<ConfigGroup> out;
  for (auto& [name, group] : by_config) {
    std::sort(group.seeds.begin(), group.seeds.end(),
              [](const SeedSeries& a, const SeedSeries& b) {
                return a.seed < b.seed;
              });
    std::set<unsigned long long> present;
    unsigned long long max_seed = 0;
    for (const auto& s : group.seeds) {
      present.insert(s.seed);
      max_seed = std::max(max_seed, s.seed);
    }
    for (unsigned long long s = 0; s <= max_seed; ++s)
      if (!present.count(s)) group.missing_seeds.push_back(s);
    if (!group.missing_seeds.empty()) {
      std::string list;
      for (auto s : group.missing_seeds)
        list += (list.empty() ? "" : ", ") + std::to_string(s);
      warn(name + ": missing seed(s) " + list);
    }
    out.push_back(std::move(group));
  }
  return out;
}

std::vector<RunSummary> summarize(const std::vector<ConfigGroup>& groups) {
  std::vector<RunSummary> out;
  for (const auto& g : groups) {
    RunSummary s;
    s.config = g.config;
    s.seed_count = static_cast<int>(g.seeds.size());
    s.single_seed = g.seeds.size() == 1;
    s.missing_seeds = g.missing_seeds;
    std::vector<double> alls, hards, goals, walls;
    for (const auto& seed : g.seeds) {
      alls.push_back(seed.last10_all());
      hards.push_back(seed.last10_hard());
      if (!seed.goals_discovered.empty())
        goals.push_back(seed.goals_discovered.back());
      walls.push_back(seed.wall_clock_sec);
      s.corrupt_lines += seed.corrupt_lines;
    }
    s.all_mean = mean_of(alls);
    s.all_std = population_std(alls);
    s.hard_mean = mean_of(hards);
    s.hard_std = population_std(hards);
    s.goals_mean = mean_of(goals);
    s.wall_clock_mean = mean_of(walls);
    out.push_back(std::move(s));
  }
  return out;
}

std::string format_summary_table(const std::vector<RunSummary>& summaries) {
  std::ostringstream out;
  out << "config\tseeds\teval_all\teval_hard\tgoals\twall_clock_s\tnotes\n";
  for (const auto& s : summaries) {
    std::string notes;
    auto add_note = [&](const std::string& n) {
      notes += (notes.empty() ? "" : "; ") + n;
    };
    if (s.single_seed) add_note("single seed: std is 0 by construction");
    if (!s.missing_seeds.empty()) {
      std::string list;
      for (auto m : s.missing_seeds)
        list += (list.empty() ? "" : ",") + std::to_string(m);
      add_note("missing seeds " + list);
    }
    if (s.corrupt_lines > 0)
      add_note(std::to_string(s.corrupt_lines) + " corrupt line(s) skipped");
    out << s.config << "\t" << s.seed_count << "\t" << fmt(s.all_mean)
        << " ± " << fmt(s.all_std) << "\t" << fmt(s.hard_mean) << " ± "
        << fmt(s.hard_std) << "\t" << fmt(s.goals_mean, 1) << "\t"
        << fmt(s.wall_clock_mean, 1) << "\t" << (notes.empty() ? "-" : notes)
        << "\n";
  }
  out << "# scores: per-seed mean over the last 10 evals; ± is the population "
         "standard deviation across seeds\n";
  return out.str();
}

// --- Curves -----------------------------------------------------------------

namespace {

constexpr double kW = 640.0, kH = 400.0;
constexpr double kML = 60.0, kMR = 20.0, kMT = 20.0, kMB = 40.0;

struct Metric {
  const char* key;
  std::vector<double> SeedSeries::* field;
};

std::string svg_chart(const ConfigGroup& group, const Metric& metric) {
  // Common x grid: use the seed with the most evals as reference.
  const SeedSeries* ref = nullptr;
  for (const auto& s : group.seeds)
    if (!ref || s.steps.size() > ref->steps.size()) ref = &s;
  if (!ref || ref->steps.empty()) return {};

  size_t n = ref->steps.size();
  double xmin = static_cast<double>(ref->steps.front());
  double xmax = static_cast<double>(ref->steps.back());
  if (xmax <= xmin) xmax = xmin + 1.0;

  double ymin = 0.0, ymax = 0.0;
  for (const auto& s : group.seeds)
    for (double v : s.*(metric.field)) ymax = std::max(ymax, v);
  if (ymax <= ymin) ymax = 1.0;

  auto X = [&](double step) {
    return kML + (step - xmin) / (xmax - xmin) * (kW - kML - kMR);
  };
  auto Y = [&](double v) {
    return kH - kMB - (v - ymin) / (ymax - ymin) * (kH - kMT - kMB);
  };

  // Mean and std per eval index over the seeds that reach it.
  std::vector<double> mean(n, 0.0), sd(n, 0.0);
  for (size_t i = 0; i < n; ++i) {
    std::vector<double> vals;
    for (const auto& s : group.seeds)
      if (i < (s.*(metric.field)).size()) vals.push_back((s.*(metric.field))[i]);
    mean[i] = mean_of(vals);
    sd[i] = population_std(vals);
  }

  std::ostringstream out;
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << (int)kW
      << "\" height=\"" << (int)kH << "\" viewBox=\"0 0 " << (int)kW << " "
      << (int)kH << "\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << (int)(kW / 2) << "\" y=\"16\" text-anchor=\"middle\" "
         "font-family=\"monospace\" font-size=\"13\">"
      << group.config << " — " << metric.key << "</text>\n";

  // Axes.
  out << "<line x1=\"" << fmt(kML) << "\" y1=\"" << fmt(kH - kMB) << "\" x2=\""
      << fmt(kW - kMR) << "\" y2=\"" << fmt(kH - kMB)
      << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << fmt(kML) << "\" y1=\"" << fmt(kMT) << "\" x2=\""
      << fmt(kML) << "\" y2=\"" << fmt(kH - kMB) << "\" stroke=\"black\"/>\n";
  out << "<text x=\"" << fmt(kML) << "\" y=\"" << fmt(kH - kMB + 16)
      << "\" font-family=\"monospace\" font-size=\"11\">" << fmt(xmin, 0)
      << "</text>\n";
  out << "<text x=\"" << fmt(kW - kMR) << "\" y=\"" << fmt(kH - kMB + 16)
      << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">"
      << fmt(xmax, 0) << "</text>\n";
  out << "<text x=\"" << fmt(kML - 6) << "\" y=\"" << fmt(kH - kMB)
      << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">"
      << fmt(ymin, 0) << "</text>\n";
  out << "<text x=\"" << fmt(kML - 6) << "\" y=\"" << fmt(kMT + 4)
      << "\" text-anchor=\"end\" font-family=\"monospace\" font-size=\"11\">"
      << fmt(ymax, 0) << "</text>\n";

  // Std band around the mean.
  std::ostringstream band;
  for (size_t i = 0; i < n; ++i)
    band << fmt(X((double)ref->steps[i])) << "," << fmt(Y(std::min(ymax, mean[i] + sd[i])))
         << " ";
  for (size_t i = n; i-- > 0;)
    band << fmt(X((double)ref->steps[i])) << "," << fmt(Y(std::max(ymin, mean[i] - sd[i])))
         << " ";
  out << "<polygon points=\"" << band.str()
      << "\" fill=\"#9ecae1\" fill-opacity=\"0.4\" stroke=\"none\"/>\n";

  // Per-seed traces.
  for (const auto& s : group.seeds) {
    const auto& vals = s.*(metric.field);
    std::ostringstream pts;
    for (size_t i = 0; i < vals.size() && i < s.steps.size(); ++i)
      pts << fmt(X((double)s.steps[i])) << "," << fmt(Y(vals[i])) << " ";
    out << "<polyline points=\"" << pts.str()
        << "\" fill=\"none\" stroke=\"#bbbbbb\" stroke-width=\"1\"/>\n";
  }

  // Mean trace.
  std::ostringstream pts;
  for (size_t i = 0; i < n; ++i)
    pts << fmt(X((double)ref->steps[i])) << "," << fmt(Y(mean[i])) << " ";
  out << "<polyline points=\"" << pts.str()
      << "\" fill=\"none\" stroke=\"#08519c\" stroke-width=\"2\"/>\n";

  out << "</svg>\n";
  return out.str();
}

}  // namespace

std::vector<std::string> render_curves(const std::vector<ConfigGroup>& groups,
                                       const std::string& out_dir) {
  namespace fs = std::filesystem;
  static const Metric metrics[] = {
      {"eval_all", &SeedSeries::eval_all},
      {"eval_hard", &SeedSeries::eval_hard},
      {"goals_discovered", &SeedSeries::goals_discovered},
  };
  std::vector<std::string> written;
  if (groups.empty()) return written;
  fs::create_directories(out_dir);
  for (const auto& g : groups) {
    for (const auto& m : metrics) {
      std::string svg = svg_chart(g, m);
      if (svg.empty()) continue;
      std::string path = out_dir + "/" + g.config + "_" + m.key + ".svg";
      std::ofstream out(path, std::ios::binary);
      out << svg;
      written.push_back(path);
    }
  }
  return written;
}

}  // namespace ak
