#include "autokitchen/orchestrator.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace ak {

namespace {

using nlohmann::json;

const char* relabel_name(RelabelMode m) {
  switch (m) {
    case RelabelMode::Selective: return "selective";
    case RelabelMode::Exhaustive: return "exhaustive";
    case RelabelMode::None: return "none";
  }
  return "selective";
}

RelabelMode relabel_from(const std::string& s) {
  if (s == "selective") return RelabelMode::Selective;
  if (s == "exhaustive") return RelabelMode::Exhaustive;
  if (s == "none") return RelabelMode::None;
  throw std::invalid_argument("unknown relabel mode: " + s);
}

const char* sampler_name(SamplerMode m) {
  switch (m) {
    case SamplerMode::Uniform: return "uniform";
    case SamplerMode::Intermediate: return "intermediate";
    case SamplerMode::Difficulty: return "difficulty";
    case SamplerMode::Extrinsic: return "extrinsic";
  }
  return "uniform";
}

SamplerMode sampler_from(const std::string& s) {
  if (s == "uniform") return SamplerMode::Uniform;
  if (s == "intermediate") return SamplerMode::Intermediate;
  if (s == "difficulty") return SamplerMode::Difficulty;
  if (s == "extrinsic") return SamplerMode::Extrinsic;
  throw std::invalid_argument("unknown episode sampler: " + s);
}

const char* weights_name(WeightMode m) {
  switch (m) {
    case WeightMode::Uniform: return "uniform";
    case WeightMode::TransitionProportional: return "transition_proportional";
    case WeightMode::External: return "external";
  }
  return "uniform";
}

WeightMode weights_from(const std::string& s) {
  if (s == "uniform") return WeightMode::Uniform;
  if (s == "transition_proportional") return WeightMode::TransitionProportional;
  if (s == "external") return WeightMode::External;
  throw std::invalid_argument("unknown replay weight mode: " + s);
}

json config_to_json_obj(const RunConfig& c) {
  json j;
  j["name"] = c.name;
  j["total_steps"] = c.total_steps;
  j["episode_cap"] = c.episode_cap;
  j["go_explore_steps"] = c.go_explore_steps;
  j["goal_chain_p"] = c.goal_chain_p;
  j["max_chains"] = c.max_chains;
  j["eval_period"] = c.eval_period;
  j["relabel"] = relabel_name(c.relabel);
  j["episode_sampler"] = sampler_name(c.episode_sampler);
  j["replay_weights"] = weights_name(c.replay_weights);
  j["buffer"] = c.buffer == BufferKind::Modular ? "modular" : "flat";
  j["buffer_capacity"] = c.buffer_capacity;
  j["flat_capacity"] = c.flat_capacity;
  j["nonsense_goals"] = c.nonsense_goals;
  j["hidden"] = c.hidden;
  j["encoder_bits"] = c.encoder_bits;
  j["gamma"] = c.hp.gamma;
  j["lambda_h"] = c.hp.lambda_h;
  j["learning_rate"] = c.hp.learning_rate;
  j["grad_clip"] = c.hp.grad_clip;
  j["batch_size"] = c.batch_size;
  j["update_every"] = c.update_every;
  j["sampler_alpha"] = c.sampler_alpha;
  j["sampler_beta"] = c.sampler_beta;
  j["sampler_sigma"] = c.sampler_sigma;
  j["sampler_bump"] = c.sampler_bump;
  j["seed"] = c.seed;
  j["goal_file"] = c.goal_file;
  return j;
}

void config_apply_json(RunConfig& c, const json& j,
                       std::vector<std::string>* overrides) {
  auto set = [&](const char* key, auto&& fn) {
    if (j.contains(key)) {
      fn(j.at(key));
      if (overrides) overrides->push_back(key);
    }
  };
  set("name", [&](const json& v) { c.name = v.get<std::string>(); });
  set("total_steps", [&](const json& v) { c.total_steps = v.get<long>(); });
  set("episode_cap", [&](const json& v) { c.episode_cap = v.get<int>(); });
  set("go_explore_steps", [&](const json& v) { c.go_explore_steps = v.get<int>(); });
  set("goal_chain_p", [&](const json& v) { c.goal_chain_p = v.get<double>(); });
  set("max_chains", [&](const json& v) { c.max_chains = v.get<int>(); });
  set("eval_period", [&](const json& v) { c.eval_period = v.get<long>(); });
  set("relabel", [&](const json& v) { c.relabel = relabel_from(v.get<std::string>()); });
  set("episode_sampler",
      [&](const json& v) { c.episode_sampler = sampler_from(v.get<std::string>()); });
  set("replay_weights",
      [&](const json& v) { c.replay_weights = weights_from(v.get<std::string>()); });
  set("buffer", [&](const json& v) {
    std::string s = v.get<std::string>();
    if (s == "modular") c.buffer = BufferKind::Modular;
    else if (s == "flat") c.buffer = BufferKind::Flat;
    else throw std::invalid_argument("unknown buffer kind: " + s);
  });
  set("buffer_capacity", [&](const json& v) { c.buffer_capacity = v.get<size_t>(); });
  set("flat_capacity", [&](const json& v) { c.flat_capacity = v.get<size_t>(); });
  set("nonsense_goals", [&](const json& v) { c.nonsense_goals = v.get<int>(); });
  set("hidden", [&](const json& v) { c.hidden = v.get<int>(); });
  set("encoder_bits", [&](const json& v) { c.encoder_bits = v.get<int>(); });
  set("gamma", [&](const json& v) { c.hp.gamma = v.get<double>(); });
  set("lambda_h", [&](const json& v) { c.hp.lambda_h = v.get<double>(); });
  set("learning_rate", [&](const json& v) { c.hp.learning_rate = v.get<double>(); });
  set("grad_clip", [&](const json& v) { c.hp.grad_clip = v.get<double>(); });
  set("batch_size", [&](const json& v) { c.batch_size = v.get<int>(); });
  set("update_every", [&](const json& v) { c.update_every = v.get<int>(); });
  set("sampler_alpha", [&](const json& v) { c.sampler_alpha = v.get<double>(); });
  set("sampler_beta", [&](const json& v) { c.sampler_beta = v.get<double>(); });
  set("sampler_sigma", [&](const json& v) { c.sampler_sigma = v.get<double>(); });
  set("sampler_bump", [&](const json& v) { c.sampler_bump = v.get<bool>(); });
  set("seed", [&](const json& v) { c.seed = v.get<unsigned long long>(); });
  set("goal_file", [&](const json& v) { c.goal_file = v.get<std::string>(); });
}

}  // namespace

std::string run_config_to_json(const RunConfig& c) {
  return config_to_json_obj(c).dump(2);
}

RunConfig run_config_from_json(const std::string& text) {
  RunConfig c;
  config_apply_json(c, json::parse(text), nullptr);
  return c;
}

std::map<std::string, RunConfig> config_presets() {
  std::map<std::string, RunConfig> out;

  RunConfig base;
  base.name = "base";
  out["base"] = base;

  RunConfig ge = base;
  ge.name = "go-explore";
  ge.go_explore_steps = 5;
  out["go-explore"] = ge;

  RunConfig chain = base;
  chain.name = "chain";
  chain.goal_chain_p = 0.5;
  out["chain"] = chain;

  RunConfig gec = base;
  gec.name = "go-explore-chain";
  gec.go_explore_steps = 5;
  gec.goal_chain_p = 0.5;
  out["go-explore-chain"] = gec;

  RunConfig nofb = base;
  nofb.name = "no-feedback";
  nofb.relabel = RelabelMode::None;
  nofb.episode_sampler = SamplerMode::Extrinsic;
  nofb.buffer = BufferKind::Flat;
  out["no-feedback"] = nofb;

  RunConfig unc = base;
  unc.name = "unconstrained";
  unc.relabel = RelabelMode::Exhaustive;
  unc.total_steps = base.total_steps / 2;  // the early-stopped configuration
  out["unconstrained"] = unc;

  RunConfig ut = base;
  ut.name = "uniform-transition";
  ut.replay_weights = WeightMode::TransitionProportional;
  out["uniform-transition"] = ut;

  RunConfig meta = base;
  meta.name = "metacognitive";
  meta.go_explore_steps = 5;
  meta.goal_chain_p = 0.5;
  meta.episode_sampler = SamplerMode::Intermediate;
  out["metacognitive"] = meta;

  RunConfig ei = base;
  ei.name = "extrinsic-impossible";
  ei.episode_sampler = SamplerMode::Extrinsic;
  ei.nonsense_goals = 100;
  out["extrinsic-impossible"] = ei;

  return out;
}

RunConfig resolve_config(const std::string& name_or_path,
                         std::vector<std::string>* overrides) {
  auto presets = config_presets();
  auto it = presets.find(name_or_path);
  if (it != presets.end()) return it->second;

  std::ifstream in(name_or_path);
  if (!in) {
    std::string names;
    for (const auto& [n, c] : presets) names += (names.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown configuration '" + name_or_path +
                                "' (valid presets: " + names + ")");
  }
  std::stringstream ss;
  ss << in.rdbuf();
  json j = json::parse(ss.str());
  RunConfig c;
  if (j.contains("preset")) {
    std::string p = j.at("preset").get<std::string>();
    auto pit = presets.find(p);
    if (pit == presets.end())
      throw std::invalid_argument("unknown preset '" + p + "' in " + name_or_path);
    c = pit->second;
    j.erase("preset");
  }
  config_apply_json(c, j, overrides);
  return c;
}

// --- Evaluation -------------------------------------------------------------

EvalReport evaluate(const QModel& model, const TextEncoder& enc,
                    const GoalFile& goals, const ScenarioConfig& scenario,
                    int episode_cap) {
  EvalReport rep;
  std::mt19937_64 dummy(0);  // eval is greedy; rng is never consulted
  ActionHiddenCache acache;  // parameters are fixed for the whole eval
  for (const auto& g : goals.all) {
    Environment env(scenario);
    Observation obs = env.reset(0);
    int success = reward(obs.look, g);
    for (int t = 0; t < episode_cap && !success; ++t) {
      auto va = env.valid_actions();
      std::vector<std::string> texts;
      texts.reserve(va.size());
      for (const auto& a : va) texts.push_back(a.surface_text);
      auto scores =
          q_values(model, enc, obs.obs, obs.look, obs.inv, g.text, texts, &acache);
      size_t idx = select_action(scores, SelectMode::Eval, dummy);
      auto r = env.step(va[idx]);
      obs = r.observation;
      success = reward(obs.look, g);
    }
    rep.per_goal[g.text] = success;
  }
  double sum_all = 0.0;
  for (const auto& g : goals.all) sum_all += rep.per_goal[g.text];
  rep.score_all = goals.all.empty() ? 0.0 : 100.0 * sum_all / goals.all.size();
  double sum_hard = 0.0;
  for (const auto& g : goals.hard) sum_hard += rep.per_goal[g.text];
  rep.score_hard = goals.hard.empty() ? 0.0 : 100.0 * sum_hard / goals.hard.size();
  return rep;
}

// --- Episode rollout --------------------------------------------------------

EpisodeResult run_episode(Environment& env, const QModel& model,
                          const TextEncoder& enc, std::optional<Goal> goal,
                          const RunConfig& config, const GoalSampler& chain_goals,
                          std::mt19937_64& rng, TextPool& pool,
                          ActionHiddenCache* cache) {
  EpisodeResult out;
  Observation obs = env.reset(0);
  out.looks.push_back(obs.look);

  auto action_texts = [&](const std::vector<Action>& va) {
    std::vector<std::string> texts;
    texts.reserve(va.size());
    for (const auto& a : va) texts.push_back(a.surface_text);
    return texts;
  };

  std::vector<Action> va = env.valid_actions();
  ActionListRef va_ref = pool.intern_list(action_texts(va));

  auto take = [&](size_t idx, const std::optional<Goal>& g) {
    Transition t;
    t.obs = pool.intern(obs.obs);
    t.look = pool.intern(obs.look);
    t.inv = pool.intern(obs.inv);
    t.action = (*va_ref)[idx];
    t.valid_actions = va_ref;
    auto r = env.step(va[idx]);
    obs = r.observation;
    va = env.valid_actions();
    va_ref = pool.intern_list(action_texts(va));
    t.next_obs = pool.intern(obs.obs);
    t.next_look = pool.intern(obs.look);
    t.next_inv = pool.intern(obs.inv);
    t.next_valid_actions = va_ref;
    t.reward = g ? reward(obs.look, *g) : 0;
    out.record.transitions.push_back(std::move(t));
    out.looks.push_back(obs.look);
    out.env_steps += 1;
    return out.record.transitions.back().reward;
  };

  std::bernoulli_distribution chain_coin(config.goal_chain_p);
  ActionHiddenCache local;  // parameters are fixed for the whole episode
  ActionHiddenCache* acache = cache ? cache : &local;
  int chains = 0;
  while (true) {
    bool achieved = false;
    for (int t = 0; t < config.episode_cap; ++t) {
      size_t idx;
      if (goal) {
        auto scores = q_values(model, enc, obs.obs, obs.look, obs.inv,
                               goal->text, *va_ref, acache);
        idx = select_action(scores, SelectMode::Train, rng);
      } else {
        std::uniform_int_distribution<size_t> pick(0, va_ref->size() - 1);
        idx = pick(rng);
      }
      if (take(idx, goal) == 1) {
        achieved = true;
        break;
      }
    }
    if (goal) out.record.targeted.push_back(TargetedGoal{*goal, achieved});

    if (config.goal_chain_p > 0.0 && chains < config.max_chains &&
        chain_coin(rng)) {
      auto next_goal = chain_goals ? chain_goals(rng) : std::nullopt;
      if (next_goal) {
        goal = next_goal;
        ++chains;
        continue;
      }
    }
    break;
  }

  for (int k = 0; k < config.go_explore_steps; ++k) {
    std::uniform_int_distribution<size_t> pick(0, va_ref->size() - 1);
    take(pick(rng), goal);
  }

  if (!out.record.transitions.empty()) out.record.transitions.back().terminal = true;
  return out;
}

// --- Training loop ----------------------------------------------------------

namespace {

std::vector<BatchItem> to_batch(const std::vector<SampledTransition>& sts) {
  std::vector<BatchItem> batch;
  batch.reserve(sts.size());
  for (const auto& st : sts) {
    const Transition& t = *st.transition;
    BatchItem it;
    it.obs = *t.obs;
    it.look = *t.look;
    it.inv = *t.inv;
    it.goal = st.goal.text;
    it.candidates = *t.valid_actions;
    auto pos = std::find(it.candidates.begin(), it.candidates.end(), t.action);
    it.action_index = pos == it.candidates.end()
                          ? 0
                          : static_cast<size_t>(pos - it.candidates.begin());
    it.reward = st.reward;
    it.terminal = t.terminal;
    it.next_obs = *t.next_obs;
    it.next_look = *t.next_look;
    it.next_inv = *t.next_inv;
    it.next_candidates = *t.next_valid_actions;
    batch.push_back(std::move(it));
  }
  return batch;
}

}  // namespace

TrainResult train(const RunConfig& config, const std::string& out_dir,
                  const std::vector<std::string>& manifest_overrides) {
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  const auto t0 = std::chrono::steady_clock::now();

  GoalFile gf = config.goal_file.empty() ? canonical_goals()
                                         : load_goal_file(config.goal_file);

  auto write_manifest = [&](double wall_clock_sec) {
    json m;
    m["config"] = config_to_json_obj(config);
    m["overrides"] = manifest_overrides;
    m["goal_count"] = gf.all.size();
    m["hard_goal_count"] = gf.hard.size();
    if (wall_clock_sec >= 0.0) m["wall_clock_sec"] = wall_clock_sec;
    std::ofstream out(out_dir + "/manifest.json");
    out << m.dump(2) << "\n";
  };
  write_manifest(-1.0);

  std::ofstream metrics(out_dir + "/metrics.jsonl");
  if (!metrics) throw std::runtime_error("cannot write metrics log in " + out_dir);

  ScenarioConfig scenario = default_kitchen();
  Environment env(scenario);
  HashedNgramEncoder enc(config.encoder_bits);
  QModel model(config.hidden, config.seed, 0.1);
  std::mt19937_64 rng(config.seed);

  TextPool pool;
  // Shared Wa*xa memo: valid between updates, cleared by update() on apply.
  ActionHiddenCache acache;
  ReplayBuffer buffer(config.buffer_capacity);
  FlatReplayBuffer flat(config.flat_capacity);
  CompetenceTracker tracker;

  // Goal bookkeeping. Autotelic modes grow `discovered` through relabeling;
  // extrinsic modes draw from a fixed list.
  std::vector<Goal> discovered;
  GoalSet discovered_set;
  SamplerConfig sampler;
  sampler.mode = config.episode_sampler;
  sampler.alpha = config.sampler_alpha;
  sampler.beta = config.sampler_beta;
  sampler.sigma = config.sampler_sigma;
  sampler.bump = config.sampler_bump;
  if (config.episode_sampler == SamplerMode::Extrinsic) {
    sampler.extrinsic = gf.all;
    for (auto& g : sampler.extrinsic) g.origin = GoalOrigin::Extrinsic;
    if (config.nonsense_goals > 0) {
      auto nonsense =
          gen_nonsense_goals(config.nonsense_goals, config.seed ^ 0x6e6f6e73ull);
      sampler.extrinsic.insert(sampler.extrinsic.end(), nonsense.begin(),
                               nonsense.end());
    }
  }

  RelabelPolicy relabel_policy;
  relabel_policy.mode = config.relabel;
  if (config.relabel == RelabelMode::Selective)
    for (const auto& g : gf.all) relabel_policy.reference.insert(g);

  GoalSampler chain_goals = [&](std::mt19937_64& r) {
    return sample_goal(discovered, tracker, sampler, r);
  };

  TrainResult result;
  std::deque<double> last_all, last_hard;
  long pending_update_steps = 0;
  long next_eval = config.eval_period;

  auto log_eval = [&](long step) {
    EvalReport rep = evaluate(model, enc, gf, scenario, config.episode_cap);
    last_all.push_back(rep.score_all);
    last_hard.push_back(rep.score_hard);
    while (last_all.size() > 10) last_all.pop_front();
    while (last_hard.size() > 10) last_hard.pop_front();
    double l10a = 0.0, l10h = 0.0;
    for (double v : last_all) l10a += v;
    for (double v : last_hard) l10h += v;
    l10a /= last_all.size();
    l10h /= last_hard.size();
    result.evals_done += 1;
    result.last10_all = l10a;
    result.last10_hard = l10h;

    json line;
    line["step"] = step;
    line["eval_all"] = rep.score_all;
    line["eval_hard"] = rep.score_hard;
    line["last10_all"] = l10a;
    line["last10_hard"] = l10h;
    line["goals_discovered"] =
        config.episode_sampler == SamplerMode::Extrinsic ? sampler.extrinsic.size()
                                                         : discovered.size();
    line["buffer"] =
        config.buffer == BufferKind::Modular ? buffer.size() : flat.size();
    json per_goal = json::object();
    for (const auto& [text, ok] : rep.per_goal) per_goal[text] = ok;
    line["per_goal"] = per_goal;
    json comp = json::object();
    for (const auto& g : gf.all) {
      const CompetenceRecord* rec = tracker.record(g.text);
      json c;
      c["attempts"] = rec ? rec->attempts : 0;
      c["c"] = rec ? rec->competence() : 0.0;
      c["w"] = competence_weight(rec ? rec->competence() : 0.0, sampler);
      comp[g.text] = c;
    }
    line["competence"] = comp;
    metrics << line.dump() << "\n";
  };

  while (result.steps_done < config.total_steps) {
    std::optional<Goal> goal = sample_goal(discovered, tracker, sampler, rng);
    EpisodeResult ep =
        run_episode(env, model, enc, goal, config, chain_goals, rng, pool,
                    &acache);
    ep.record.seed = config.seed;
    ep.record.step_index = result.steps_done;
    result.steps_done += ep.env_steps;
    pending_update_steps += ep.env_steps;

    for (const auto& tg : ep.record.targeted)
      tracker.record_attempt(tg.goal.text, tg.achieved);

    // Relabel over post-step looks only: every relabeled goal is then rewarded
    // at some transition (the buffer's invariant), and elements of the reset
    // look that the episode immediately disturbs are not counted as achieved.
    std::vector<std::string> achieved_looks(
        ep.looks.begin() + (ep.looks.empty() ? 0 : 1), ep.looks.end());
    ep.record.relabeled = relabel_looks(achieved_looks, relabel_policy);
    for (const auto& g : ep.record.relabeled.items()) {
      if (discovered_set.insert(g)) discovered.push_back(g);
    }

    if (config.buffer == BufferKind::Modular) {
      if (!ep.record.relabeled.empty() || !ep.record.targeted.empty()) {
        finalize_record(ep.record);
        buffer.push(std::move(ep.record));
      }
    } else {
      // Flat transition buffer: original goal and sparse reward only.
      if (!ep.record.targeted.empty()) {
        const Goal& g = ep.record.targeted.front().goal;
        for (auto& t : ep.record.transitions) flat.push(std::move(t), g);
      }
    }

    while (pending_update_steps >= config.update_every) {
      pending_update_steps -= config.update_every;
      std::vector<SampledTransition> sts;
      if (config.buffer == BufferKind::Modular) {
        if (buffer.empty()) continue;
        std::map<std::string, double> weights;
        if (config.replay_weights == WeightMode::External) {
          std::map<std::string, double> comp_w;
          for (const auto& [text, e] : buffer.index())
            comp_w[text] = competence_weight(tracker.competence(text), sampler);
          weights = goal_weights(WeightMode::External, buffer.index(), &comp_w);
        } else {
          weights = goal_weights(config.replay_weights, buffer.index());
        }
        sts = buffer.sample_batch(config.batch_size, weights, rng);
      } else {
        if (flat.empty()) continue;
        sts = flat.sample_batch(config.batch_size, rng);
      }
      if (sts.empty()) continue;
      auto batch = to_batch(sts);
      LossBreakdown lb = update(model, enc, batch, config.hp, &acache);
      if (!lb.applied)
        throw std::runtime_error("train: non-finite loss at step " +
                                 std::to_string(result.steps_done));
    }

    while (result.steps_done >= next_eval) {
      log_eval(next_eval);
      next_eval += config.eval_period;
    }
  }

  result.goals_discovered = config.episode_sampler == SamplerMode::Extrinsic
                                ? sampler.extrinsic.size()
                                : discovered.size();
  model.save(out_dir + "/checkpoint.bin", config.encoder_bits);
  const auto t1 = std::chrono::steady_clock::now();
  write_manifest(std::chrono::duration<double>(t1 - t0).count());
  return result;
}

// --- Random baseline --------------------------------------------------------

std::map<std::string, long> run_random_baseline(long total_steps,
                                                int reset_period,
                                                const GoalFile& goals,
                                                unsigned long long seed) {
  ScenarioConfig scenario = default_kitchen();
  Environment env(scenario);
  std::mt19937_64 rng(seed);
  std::map<std::string, long> counts;
  for (const auto& g : goals.all) counts[g.text] = 0;

  Observation obs;
  for (long step = 0; step < total_steps; ++step) {
    if (reset_period > 0 && step % reset_period == 0) obs = env.reset(0);
    auto va = env.valid_actions();
    std::uniform_int_distribution<size_t> pick(0, va.size() - 1);
    auto r = env.step(va[pick(rng)]);
    obs = r.observation;
    for (const auto& g : goals.all)
      counts[g.text] += reward(obs.look, g);
  }
  return counts;
}

}  // namespace ak
