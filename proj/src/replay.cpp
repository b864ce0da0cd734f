#include "autokitchen/replay.hpp"

#include <algorithm>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ak {

TextRef make_text(std::string s) {
  return std::make_shared<const std::string>(std::move(s));
}

ActionListRef make_action_list(std::vector<std::string> v) {
  return std::make_shared<const std::vector<std::string>>(std::move(v));
}

TextRef TextPool::intern(const std::string& s) {
  auto it = texts_.find(s);
  if (it != texts_.end()) return it->second;
  auto ref = make_text(s);
  texts_[s] = ref;
  return ref;
}

ActionListRef TextPool::intern_list(const std::vector<std::string>& v) {
  std::string key;
  for (const auto& s : v) {
    key += s;
    key += '\x01';
  }
  auto it = lists_.find(key);
  if (it != lists_.end()) return it->second;
  auto ref = make_action_list(v);
  lists_[key] = ref;
  return ref;
}

void finalize_record(TrajectoryRecord& rec) {
  rec.per_goal_rewards.clear();
  GoalSet goals;
  for (const auto& g : rec.relabeled.items()) goals.insert(g);
  for (const auto& tg : rec.targeted) goals.insert(tg.goal);
  for (const auto& g : goals.items()) {
    std::vector<uint8_t> v;
    v.reserve(rec.transitions.size());
    for (const auto& t : rec.transitions)
      v.push_back(static_cast<uint8_t>(reward(*t.next_look, g)));
    rec.per_goal_rewards[g.text] = std::move(v);
  }
}

namespace {

void validate_record(const TrajectoryRecord& rec) {
  if (rec.transitions.empty())
    throw std::invalid_argument("replay: record has no transitions");
  for (const auto& t : rec.transitions) {
    if (t.reward != 0 && t.reward != 1)
      throw std::invalid_argument("replay: transition reward outside {0,1}");
    if (!t.valid_actions || t.valid_actions->empty() || !t.next_valid_actions ||
        t.next_valid_actions->empty())
      throw std::invalid_argument("replay: empty valid-action list");
    if (!t.look || !t.next_look)
      throw std::invalid_argument("replay: missing look text");
  }
  for (size_t i = 0; i + 1 < rec.transitions.size(); ++i) {
    if (rec.transitions[i].terminal)
      throw std::invalid_argument("replay: terminal transition not last");
  }
  for (const auto& g : rec.relabeled.items()) {
    auto it = rec.per_goal_rewards.find(g.text);
    if (it == rec.per_goal_rewards.end())
      throw std::invalid_argument("replay: relabeled goal '" + g.text +
                                  "' has no reward vector");
    if (it->second.size() != rec.transitions.size())
      throw std::invalid_argument("replay: reward vector length mismatch for '" +
                                  g.text + "'");
    if (std::find(it->second.begin(), it->second.end(), 1) == it->second.end())
      throw std::invalid_argument("replay: relabeled goal '" + g.text +
                                  "' never rewarded in record");
  }
  for (const auto& tg : rec.targeted) {
    auto it = rec.per_goal_rewards.find(tg.goal.text);
    if (it == rec.per_goal_rewards.end())
      throw std::invalid_argument("replay: targeted goal '" + tg.goal.text +
                                  "' has no reward vector");
    if (it->second.size() != rec.transitions.size())
      throw std::invalid_argument("replay: reward vector length mismatch for '" +
                                  tg.goal.text + "'");
  }
}

}  // namespace

void ReplayBuffer::index_record(GoalIndex& index, uint64_t id,
                                const TrajectoryRecord& rec) {
  for (const auto& g : rec.relabeled.items()) {
    auto& e = index[g.text];
    e.positives.push_back(id);
    e.transition_count += rec.transitions.size();
  }
  for (const auto& tg : rec.targeted) {
    if (tg.achieved) continue;
    if (rec.relabeled.contains(tg.goal.text)) continue;
    index[tg.goal.text].negatives.push_back(id);
  }
}

void ReplayBuffer::unindex_record(uint64_t id, const TrajectoryRecord& rec) {
  auto drop = [&](std::vector<uint64_t>& v) {
    v.erase(std::remove(v.begin(), v.end(), id), v.end());
  };
  for (const auto& g : rec.relabeled.items()) {
    auto it = index_.find(g.text);
    if (it == index_.end()) continue;
    drop(it->second.positives);
    it->second.transition_count -= rec.transitions.size();
    if (it->second.positives.empty() && it->second.negatives.empty())
      index_.erase(it);
  }
  for (const auto& tg : rec.targeted) {
    auto it = index_.find(tg.goal.text);
    if (it == index_.end()) continue;
    drop(it->second.negatives);
    if (it->second.positives.empty() && it->second.negatives.empty())
      index_.erase(it);
  }
}

void ReplayBuffer::push(TrajectoryRecord record) {
  validate_record(record);
  uint64_t id = next_id_++;
  transition_count_ += record.transitions.size();
  records_.emplace_back(id, std::move(record));
  index_record(index_, id, records_.back().second);
  while (records_.size() > capacity_) {
    auto& [old_id, old_rec] = records_.front();
    unindex_record(old_id, old_rec);
    transition_count_ -= old_rec.transitions.size();
    records_.pop_front();
  }
}

const TrajectoryRecord* ReplayBuffer::record(uint64_t id) const {
  for (const auto& [rid, rec] : records_)
    if (rid == id) return &rec;
  return nullptr;
}

GoalIndex ReplayBuffer::rebuild_index() const {
  GoalIndex fresh;
  for (const auto& [id, rec] : records_) index_record(fresh, id, rec);
  return fresh;
}

std::vector<SampledTransition> ReplayBuffer::sample_batch(
    size_t n, const std::map<std::string, double>& weights,
    std::mt19937_64& rng) const {
  std::vector<SampledTransition> out;
  if (records_.empty() || index_.empty()) return out;

  // Record lookup by id; ids are monotone so offset from the front works.
  const uint64_t base = records_.front().first;
  auto rec_by_id = [&](uint64_t id) -> const TrajectoryRecord& {
    return records_[id - base].second;
  };

  std::vector<const std::string*> goal_texts;
  std::vector<double> w;
  for (const auto& [text, weight] : weights) {
    if (!index_.count(text)) continue;
    goal_texts.push_back(&text);
    w.push_back(weight);
  }
  if (goal_texts.empty()) return out;
  std::discrete_distribution<size_t> goal_dist(w.begin(), w.end());
  std::bernoulli_distribution coin(0.5);

  out.reserve(n);
  for (size_t k = 0; k < n; ++k) {
    const std::string& gtext = *goal_texts[goal_dist(rng)];
    const GoalEntry& entry = index_.at(gtext);

    bool positive = coin(rng);
    if (positive && entry.positives.empty()) positive = false;
    if (!positive && entry.negatives.empty()) positive = true;

    const auto& pool = positive ? entry.positives : entry.negatives;
    std::uniform_int_distribution<size_t> traj_pick(0, pool.size() - 1);
    const TrajectoryRecord& rec = rec_by_id(pool[traj_pick(rng)]);
    const auto& rv = rec.per_goal_rewards.at(gtext);

    size_t idx = 0;
    if (positive) {
      std::vector<size_t> rewarded, unrewarded;
      for (size_t i = 0; i < rv.size(); ++i)
        (rv[i] ? rewarded : unrewarded).push_back(i);
      bool want_reward = coin(rng);
      if (want_reward && rewarded.empty()) want_reward = false;
      if (!want_reward && unrewarded.empty()) want_reward = true;
      const auto& idxs = want_reward ? rewarded : unrewarded;
      std::uniform_int_distribution<size_t> pick(0, idxs.size() - 1);
      idx = idxs[pick(rng)];
    } else {
      std::uniform_int_distribution<size_t> pick(0, rec.transitions.size() - 1);
      idx = pick(rng);
    }

    SampledTransition st;
    st.transition = &rec.transitions[idx];
    st.goal = Goal{gtext, GoalOrigin::Discovered};
    st.reward = rv[idx];
    out.push_back(st);
  }
  return out;
}

std::map<std::string, double> goal_weights(
    WeightMode mode, const GoalIndex& index,
    const std::map<std::string, double>* external) {
  std::map<std::string, double> out;
  if (index.empty()) return out;
  double total = 0.0;
  switch (mode) {
    case WeightMode::Uniform:
      for (const auto& [text, e] : index) out[text] = 1.0;
      total = static_cast<double>(index.size());
      break;
    case WeightMode::TransitionProportional:
      for (const auto& [text, e] : index) {
        double w = static_cast<double>(e.transition_count);
        out[text] = w;
        total += w;
      }
      break;
    case WeightMode::External: {
      if (!external)
        throw std::invalid_argument("goal_weights: external map required");
      for (const auto& [text, e] : index) {
        auto it = external->find(text);
        double w = it != external->end() ? it->second : 0.0;
        out[text] = w;
        total += w;
      }
      break;
    }
  }
  if (total <= 0.0) {
    double u = 1.0 / static_cast<double>(out.size());
    for (auto& [text, w] : out) w = u;
    return out;
  }
  for (auto& [text, w] : out) w /= total;
  return out;
}

void ReplayBuffer::snapshot(std::ostream& out) const {
  using nlohmann::json;
  for (const auto& [id, rec] : records_) {
    json j;
    j["v"] = 1;
    j["id"] = id;
    j["seed"] = rec.seed;
    j["step_index"] = rec.step_index;
    json targeted = json::array();
    for (const auto& tg : rec.targeted)
      targeted.push_back({{"goal", tg.goal.text}, {"achieved", tg.achieved}});
    j["targeted"] = targeted;
    json relabeled = json::array();
    for (const auto& g : rec.relabeled.items()) relabeled.push_back(g.text);
    j["relabeled"] = relabeled;
    json ts = json::array();
    for (const auto& t : rec.transitions) {
      ts.push_back({{"action", t.action},
                    {"reward", t.reward},
                    {"terminal", t.terminal},
                    {"look", *t.look},
                    {"next_look", *t.next_look}});
    }
    j["transitions"] = ts;
    out << j.dump() << "\n";
  }
}

void FlatReplayBuffer::push(Transition t, Goal goal) {
  items_.emplace_back(std::move(t), std::move(goal));
  while (items_.size() > capacity_) items_.pop_front();
}

std::vector<SampledTransition> FlatReplayBuffer::sample_batch(
    size_t n, std::mt19937_64& rng) const {
  std::vector<SampledTransition> out;
  if (items_.empty()) return out;
  std::uniform_int_distribution<size_t> pick(0, items_.size() - 1);
  out.reserve(n);
  for (size_t k = 0; k < n; ++k) {
    const auto& [t, g] = items_[pick(rng)];
    out.push_back(SampledTransition{&t, g, t.reward});
  }
  return out;
}

}  // namespace ak
