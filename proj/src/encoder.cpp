#include "autokitchen/encoder.hpp"

#include <algorithm>
#include <cctype>

namespace ak {

namespace {

uint64_t fnv1a(const std::string& s, uint64_t salt) {
  uint64_t h = 14695981039346656037ull ^ salt;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

void accumulate(SparseVec& v) {
  std::sort(v.begin(), v.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  size_t w = 0;
  for (size_t i = 0; i < v.size(); ++i) {
    if (w > 0 && v[w - 1].first == v[i].first) {
      v[w - 1].second += v[i].second;
    } else {
      v[w++] = v[i];
    }
  }
  v.resize(w);
}

}  // namespace

std::vector<std::string> tokenize(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  for (unsigned char c : text) {
    if (std::isalnum(c)) {
      cur += static_cast<char>(std::tolower(c));
    } else if (!cur.empty()) {
      out.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

void HashedNgramEncoder::hash_channel(const std::string& text, uint32_t region,
                                      SparseVec& out) const {
  const uint32_t mask = (1u << bits_) - 1;
  const uint32_t base = region << bits_;
  const uint64_t salt = 0x9e3779b97f4a7c15ull * (region + 1);
  auto toks = tokenize(text);
  for (size_t i = 0; i < toks.size(); ++i) {
    out.emplace_back(base + (static_cast<uint32_t>(fnv1a(toks[i], salt)) & mask),
                     1.0f);
    if (i + 1 < toks.size()) {
      out.emplace_back(
          base +
              (static_cast<uint32_t>(fnv1a(toks[i] + "_" + toks[i + 1], salt)) &
               mask),
          1.0f);
    }
  }
}

const SparseVec& HashedNgramEncoder::encode_state(const std::string& obs,
                                                  const std::string& look,
                                                  const std::string& inv,
                                                  const std::string& goal) const {
  std::string key;
  key.reserve(obs.size() + look.size() + inv.size() + goal.size() + 3);
  key += obs;
  key += '\x1f';
  key += look;
  key += '\x1f';
  key += inv;
  key += '\x1f';
  key += goal;
  auto it = state_cache_.find(key);
  if (it != state_cache_.end()) return it->second;

  SparseVec v;
  hash_channel(obs, 0, v);
  hash_channel(look, 1, v);
  hash_channel(inv, 2, v);
  hash_channel(goal, 3, v);
  accumulate(v);
  if (state_cache_.size() >= kStateCacheCap) state_cache_.clear();
  return state_cache_.emplace(std::move(key), std::move(v)).first->second;
}

const SparseVec& HashedNgramEncoder::encode_action(
    const std::string& action_text) const {
  auto it = action_cache_.find(action_text);
  if (it != action_cache_.end()) return it->second;
  SparseVec v;
  hash_channel(action_text, 0, v);
  accumulate(v);
  return action_cache_.emplace(action_text, std::move(v)).first->second;
}

}  // namespace ak
