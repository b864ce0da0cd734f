#pragma once

// Pluggable text encoders. The default is a feature-hashed bag of word
// 1/2-grams per channel, channels mapped to disjoint index regions.

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace ak {

// Sparse feature vector: (index, value) pairs, indices unique and sorted.
using SparseVec = std::vector<std::pair<uint32_t, float>>;

class TextEncoder {
 public:
  virtual ~TextEncoder() = default;
  // Returned references stay valid only until the next encode call on the
  // same channel (implementations may cache and evict).
  virtual const SparseVec& encode_state(const std::string& obs,
                                        const std::string& look,
                                        const std::string& inv,
                                        const std::string& goal) const = 0;
  virtual const SparseVec& encode_action(const std::string& action_text) const = 0;
  virtual uint32_t state_dim() const = 0;
  virtual uint32_t action_dim() const = 0;
};

std::vector<std::string> tokenize(const std::string& text);

class HashedNgramEncoder : public TextEncoder {
 public:
  explicit HashedNgramEncoder(int region_bits = 16) : bits_(region_bits) {}

  const SparseVec& encode_state(const std::string& obs, const std::string& look,
                                const std::string& inv,
                                const std::string& goal) const override;
  const SparseVec& encode_action(const std::string& action_text) const override;
  uint32_t state_dim() const override { return 4u << bits_; }
  uint32_t action_dim() const override { return 1u << bits_; }
  int region_bits() const { return bits_; }

 private:
  void hash_channel(const std::string& text, uint32_t region,
                    SparseVec& out) const;
  int bits_;

  // Memoization: the action vocabulary is tiny and states repeat heavily in
  // replay batches. Caches are an encoding-time optimization only; they never
  // change the produced vectors. Not safe for concurrent encode calls — the
  // parallel scoring kernel pre-encodes serially.
  static constexpr size_t kStateCacheCap = 30000;
  mutable std::unordered_map<std::string, SparseVec> action_cache_;
  mutable std::unordered_map<std::string, SparseVec> state_cache_;
};

}  // namespace ak
