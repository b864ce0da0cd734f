#pragma once

// Goal-conditioned action scorer: hashed text features into a one-hidden-layer
// ReLU scorer, TD learning with smooth-L1 loss and normalized-entropy
// regularization. Weight columns are stored sparsely by feature index.

#include <cstdint>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include "autokitchen/encoder.hpp"

namespace ak {

struct LossBreakdown {
  double td_term = 0.0;
  double entropy_term = 0.0;
  double total = 0.0;
  size_t batch_size = 0;
  bool applied = true;  // false when a non-finite loss aborted the step
};

struct QHyperParams {
  double gamma = 0.9;
  double lambda_h = -0.01;  // negative: entropy bonus
  double learning_rate = 0.01;
  double grad_clip = 5.0;
};

class QModel {
 public:
  // init_scale 0 gives the all-zero model (every score 0).
  QModel(int hidden, unsigned long long seed, double init_scale = 0.1);

  int hidden() const { return hidden_; }

  std::vector<double> state_hidden(const SparseVec& xs) const;
  double score(const std::vector<double>& state_hidden,
               const SparseVec& xa) const;

  void save(const std::string& path, int encoder_bits) const;
  // Returns the encoder region bits stored alongside the parameters.
  static QModel load(const std::string& path, int* encoder_bits);

  bool finite() const;
  bool operator==(const QModel& o) const;

  // Parameter storage, exposed for the update path and the finite-difference
  // tests.
  std::unordered_map<uint32_t, std::vector<double>> ws, wa;
  std::vector<double> b1, w2;
  double b2 = 0.0;

 private:
  int hidden_;
};

// Memo of the action-side hidden contribution Wa * xa, keyed by action
// surface text. Valid only while the model parameters stay fixed; callers
// that mutate the model must clear() it before scoring again.
struct ActionHiddenCache {
  std::unordered_map<std::string, std::vector<double>> av;

  const std::vector<double>& get(const QModel& model, const TextEncoder& enc,
                                 const std::string& action);
  void clear() { av.clear(); }
};

// Scores for every candidate action, in input order. The OpenMP kernel and
// the serial reference compute identical values. An optional cache reuses
// Wa * xa across calls made under the same parameters.
std::vector<double> q_values(const QModel& model, const TextEncoder& enc,
                             const std::string& obs, const std::string& look,
                             const std::string& inv, const std::string& goal,
                             const std::vector<std::string>& candidates,
                             ActionHiddenCache* cache = nullptr);
std::vector<double> q_values_serial(const QModel& model, const TextEncoder& enc,
                                    const std::string& obs,
                                    const std::string& look,
                                    const std::string& inv,
                                    const std::string& goal,
                                    const std::vector<std::string>& candidates,
                                    ActionHiddenCache* cache = nullptr);

enum class SelectMode { Train, Eval };

// Train: sample from softmax(scores). Eval: argmax, lowest index wins ties.
size_t select_action(const std::vector<double>& scores, SelectMode mode,
                     std::mt19937_64& rng);

double smooth_l1(double x, double y);

// Shannon entropy of softmax(scores) / log(n); 0 when n == 1.
double normalized_entropy(const std::vector<double>& scores);

std::vector<double> softmax(const std::vector<double>& scores);

struct BatchItem {
  std::string obs, look, inv, goal;
  std::vector<std::string> candidates;  // A_t surface texts
  size_t action_index = 0;              // chosen action within candidates
  int reward = 0;
  bool terminal = false;
  std::string next_obs, next_look, next_inv;
  std::vector<std::string> next_candidates;  // A_{t+1}
};

struct GradBuf {
  std::unordered_map<uint32_t, std::vector<double>> gws, gwa;
  std::vector<double> gb1, gw2;
  double gb2 = 0.0;
};

// Bootstrap targets r + gamma * max_a' Q(s', a'), constants thereafter.
std::vector<double> compute_targets(const QModel& model, const TextEncoder& enc,
                                    const std::vector<BatchItem>& batch,
                                    double gamma,
                                    ActionHiddenCache* cache = nullptr);

LossBreakdown compute_loss(const QModel& model, const TextEncoder& enc,
                           const std::vector<BatchItem>& batch,
                           const std::vector<double>& targets, double lambda_h,
                           ActionHiddenCache* cache = nullptr);

LossBreakdown compute_grad(const QModel& model, const TextEncoder& enc,
                           const std::vector<BatchItem>& batch,
                           const std::vector<double>& targets, double lambda_h,
                           GradBuf& grad, ActionHiddenCache* cache = nullptr);

// One gradient step on the mean batch loss; returns the pre-step losses.
// A non-finite loss aborts the step and leaves the parameters unchanged.
// When a cache is passed it is reused while the parameters are fixed and
// cleared automatically once the step is applied.
LossBreakdown update(QModel& model, const TextEncoder& enc,
                     const std::vector<BatchItem>& batch,
                     const QHyperParams& hp,
                     ActionHiddenCache* cache = nullptr);

}  // namespace ak
