#include "autokitchen/qmodel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace ak {

QModel::QModel(int hidden, unsigned long long seed, double init_scale)
    : b1(hidden, 0.0), w2(hidden, 0.0), hidden_(hidden) {
  if (init_scale > 0.0) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-init_scale, init_scale);
    for (auto& v : b1) v = u(rng);
    for (auto& v : w2) v = u(rng);
  }
}

std::vector<double> QModel::state_hidden(const SparseVec& xs) const {
  std::vector<double> z = b1;
  for (const auto& [idx, val] : xs) {
    auto it = ws.find(idx);
    if (it == ws.end()) continue;
    const auto& col = it->second;
    for (int h = 0; h < hidden_; ++h) z[h] += val * col[h];
  }
  return z;
}

double QModel::score(const std::vector<double>& state_hidden,
                     const SparseVec& xa) const {
  // z = state_hidden + Wa * xa, then q = w2 . relu(z) + b2
  double q = b2;
  std::vector<double> z = state_hidden;
  for (const auto& [idx, val] : xa) {
    auto it = wa.find(idx);
    if (it == wa.end()) continue;
    const auto& col = it->second;
    for (int h = 0; h < hidden_; ++h) z[h] += val * col[h];
  }
  for (int h = 0; h < hidden_; ++h)
    if (z[h] > 0.0) q += w2[h] * z[h];
  return q;
}

bool QModel::finite() const {
  auto ok = [](double v) { return std::isfinite(v); };
  if (!ok(b2)) return false;
  for (double v : b1)
    if (!ok(v)) return false;
  for (double v : w2)
    if (!ok(v)) return false;
  for (const auto& [i, col] : ws)
    for (double v : col)
      if (!ok(v)) return false;
  for (const auto& [i, col] : wa)
    for (double v : col)
      if (!ok(v)) return false;
  return true;
}

bool QModel::operator==(const QModel& o) const {
  return hidden_ == o.hidden_ && b1 == o.b1 && w2 == o.w2 && b2 == o.b2 &&
         ws == o.ws && wa == o.wa;
}

// --- Checkpoint format ------------------------------------------------------

namespace {

constexpr char kMagic[4] = {'A', 'K', 'Q', '1'};

template <typename T>
void put(std::ostream& out, const T& v) {
  out.write(reinterpret_cast<const char*>(&v), sizeof(v));
}

template <typename T>
void get(std::istream& in, T& v) {
  in.read(reinterpret_cast<char*>(&v), sizeof(v));
}

void put_map(std::ostream& out,
             const std::unordered_map<uint32_t, std::vector<double>>& m,
             int hidden) {
  // sorted for byte-stable output
  std::vector<uint32_t> keys;
  keys.reserve(m.size());
  for (const auto& [k, v] : m) keys.push_back(k);
  std::sort(keys.begin(), keys.end());
  put(out, static_cast<uint64_t>(keys.size()));
  for (uint32_t k : keys) {
    put(out, k);
    const auto& col = m.at(k);
    out.write(reinterpret_cast<const char*>(col.data()),
              hidden * sizeof(double));
  }
}

void get_map(std::istream& in,
             std::unordered_map<uint32_t, std::vector<double>>& m, int hidden) {
  uint64_t n = 0;
  get(in, n);
  for (uint64_t i = 0; i < n; ++i) {
    uint32_t k = 0;
    get(in, k);
    std::vector<double> col(hidden);
    in.read(reinterpret_cast<char*>(col.data()), hidden * sizeof(double));
    m[k] = std::move(col);
  }
}

}  // namespace

void QModel::save(const std::string& path, int encoder_bits) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write checkpoint: " + path);
  out.write(kMagic, 4);
  put(out, static_cast<int32_t>(encoder_bits));
  put(out, static_cast<int32_t>(hidden_));
  put(out, b2);
  out.write(reinterpret_cast<const char*>(b1.data()), hidden_ * sizeof(double));
  out.write(reinterpret_cast<const char*>(w2.data()), hidden_ * sizeof(double));
  put_map(out, ws, hidden_);
  put_map(out, wa, hidden_);
}

QModel QModel::load(const std::string& path, int* encoder_bits) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read checkpoint: " + path);
  char magic[4];
  in.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("bad checkpoint magic in " + path);
  int32_t bits = 0, hidden = 0;
  get(in, bits);
  get(in, hidden);
  QModel m(hidden, 0, 0.0);
  get(in, m.b2);
  in.read(reinterpret_cast<char*>(m.b1.data()), hidden * sizeof(double));
  in.read(reinterpret_cast<char*>(m.w2.data()), hidden * sizeof(double));
  get_map(in, m.ws, hidden);
  get_map(in, m.wa, hidden);
  if (!in) throw std::runtime_error("truncated checkpoint: " + path);
  if (encoder_bits) *encoder_bits = bits;
  return m;
}

// --- Scoring ----------------------------------------------------------------

namespace {

std::vector<double> q_values_impl(const QModel& model, const TextEncoder& enc,
                                  const std::string& obs,
                                  const std::string& look,
                                  const std::string& inv,
                                  const std::string& goal,
                                  const std::vector<std::string>& candidates,
                                  bool parallel, ActionHiddenCache* cache) {
  const SparseVec& xs = enc.encode_state(obs, look, inv, goal);
  const std::vector<double> hs = model.state_hidden(xs);
  const long n = static_cast<long>(candidates.size());
  const int H = model.hidden();
  // Resolve Wa * xa serially: the encoder memoizes and the cache mutates.
  ActionHiddenCache local;
  ActionHiddenCache& ac = cache ? *cache : local;
  std::vector<const std::vector<double>*> av(candidates.size());
  for (long i = 0; i < n; ++i) av[i] = &ac.get(model, enc, candidates[i]);
  std::vector<double> scores(candidates.size());
#pragma omp parallel for schedule(static) if (parallel && n > 32)
  for (long i = 0; i < n; ++i) {
    const std::vector<double>& a = *av[i];
    double q = model.b2;
    for (int h = 0; h < H; ++h) {
      double z = hs[h] + a[h];
      if (z > 0.0) q += model.w2[h] * z;
    }
    scores[i] = q;
  }
  return scores;
}

}  // namespace

const std::vector<double>& ActionHiddenCache::get(const QModel& model,
                                                  const TextEncoder& enc,
                                                  const std::string& action) {
  auto it = av.find(action);
  if (it != av.end()) return it->second;
  const int H = model.hidden();
  std::vector<double> v(H, 0.0);
  for (const auto& [idx, val] : enc.encode_action(action)) {
    auto w = model.wa.find(idx);
    if (w == model.wa.end()) continue;
    for (int h = 0; h < H; ++h) v[h] += val * w->second[h];
  }
  return av.emplace(action, std::move(v)).first->second;
}

std::vector<double> q_values(const QModel& model, const TextEncoder& enc,
                             const std::string& obs, const std::string& look,
                             const std::string& inv, const std::string& goal,
                             const std::vector<std::string>& candidates,
                             ActionHiddenCache* cache) {
  return q_values_impl(model, enc, obs, look, inv, goal, candidates, true,
                       cache);
}

std::vector<double> q_values_serial(const QModel& model, const TextEncoder& enc,
                                    const std::string& obs,
                                    const std::string& look,
                                    const std::string& inv,
                                    const std::string& goal,
                                    const std::vector<std::string>& candidates,
                                    ActionHiddenCache* cache) {
  return q_values_impl(model, enc, obs, look, inv, goal, candidates, false,
                       cache);
}

std::vector<double> softmax(const std::vector<double>& scores) {
  double mx = *std::max_element(scores.begin(), scores.end());
  std::vector<double> p(scores.size());
  double sum = 0.0;
  for (size_t i = 0; i < scores.size(); ++i) {
    p[i] = std::exp(scores[i] - mx);
    sum += p[i];
  }
  for (auto& v : p) v /= sum;
  return p;
}

size_t select_action(const std::vector<double>& scores, SelectMode mode,
                     std::mt19937_64& rng) {
  if (scores.empty()) throw std::invalid_argument("select_action: no scores");
  if (mode == SelectMode::Eval) {
    size_t best = 0;
    for (size_t i = 1; i < scores.size(); ++i)
      if (scores[i] > scores[best]) best = i;
    return best;
  }
  auto p = softmax(scores);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double x = u(rng);
  double acc = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    if (x < acc) return i;
  }
  return p.size() - 1;
}

double smooth_l1(double x, double y) {
  double d = std::abs(x - y);
  if (d > 1.0) return d - 0.5;
  return 0.5 * d * d;
}

double normalized_entropy(const std::vector<double>& scores) {
  if (scores.size() <= 1) return 0.0;
  auto p = softmax(scores);
  double h = 0.0;
  for (double v : p)
    if (v > 0.0) h -= v * std::log(v);
  return h / std::log(static_cast<double>(p.size()));
}

// --- Learning ---------------------------------------------------------------

std::vector<double> compute_targets(const QModel& model, const TextEncoder& enc,
                                    const std::vector<BatchItem>& batch,
                                    double gamma, ActionHiddenCache* cache) {
  std::vector<double> targets(batch.size());
  ActionHiddenCache local;
  ActionHiddenCache* acache = cache ? cache : &local;
  for (size_t i = 0; i < batch.size(); ++i) {
    const BatchItem& it = batch[i];
    double boot = 0.0;
    if (!it.terminal && !it.next_candidates.empty()) {
      auto qs = q_values(model, enc, it.next_obs, it.next_look, it.next_inv,
                         it.goal, it.next_candidates, acache);
      boot = *std::max_element(qs.begin(), qs.end());
    }
    targets[i] = it.reward + gamma * boot;
  }
  return targets;
}

namespace {

double huber_grad(double d) {
  if (d > 1.0) return 1.0;
  if (d < -1.0) return -1.0;
  return d;
}

struct ForwardCache {
  SparseVec xs;
  std::vector<std::vector<double>> z;  // pre-activation per candidate
  std::vector<double> q;
};

ForwardCache forward_item(const QModel& model, const TextEncoder& enc,
                          const BatchItem& it, ActionHiddenCache& acache) {
  ForwardCache c;
  c.xs = enc.encode_state(it.obs, it.look, it.inv, it.goal);
  std::vector<double> hs = model.state_hidden(c.xs);
  const int H = model.hidden();
  c.z.reserve(it.candidates.size());
  c.q.reserve(it.candidates.size());
  for (const auto& a : it.candidates) {
    const std::vector<double>& av = acache.get(model, enc, a);
    std::vector<double> z = hs;
    for (int h = 0; h < H; ++h) z[h] += av[h];
    double q = model.b2;
    for (int h = 0; h < H; ++h)
      if (z[h] > 0.0) q += model.w2[h] * z[h];
    c.z.push_back(std::move(z));
    c.q.push_back(q);
  }
  return c;
}

struct ItemLoss {
  double td = 0.0;
  double ent = 0.0;
  std::vector<double> dq;  // dLoss/dq per candidate (per-item, unnormalized)
};

ItemLoss item_loss(const ForwardCache& c, const BatchItem& it, double target,
                   double lambda_h, bool want_grad) {
  ItemLoss out;
  const size_t K = c.q.size();
  out.dq.assign(want_grad ? K : 0, 0.0);
  out.td = smooth_l1(c.q[it.action_index], target);
  if (want_grad) out.dq[it.action_index] += huber_grad(c.q[it.action_index] - target);
  if (K > 1) {
    auto p = softmax(c.q);
    double h = 0.0;
    for (double v : p)
      if (v > 0.0) h -= v * std::log(v);
    double logk = std::log(static_cast<double>(K));
    out.ent = h / logk;
    if (want_grad) {
      for (size_t j = 0; j < K; ++j) {
        double dnorm = p[j] > 0.0 ? -p[j] * (std::log(p[j]) + h) / logk : 0.0;
        out.dq[j] += lambda_h * dnorm;
      }
    }
  }
  return out;
}

// Accumulates dLoss/dz per unique action text; scattered into the sparse
// action-weight gradient once per update.
using ActionGradAcc = std::unordered_map<std::string, std::vector<double>>;

void backprop_item(const QModel& model, const ForwardCache& c,
                   const BatchItem& it, const std::vector<double>& dq,
                   GradBuf& g, ActionGradAcc& ga) {
  const int H = model.hidden();
  std::vector<double> dstate(H, 0.0);
  std::vector<double> dz(H);
  for (size_t j = 0; j < c.q.size(); ++j) {
    double cj = dq[j];
    if (cj == 0.0) continue;
    g.gb2 += cj;
    const auto& z = c.z[j];
    bool any = false;
    for (int h = 0; h < H; ++h) {
      if (z[h] > 0.0) {
        g.gw2[h] += cj * z[h];
        double d = cj * model.w2[h];
        g.gb1[h] += d;
        dstate[h] += d;
        dz[h] = d;
        any = d != 0.0 || any;
      } else {
        dz[h] = 0.0;
      }
    }
    if (!any) continue;
    auto& acc = ga[it.candidates[j]];
    if (acc.empty()) acc.assign(H, 0.0);
    for (int h = 0; h < H; ++h) acc[h] += dz[h];
  }
  for (const auto& [idx, val] : c.xs) {
    bool any = false;
    for (int h = 0; h < H; ++h)
      if (dstate[h] != 0.0) {
        any = true;
        break;
      }
    if (!any) break;
    auto& col = g.gws[idx];
    if (col.empty()) col.assign(H, 0.0);
    for (int h = 0; h < H; ++h) col[h] += dstate[h] * val;
  }
}

}  // namespace

LossBreakdown compute_loss(const QModel& model, const TextEncoder& enc,
                           const std::vector<BatchItem>& batch,
                           const std::vector<double>& targets, double lambda_h,
                           ActionHiddenCache* cache) {
  LossBreakdown lb;
  lb.batch_size = batch.size();
  ActionHiddenCache local;
  ActionHiddenCache& acache = cache ? *cache : local;
  for (size_t i = 0; i < batch.size(); ++i) {
    auto c = forward_item(model, enc, batch[i], acache);
    auto il = item_loss(c, batch[i], targets[i], lambda_h, false);
    lb.td_term += il.td;
    lb.entropy_term += il.ent;
  }
  lb.td_term /= batch.size();
  lb.entropy_term /= batch.size();
  lb.total = lb.td_term + lambda_h * lb.entropy_term;
  return lb;
}

LossBreakdown compute_grad(const QModel& model, const TextEncoder& enc,
                           const std::vector<BatchItem>& batch,
                           const std::vector<double>& targets, double lambda_h,
                           GradBuf& grad, ActionHiddenCache* cache) {
  const int H = model.hidden();
  grad.gb1.assign(H, 0.0);
  grad.gw2.assign(H, 0.0);
  grad.gb2 = 0.0;
  grad.gws.clear();
  grad.gwa.clear();

  LossBreakdown lb;
  lb.batch_size = batch.size();
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  ActionHiddenCache local;
  ActionHiddenCache& acache = cache ? *cache : local;
  ActionGradAcc ga;
  for (size_t i = 0; i < batch.size(); ++i) {
    auto c = forward_item(model, enc, batch[i], acache);
    auto il = item_loss(c, batch[i], targets[i], lambda_h, true);
    lb.td_term += il.td;
    lb.entropy_term += il.ent;
    for (auto& v : il.dq) v *= inv_n;
    backprop_item(model, c, batch[i], il.dq, grad, ga);
  }
  // Scatter the per-action-text dz sums into the sparse feature gradient.
  for (const auto& [action, dz] : ga) {
    for (const auto& [idx, val] : enc.encode_action(action)) {
      auto& col = grad.gwa[idx];
      if (col.empty()) col.assign(H, 0.0);
      for (int h = 0; h < H; ++h) col[h] += dz[h] * val;
    }
  }
  lb.td_term *= inv_n;
  lb.entropy_term *= inv_n;
  lb.total = lb.td_term + lambda_h * lb.entropy_term;
  return lb;
}

LossBreakdown update(QModel& model, const TextEncoder& enc,
                     const std::vector<BatchItem>& batch,
                     const QHyperParams& hp, ActionHiddenCache* cache) {
  if (batch.empty()) return LossBreakdown{};
  auto targets = compute_targets(model, enc, batch, hp.gamma, cache);
  GradBuf g;
  LossBreakdown lb =
      compute_grad(model, enc, batch, targets, hp.lambda_h, g, cache);
  if (!std::isfinite(lb.total)) {
    std::fprintf(stderr,
                 "qmodel: non-finite loss (td=%g ent=%g), step skipped\n",
                 lb.td_term, lb.entropy_term);
    lb.applied = false;
    return lb;
  }

  double sq = g.gb2 * g.gb2;
  for (double v : g.gb1) sq += v * v;
  for (double v : g.gw2) sq += v * v;
  for (const auto& [i, col] : g.gws)
    for (double v : col) sq += v * v;
  for (const auto& [i, col] : g.gwa)
    for (double v : col) sq += v * v;
  double norm = std::sqrt(sq);
  double scale = 1.0;
  if (hp.grad_clip > 0.0 && norm > hp.grad_clip) scale = hp.grad_clip / norm;
  const double lr = hp.learning_rate * scale;

  const int H = model.hidden();
  model.b2 -= lr * g.gb2;
  for (int h = 0; h < H; ++h) {
    model.b1[h] -= lr * g.gb1[h];
    model.w2[h] -= lr * g.gw2[h];
  }
  for (const auto& [idx, col] : g.gws) {
    auto& mcol = model.ws[idx];
    if (mcol.empty()) mcol.assign(H, 0.0);
    for (int h = 0; h < H; ++h) mcol[h] -= lr * col[h];
  }
  for (const auto& [idx, col] : g.gwa) {
    auto& mcol = model.wa[idx];
    if (mcol.empty()) mcol.assign(H, 0.0);
    for (int h = 0; h < H; ++h) mcol[h] -= lr * col[h];
  }
  if (cache) cache->clear();  // parameters changed; memoized Wa*xa is stale
  return lb;
}

}  // namespace ak
