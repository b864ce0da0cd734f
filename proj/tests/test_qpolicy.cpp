#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <random>

#include "autokitchen/qmodel.hpp"

using namespace ak;

namespace {

std::vector<BatchItem> small_batch() {
  std::vector<BatchItem> batch;
  BatchItem a;
  a.obs = "The sink is now activated.";
  a.look = "Kitchen look text with a sink and a stove";
  a.inv = "inventory with an orange";
  a.goal = "a substance called water";
  a.candidates = {"wait", "open freezer", "activate sink"};
  a.action_index = 2;
  a.reward = 1;
  a.terminal = false;
  a.next_obs = "You decide to wait.";
  a.next_look = "Kitchen look after";
  a.next_inv = "inventory with an orange";
  a.next_candidates = {"wait", "close drain"};
  batch.push_back(a);

  BatchItem b = a;
  b.goal = "a stove, which is turned on.";
  b.action_index = 0;
  b.reward = 0;
  b.candidates = {"wait", "pick up glass cup", "move orange to table",
                  "activate stove"};
  batch.push_back(b);

  BatchItem c = a;
  c.terminal = true;
  c.reward = 1;
  c.action_index = 1;
  batch.push_back(c);
  return batch;
}

// Grows sparse columns organically so finite differences have parameters to
// probe.
QModel warmed_model(const TextEncoder& enc, const std::vector<BatchItem>& batch) {
  QModel model(8, 123, 0.1);
  QHyperParams hp;
  for (int i = 0; i < 5; ++i) update(model, enc, batch, hp);
  REQUIRE(model.finite());
  REQUIRE_FALSE(model.ws.empty());
  REQUIRE_FALSE(model.wa.empty());
  return model;
}

}  // namespace

TEST_CASE("smooth-L1 unit values") {
  CHECK(smooth_l1(3.0, 3.0) == 0.0);
  CHECK(smooth_l1(0.0, 1.0) == 0.5);
  CHECK(smooth_l1(1.0, 0.0) == 0.5);
  CHECK(smooth_l1(4.0, 1.0) == 2.5);
  CHECK(smooth_l1(1.0, 4.0) == 2.5);
  CHECK(smooth_l1(0.5, 0.0) == doctest::Approx(0.125));
}

TEST_CASE("normalized entropy: range and extremes") {
  CHECK(normalized_entropy({1.0, 1.0, 1.0, 1.0}) == doctest::Approx(1.0));
  CHECK(normalized_entropy({0.3, 0.3}) == doctest::Approx(1.0));
  CHECK(normalized_entropy({5.0}) == 0.0);
  CHECK(normalized_entropy({}) == 0.0);
  CHECK(normalized_entropy({100.0, 0.0}) < 0.01);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (int i = 0; i < 100; ++i) {
    std::vector<double> s(2 + i % 7);
    for (auto& v : s) v = u(rng);
    double h = normalized_entropy(s);
    CHECK(h >= 0.0);
    CHECK(h <= 1.0 + 1e-12);
  }
}

TEST_CASE("softmax: normalization and shift invariance") {
  auto p = softmax({1.0, 2.0, 3.0});
  auto q = softmax({101.0, 102.0, 103.0});
  double sum = 0.0;
  for (size_t i = 0; i < p.size(); ++i) {
    sum += p[i];
    CHECK(p[i] == doctest::Approx(q[i]));
  }
  CHECK(sum == doctest::Approx(1.0));
}

TEST_CASE("select_action: eval argmax with lowest-index tie-break") {
  std::mt19937_64 rng(0);
  CHECK(select_action({1, 5, 2}, SelectMode::Eval, rng) == 1);
  CHECK(select_action({3, 3}, SelectMode::Eval, rng) == 0);
  CHECK(select_action({-1, -2, -1}, SelectMode::Eval, rng) == 0);
  CHECK_THROWS_AS(select_action({}, SelectMode::Eval, rng),
                  std::invalid_argument);
}

TEST_CASE("select_action: train sampling matches softmax within 0.03") {
  std::mt19937_64 rng(17);
  const int N = 10000;
  // softmax({0, ln 3}) = {0.25, 0.75}
  std::vector<double> scores{0.0, std::log(3.0)};
  int second = 0;
  for (int i = 0; i < N; ++i)
    second += select_action(scores, SelectMode::Train, rng) == 1;
  CHECK(std::abs(second / double(N) - 0.75) < 0.03);
}

TEST_CASE("zero-initialized model scores every action 0") {
  QModel model(16, 0, 0.0);
  HashedNgramEncoder enc(16);
  auto qs = q_values(model, enc, "o", "l", "i", "g", {"a", "b", "c"});
  for (double q : qs) CHECK(q == 0.0);
}

TEST_CASE("parallel and serial q-value kernels agree exactly") {
  HashedNgramEncoder enc(16);
  auto batch = small_batch();
  QModel model = warmed_model(enc, batch);
  std::vector<std::string> candidates;
  for (int i = 0; i < 80; ++i)
    candidates.push_back("move thing" + std::to_string(i) + " to place" +
                         std::to_string(i % 7));
  auto par = q_values(model, enc, "obs text", "look text here", "inv", "goal",
                      candidates);
  auto ser = q_values_serial(model, enc, "obs text", "look text here", "inv",
                             "goal", candidates);
  REQUIRE(par.size() == ser.size());
  for (size_t i = 0; i < par.size(); ++i) CHECK(par[i] == ser[i]);
}

TEST_CASE("compute_targets: terminal cuts bootstrap, gamma scales max") {
  HashedNgramEncoder enc(16);
  auto batch = small_batch();
  QModel model = warmed_model(enc, batch);
  auto targets = compute_targets(model, enc, batch, 0.9);
  REQUIRE(targets.size() == 3);
  // Terminal item: target is exactly the reward.
  CHECK(targets[2] == 1.0);
  // Non-terminal: r + 0.9 * max_a' Q.
  auto qs = q_values(model, enc, batch[0].next_obs, batch[0].next_look,
                     batch[0].next_inv, batch[0].goal, batch[0].next_candidates);
  CHECK(targets[0] ==
        doctest::Approx(1.0 + 0.9 * *std::max_element(qs.begin(), qs.end())));
}

TEST_CASE("gradient matches finite differences to 1e-4 relative error") {
  HashedNgramEncoder enc(16);
  auto batch = small_batch();
  QModel model = warmed_model(enc, batch);
  const double lambda_h = -0.01;
  auto targets = compute_targets(model, enc, batch, 0.9);

  GradBuf g;
  compute_grad(model, enc, batch, targets, lambda_h, g);

  const double eps = 1e-6;
  auto loss_at = [&](QModel& m) {
    return compute_loss(m, enc, batch, targets, lambda_h).total;
  };
  int checked = 0;
  auto fd_check = [&](double* param, double analytic) {
    double keep = *param;
    *param = keep + eps;
    double up = loss_at(model);
    *param = keep - eps;
    double down = loss_at(model);
    *param = keep;
    double numeric = (up - down) / (2.0 * eps);
    double denom = std::max({std::abs(numeric), std::abs(analytic), 1e-6});
    CHECK(std::abs(numeric - analytic) / denom < 1e-4);
    ++checked;
  };

  fd_check(&model.b2, g.gb2);
  for (int h = 0; h < model.hidden(); ++h) {
    fd_check(&model.b1[h], g.gb1[h]);
    fd_check(&model.w2[h], g.gw2[h]);
  }
  int budget = 40;  // sample of sparse columns keeps the test fast
  for (auto& [idx, col] : g.gws) {
    if (budget-- <= 0) break;
    auto& mcol = model.ws[idx];
    if (mcol.empty()) mcol.assign(model.hidden(), 0.0);
    for (int h = 0; h < model.hidden(); h += 3) fd_check(&mcol[h], col[h]);
  }
  budget = 40;
  for (auto& [idx, col] : g.gwa) {
    if (budget-- <= 0) break;
    auto& mcol = model.wa[idx];
    if (mcol.empty()) mcol.assign(model.hidden(), 0.0);
    for (int h = 0; h < model.hidden(); h += 3) fd_check(&mcol[h], col[h]);
  }
  CHECK(checked > 100);
}

TEST_CASE("repeated updates drive a terminal transition's TD below 1e-3") {
  HashedNgramEncoder enc(16);
  BatchItem it;
  it.obs = "obs";
  it.look = "some look";
  it.inv = "inv";
  it.goal = "goal text";
  it.candidates = {"wait", "open freezer"};
  it.action_index = 1;
  it.reward = 1;
  it.terminal = true;
  std::vector<BatchItem> batch{it};

  QModel model(32, 7, 0.1);
  QHyperParams hp;  // defaults: lr 0.01, gamma 0.9, lambda -0.01, clip 5
  double td = 1.0;
  int steps = 0;
  for (; steps < 500; ++steps) {
    auto lb = update(model, enc, batch, hp);
    REQUIRE(lb.applied);
    td = lb.td_term;
    if (td < 1e-3) break;
  }
  CHECK(td < 1e-3);
  CHECK(steps < 500);
}

TEST_CASE("update reports a breakdown and skips non-finite steps") {
  HashedNgramEncoder enc(16);
  auto batch = small_batch();
  QModel model(8, 1, 0.1);
  QHyperParams hp;
  auto lb = update(model, enc, batch, hp);
  CHECK(lb.applied);
  CHECK(lb.batch_size == batch.size());
  CHECK(lb.total == doctest::Approx(lb.td_term + hp.lambda_h * lb.entropy_term));

  // Poisoned parameters: step aborts, parameters unchanged.
  model.b2 = std::numeric_limits<double>::quiet_NaN();
  auto before_b1 = model.b1;
  auto lb2 = update(model, enc, batch, hp);
  CHECK_FALSE(lb2.applied);
  CHECK(model.b1 == before_b1);
}

TEST_CASE("checkpoint round-trip reproduces the model bit-exactly") {
  HashedNgramEncoder enc(16);
  auto batch = small_batch();
  QModel model = warmed_model(enc, batch);
  std::string path = "/tmp/ak_test_checkpoint.bin";
  model.save(path, 16);
  int bits = 0;
  QModel back = QModel::load(path, &bits);
  CHECK(bits == 16);
  CHECK(model == back);

  std::vector<std::string> candidates{"wait", "open freezer", "activate sink"};
  auto a = q_values(model, enc, "o", "l", "i", "g", candidates);
  auto b = q_values(back, enc, "o", "l", "i", "g", candidates);
  for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
  std::remove(path.c_str());
}

TEST_CASE("checkpoint load rejects wrong magic") {
  std::string path = "/tmp/ak_bad_checkpoint.bin";
  {
    std::FILE* f = std::fopen(path.c_str(), "wb");
    std::fputs("not a checkpoint", f);
    std::fclose(f);
  }
  int bits = 0;
  CHECK_THROWS_AS(QModel::load(path, &bits), std::runtime_error);
  std::remove(path.c_str());
}

TEST_CASE("entropy bonus spreads otherwise untied scores") {
  // With a pure entropy objective (no reward signal, lambda > 0 would
  // sharpen; negative lambda is a bonus that flattens the distribution).
  HashedNgramEncoder enc(16);
  BatchItem it;
  it.obs = "o";
  it.look = "l";
  it.inv = "i";
  it.goal = "g";
  it.candidates = {"wait", "open freezer", "activate sink"};
  it.action_index = 0;
  it.reward = 0;
  it.terminal = true;
  std::vector<BatchItem> batch{it};
  QModel model(8, 3, 0.1);
  QHyperParams hp;
  hp.lambda_h = -0.1;
  for (int i = 0; i < 200; ++i) update(model, enc, batch, hp);
  auto qs = q_values(model, enc, "o", "l", "i", "g", it.candidates);
  CHECK(normalized_entropy(qs) > 0.9);
}
