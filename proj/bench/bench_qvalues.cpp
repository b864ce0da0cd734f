// Benchmarks the OpenMP q-value kernel against the serial reference on a
// realistic workload: the reset kitchen's full candidate list scored by a
// warmed model, with and without the shared action-hidden cache.

#include <benchmark/benchmark.h>

#include <random>
#include <string>
#include <vector>

#include "autokitchen/goals.hpp"
#include "autokitchen/qmodel.hpp"
#include "autokitchen/world.hpp"

namespace {

struct Workload {
  ak::HashedNgramEncoder enc{16};
  ak::QModel model{64, 7, 0.1};
  std::string obs, look, inv, goal;
  std::vector<std::string> candidates;

  Workload() {
    ak::Environment env(ak::default_kitchen());
    ak::Observation o = env.reset(0);
    obs = o.obs;
    look = o.look;
    inv = o.inv;
    goal = "a substance called water";
    for (const auto& a : env.valid_actions())
      candidates.push_back(a.surface_text);
    // Touch every feature once so the sparse columns exist and scoring does
    // real work instead of skipping absent features.
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-0.1, 0.1);
    auto touch = [&](const ak::SparseVec& v,
                     std::unordered_map<uint32_t, std::vector<double>>& w) {
      for (const auto& [idx, val] : v) {
        auto& col = w[idx];
        if (col.empty()) {
          col.resize(model.hidden());
          for (auto& x : col) x = u(rng);
        }
      }
    };
    touch(enc.encode_state(obs, look, inv, goal), model.ws);
    for (const auto& c : candidates) touch(enc.encode_action(c), model.wa);
  }
};

Workload& workload() {
  static Workload w;
  return w;
}

void bench_parallel(benchmark::State& state) {
  Workload& w = workload();
  for (auto _ : state) {
    auto qs = ak::q_values(w.model, w.enc, w.obs, w.look, w.inv, w.goal,
                           w.candidates);
    benchmark::DoNotOptimize(qs.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<int64_t>(w.candidates.size()));
}

void bench_serial(benchmark::State& state) {
  Workload& w = workload();
  for (auto _ : state) {
    auto qs = ak::q_values_serial(w.model, w.enc, w.obs, w.look, w.inv, w.goal,
                                  w.candidates);
    benchmark::DoNotOptimize(qs.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<int64_t>(w.candidates.size()));
}

void bench_parallel_cached(benchmark::State& state) {
  Workload& w = workload();
  ak::ActionHiddenCache cache;
  for (auto _ : state) {
    auto qs = ak::q_values(w.model, w.enc, w.obs, w.look, w.inv, w.goal,
                           w.candidates, &cache);
    benchmark::DoNotOptimize(qs.data());
  }
  state.SetItemsProcessed(state.iterations() *
                          static_cast<int64_t>(w.candidates.size()));
}

BENCHMARK(bench_parallel);
BENCHMARK(bench_serial);
BENCHMARK(bench_parallel_cached);

}  // namespace

BENCHMARK_MAIN();
