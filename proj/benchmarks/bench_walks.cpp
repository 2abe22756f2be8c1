#include <benchmark/benchmark.h>

#include "testutil.hpp"
#include "textgcn/walks.hpp"

using namespace textgcn;

namespace {

void bm_generate_walks(benchmark::State& state) {
  Rng rng(5);
  const SparseMatrix a =
      testutil::random_adjacency(rng, state.range(0), 0.02);
  WalkConfig cfg;
  cfg.walks_per_node = 5;
  cfg.walk_length = 40;
  cfg.q = 0.5;
  for (auto _ : state) {
    WalkCorpus walks = generate_walks(a, cfg);
    benchmark::DoNotOptimize(walks.walks.size());
  }
}
BENCHMARK(bm_generate_walks)->Arg(200)->Arg(1000)
    ->Unit(benchmark::kMillisecond);

void bm_sgns_epoch(benchmark::State& state) {
  Rng rng(6);
  const SparseMatrix a =
      testutil::random_adjacency(rng, state.range(0), 0.05);
  WalkConfig cfg;
  cfg.walks_per_node = 5;
  cfg.walk_length = 20;
  cfg.dim = 64;
  cfg.epochs = 1;
  const WalkCorpus walks = generate_walks(a, cfg);
  for (auto _ : state) {
    SgnsResult res = sgns_train(walks, cfg, state.range(0));
    benchmark::DoNotOptimize(res.embeddings.data.data());
  }
}
BENCHMARK(bm_sgns_epoch)->Arg(200)->Arg(500)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
