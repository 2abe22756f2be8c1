#include <benchmark/benchmark.h>

#include "testutil.hpp"
#include "textgcn/corpus.hpp"
#include "textgcn/graph.hpp"

using namespace textgcn;

namespace {

LabeledCorpus make_corpus(std::size_t n_sentences, std::size_t vocab) {
  Rng rng(1);
  LabeledCorpus c = testutil::random_corpus(rng, n_sentences, vocab, 6, 18);
  return c;
}

void bm_count_cooccurrence(benchmark::State& state) {
  LabeledCorpus corpus = make_corpus(state.range(0), state.range(0) / 2);
  Vocabulary vocab = build_vocabulary(corpus, 1);
  for (auto _ : state) {
    auto table = count_cooccurrence(corpus, vocab, 3);
    benchmark::DoNotOptimize(table.total_windows);
  }
}
BENCHMARK(bm_count_cooccurrence)->Arg(500)->Arg(2000)->Arg(8000)
    ->Unit(benchmark::kMillisecond);

void bm_build_ws_graph(benchmark::State& state) {
  LabeledCorpus corpus = make_corpus(state.range(0), state.range(0) / 2);
  Vocabulary vocab = build_vocabulary(corpus, 1);
  for (auto _ : state) {
    TextGraph g = build_ws_graph(corpus, vocab, 3);
    benchmark::DoNotOptimize(g.adjacency.nnz());
  }
}
BENCHMARK(bm_build_ws_graph)->Arg(500)->Arg(2000)->Arg(8000)
    ->Unit(benchmark::kMillisecond);

void bm_normalize(benchmark::State& state) {
  Rng rng(2);
  const SparseMatrix a =
      testutil::random_adjacency(rng, state.range(0), 0.01);
  for (auto _ : state) {
    SparseMatrix n = normalize_adjacency(a, NormalizeMode::SymRenorm);
    benchmark::DoNotOptimize(n.nnz());
  }
}
BENCHMARK(bm_normalize)->Arg(1000)->Arg(4000)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
