#include <benchmark/benchmark.h>

#include "testutil.hpp"
#include "textgcn/gcn.hpp"
#include "textgcn/graph.hpp"
#include "textgcn/mtl.hpp"

using namespace textgcn;

namespace {

struct Setup {
  TextGraph graph;
  GcnModel model;
  std::vector<TaskSupervision> supervision;
  TrainConfig cfg;

  Setup(std::size_t n, std::size_t k, bool sampled) {
    Rng rng(3);
    const std::size_t n_words = n / 2;
    graph = attach_graph(GraphKind::WS, testutil::random_adjacency(rng, n, 0.02),
                         n_words, n - n_words, NormalizeMode::SymRenorm);
    cfg.embed_dim = k;
    cfg.dropout = 0.5;
    cfg.sampled_mse = sampled;
    model = GcnModel::init(n, k, DecoderMode::Gcn,
                           std::span<const Task>(kAllTasks), cfg.adam, 1);
    for (Task t : kAllTasks) {
      TaskSupervision sup;
      sup.task = t;
      for (std::size_t s = 0; s < graph.n_sentences; ++s) {
        if (rng.uniform01() < 0.7) {
          sup.rows.push_back(graph.sentence_row(s));
          sup.gold.push_back(static_cast<int>(
              rng.uniform_index(static_cast<std::size_t>(class_count(t)))));
        }
      }
      supervision.push_back(std::move(sup));
    }
  }
};

void bm_spmm(benchmark::State& state) {
  Rng rng(4);
  const SparseMatrix a =
      testutil::random_adjacency(rng, state.range(0), 0.01);
  Matrix x(state.range(0), 200);
  for (double& v : x.data) v = rng.uniform(-1, 1);
  for (auto _ : state) {
    Matrix y = a.multiply(x);
    benchmark::DoNotOptimize(y.data.data());
  }
}
BENCHMARK(bm_spmm)->Arg(1000)->Arg(4000)->Arg(16000)
    ->Unit(benchmark::kMillisecond);

void bm_train_epoch_dense(benchmark::State& state) {
  Setup s(state.range(0), 64, false);
  for (auto _ : state) {
    StepResult step =
        forward_backward(s.graph, s.model, s.supervision, s.cfg, true);
    adam_step(s.model, step.grads);
    benchmark::DoNotOptimize(step.l_total);
  }
}
BENCHMARK(bm_train_epoch_dense)->Arg(300)->Arg(1000)
    ->Unit(benchmark::kMillisecond);

void bm_train_epoch_sampled(benchmark::State& state) {
  Setup s(state.range(0), 64, true);
  for (auto _ : state) {
    CellSample cells = sample_cells(s.graph.normalized, s.model.train_rng);
    StepResult step =
        forward_backward(s.graph, s.model, s.supervision, s.cfg, true, &cells);
    adam_step(s.model, step.grads);
    benchmark::DoNotOptimize(step.l_total);
  }
}
BENCHMARK(bm_train_epoch_sampled)->Arg(1000)->Arg(4000)
    ->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
