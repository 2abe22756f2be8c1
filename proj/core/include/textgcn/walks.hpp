#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "textgcn/matrix.hpp"
#include "textgcn/rng.hpp"
#include "textgcn/sparse.hpp"

namespace textgcn {

struct WalkConfig {
  int walks_per_node = 10;
  int walk_length = 40;
  double p = 1.0;  // return parameter
  double q = 1.0;  // in-out parameter
  int sg_window = 5;
  int dim = 200;
  int negatives = 5;
  int epochs = 5;
  std::uint64_t seed = 1;
  double lr_start = 0.025;
  double lr_end = 1e-4;
  std::size_t alias_cache_capacity = 1 << 16;  // second-order LRU entries

  void validate() const;
};

struct WalkCorpus {
  std::vector<std::vector<std::uint32_t>> walks;
  std::string source_graph;  // provenance label, e.g. the graph file path
};

// Unnormalized second-order weight toward x given the previous node t and
// current node v:  A_vx/p if x == t, A_vx if x ~ t, A_vx/q otherwise.
// With no previous node (first step) the weight is A_vx. The returned pairs
// cover the neighbors of `current` and their probabilities sum to 1.
std::vector<std::pair<std::size_t, double>> transition_distribution(
    const SparseMatrix& adjacency, std::optional<std::size_t> prev,
    std::size_t current, double p, double q);

// walks_per_node truncated walks of walk_length nodes from every node.
// Per-(node, round) rng streams make the output independent of the thread
// count. Requires every node to have at least one edge (self-loops count).
WalkCorpus generate_walks(const SparseMatrix& adjacency, const WalkConfig& cfg,
                          int n_threads = 1);

// Skip-gram with negative sampling over walk windows. Negatives are drawn
// from the unigram^{3/4} node distribution of the walk corpus; the learning
// rate decays linearly from lr_start to lr_end over all planned updates.
// Returns the input-side vectors; nodes absent from the walks keep their
// initialization.
//
// n_threads = 1 (the default) is fully deterministic. n_threads > 1 opts
// into lock-free parallel SGD over walk shards: updates race by design and
// the result is NOT reproducible across runs.
struct SgnsResult {
  Matrix embeddings;                 // n_nodes x dim
  std::vector<double> epoch_losses;  // mean logistic loss per epoch
};

SgnsResult sgns_train(const WalkCorpus& walks, const WalkConfig& cfg,
                      std::size_t n_nodes, int n_threads = 1);

// Deterministic per-node initialization: U(-0.5,0.5)/dim from the stream
// (seed, node).
Matrix sgns_initial_embeddings(std::size_t n_nodes, const WalkConfig& cfg);

}  // namespace textgcn
