#pragma once

#include <filesystem>

#include "textgcn/gcn.hpp"
#include "textgcn/graph.hpp"
#include "textgcn/mtl.hpp"

namespace textgcn {

// Versioned binary container: graph binding, training configuration, model
// parameters, Adam state, and the training rng state. Write -> read
// round-trips are bit-exact (doubles stored as raw IEEE-754).
struct Checkpoint {
  GraphKind graph_kind = GraphKind::WS;
  std::size_t n_words = 0;
  std::size_t n_sentences = 0;
  NormalizeMode normalize = NormalizeMode::SymRenorm;
  int k_folds = 5;
  int fold_index = 0;
  double val_fraction = 0.10;
  TrainConfig config;
  GcnModel model;
};

void save_checkpoint(const Checkpoint& ckpt,
                     const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace textgcn
