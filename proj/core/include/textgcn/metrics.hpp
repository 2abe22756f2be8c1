#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "textgcn/embedding.hpp"

namespace textgcn {

struct ClassStats {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
  std::uint64_t support = 0;
};

struct F1Result {
  double macro_f1 = 0.0;     // unweighted mean over all classes
  double weighted_f1 = 0.0;  // support-weighted mean
  std::vector<ClassStats> per_class;
};

// Per-class F1 = 2PR/(P+R), defined as 0 when P+R = 0.
F1Result f1_scores(std::span<const int> gold, std::span<const int> pred,
                   int n_classes);

// Rows = gold, columns = predicted.
struct ConfusionMatrix {
  int n_classes = 0;
  std::vector<std::uint64_t> counts;  // row-major

  std::uint64_t at(int g, int p) const {
    return counts[static_cast<std::size_t>(g) * n_classes + p];
  }
  std::uint64_t total() const;
  std::uint64_t trace() const;
  // Row-normalized percentages (rows with zero support stay zero).
  std::vector<double> row_percent() const;
};

ConfusionMatrix confusion(std::span<const int> gold, std::span<const int> pred,
                          int n_classes);

std::size_t levenshtein(std::string_view a, std::string_view b);

// Top-k rows by cosine similarity to the query's row, query excluded, ties
// broken by row index. An unknown query raises a UsageError listing the
// closest keys by edit distance.
std::vector<std::pair<std::string, double>> nearest_neighbors(
    const EmbeddingTable& table, std::string_view query, std::size_t k);

}  // namespace textgcn
