#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "textgcn/corpus.hpp"
#include "textgcn/embedding.hpp"
#include "textgcn/sparse.hpp"

namespace textgcn {

// Sliding-window co-occurrence statistics over word indices.
// Windows are contiguous token spans of length min(window_size, sentence
// length), slid by one position, never crossing sentence boundaries. A
// window counts once per contained word / word pair (set semantics).
struct CooccurrenceTable {
  int window_size = 3;
  std::uint64_t total_windows = 0;                    // #W
  std::vector<std::uint64_t> word_window_counts;      // #W(i)
  std::unordered_map<std::uint64_t, std::uint64_t> pair_window_counts;  // i<j

  static std::uint64_t pair_key(std::size_t i, std::size_t j) {
    return (static_cast<std::uint64_t>(i) << 32) | static_cast<std::uint64_t>(j);
  }
  std::uint64_t pair_count(std::size_t i, std::size_t j) const;
};

CooccurrenceTable count_cooccurrence(const LabeledCorpus& corpus,
                                     const Vocabulary& vocab, int window_size,
                                     int n_threads = 1);

// PMI(i,j) = ln(#W(i,j)*#W / (#W(i)*#W(j))); only strictly positive weights
// are kept, stored in both orientations.
SparseMatrix pmi_edges(const CooccurrenceTable& table, std::size_t vocab_size);

// weight(i,j) = tf(i,j) * ln(M / df(i)); zero weights omitted.
// Rectangular: rows are words, columns are sentences.
SparseMatrix tfidf_edges(const LabeledCorpus& corpus, const Vocabulary& vocab);

enum class GraphKind { W, S, WS };

const char* graph_kind_name(GraphKind k);
std::optional<GraphKind> graph_kind_from_name(std::string_view name);

enum class NormalizeMode { SymRenorm, Raw };

// sym_renorm: D^{-1/2} A D^{-1/2} with D = diag(row sums). Requires every
// row sum positive (guaranteed once self-loops are present).
SparseMatrix normalize_adjacency(const SparseMatrix& a, NormalizeMode mode);

struct TextGraph {
  GraphKind kind = GraphKind::W;
  SparseMatrix adjacency;   // raw, symmetric, self-loops on the diagonal
  SparseMatrix normalized;  // propagation matrix per NormalizeMode
  std::size_t n_words = 0;
  std::size_t n_sentences = 0;

  std::size_t n_nodes() const { return adjacency.n_rows(); }
  bool has_word_nodes() const { return kind != GraphKind::S; }
  bool has_sentence_nodes() const { return kind != GraphKind::W; }
  // Graph row of a sentence node: words occupy [0, n_words) in a WS graph.
  std::size_t sentence_row(std::size_t sentence_id) const;
  std::size_t word_row(std::size_t word_index) const { return word_index; }
};

TextGraph build_word_graph(const LabeledCorpus& corpus, const Vocabulary& vocab,
                           int window_size,
                           NormalizeMode mode = NormalizeMode::SymRenorm,
                           int n_threads = 1);

// Sentence vectors are means of token vectors from `word_vectors` (missing
// tokens contribute zero vectors); each sentence keeps its k most cosine-
// similar neighbors with similarity > 0, the edge set is symmetrized by
// union, and unit self-loops are added.
TextGraph build_sentence_graph(const LabeledCorpus& corpus,
                               const EmbeddingTable& word_vectors,
                               int k_neighbors,
                               NormalizeMode mode = NormalizeMode::SymRenorm);

TextGraph build_ws_graph(const LabeledCorpus& corpus, const Vocabulary& vocab,
                         int window_size,
                         NormalizeMode mode = NormalizeMode::SymRenorm,
                         int n_threads = 1);

// Re-attaches kind/node-map metadata and recomputes the propagation matrix
// for an adjacency loaded from a tg1 file.
TextGraph attach_graph(GraphKind kind, SparseMatrix adjacency,
                       std::size_t n_words, std::size_t n_sentences,
                       NormalizeMode mode);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

}  // namespace textgcn
