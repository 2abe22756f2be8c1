#include "textgcn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "textgcn/error.hpp"

namespace textgcn {

std::uint64_t CooccurrenceTable::pair_count(std::size_t i,
                                            std::size_t j) const {
  if (i == j) return 0;
  if (i > j) std::swap(i, j);
  auto it = pair_window_counts.find(pair_key(i, j));
  return it == pair_window_counts.end() ? 0 : it->second;
}

namespace {

void count_records(const LabeledCorpus& corpus, std::size_t begin,
                   std::size_t end, int window_size, CooccurrenceTable& out) {
  std::vector<std::size_t> uniq;
  for (std::size_t r = begin; r < end; ++r) {
    const auto& toks = corpus.records[r].tokens;
    const std::size_t len = toks.size();
    if (len == 0) continue;
    const std::size_t w =
        std::min<std::size_t>(static_cast<std::size_t>(window_size), len);
    const std::size_t n_windows = len - w + 1;
    out.total_windows += n_windows;
    for (std::size_t s = 0; s < n_windows; ++s) {
      uniq.assign(toks.begin() + s, toks.begin() + s + w);
      std::sort(uniq.begin(), uniq.end());
      uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
      for (std::size_t a = 0; a < uniq.size(); ++a) {
        ++out.word_window_counts[uniq[a]];
        for (std::size_t b = a + 1; b < uniq.size(); ++b)
          ++out.pair_window_counts[CooccurrenceTable::pair_key(uniq[a],
                                                               uniq[b])];
      }
    }
  }
}

}  // namespace

CooccurrenceTable count_cooccurrence(const LabeledCorpus& corpus,
                                     const Vocabulary& vocab, int window_size,
                                     int n_threads) {
  if (window_size < 1) throw UsageError("window size must be at least 1");
  CooccurrenceTable table;
  table.window_size = window_size;
  table.word_window_counts.assign(vocab.size(), 0);

  const std::size_t n = corpus.size();
  if (n_threads <= 1 || n < 64) {
    count_records(corpus, 0, n, window_size, table);
    return table;
  }

  // Shard sentences across workers; merging integer tallies by summation is
  // order-independent, so the result equals the single-threaded count.
  const std::size_t nt = static_cast<std::size_t>(n_threads);
  std::vector<CooccurrenceTable> parts(nt);
  std::vector<std::thread> pool;
  const std::size_t chunk = (n + nt - 1) / nt;
  for (std::size_t t = 0; t < nt; ++t) {
    parts[t].window_size = window_size;
    parts[t].word_window_counts.assign(vocab.size(), 0);
    const std::size_t b = std::min(t * chunk, n);
    const std::size_t e = std::min(b + chunk, n);
    if (b < e)
      pool.emplace_back(count_records, std::cref(corpus), b, e, window_size,
                        std::ref(parts[t]));
  }
  for (auto& th : pool) th.join();
  for (const CooccurrenceTable& p : parts) {
    table.total_windows += p.total_windows;
    for (std::size_t i = 0; i < vocab.size(); ++i)
      table.word_window_counts[i] += p.word_window_counts[i];
    for (const auto& [key, cnt] : p.pair_window_counts)
      table.pair_window_counts[key] += cnt;
  }
  return table;
}

SparseMatrix pmi_edges(const CooccurrenceTable& table,
                       std::size_t vocab_size) {
  if (table.total_windows < 1)
    throw std::logic_error("pmi_edges: no windows counted");

  std::vector<std::uint64_t> keys;
  keys.reserve(table.pair_window_counts.size());
  for (const auto& [key, cnt] : table.pair_window_counts) keys.push_back(key);
  std::sort(keys.begin(), keys.end());

  const double total = static_cast<double>(table.total_windows);
  std::vector<Triplet> entries;
  for (std::uint64_t key : keys) {
    const auto i = static_cast<std::size_t>(key >> 32);
    const auto j = static_cast<std::size_t>(key & 0xFFFFFFFFULL);
    const double cij = static_cast<double>(table.pair_window_counts.at(key));
    const double ci = static_cast<double>(table.word_window_counts[i]);
    const double cj = static_cast<double>(table.word_window_counts[j]);
    const double pmi = std::log((cij * total) / (ci * cj));
    if (pmi > 0.0) {
      entries.push_back({i, j, pmi});
      entries.push_back({j, i, pmi});
    }
  }
  return SparseMatrix::from_triplets(vocab_size, vocab_size,
                                     std::move(entries), true);
}

SparseMatrix tfidf_edges(const LabeledCorpus& corpus, const Vocabulary& vocab) {
  const std::size_t n_words = vocab.size();
  const std::size_t n_sents = corpus.size();

  std::vector<std::uint64_t> df(n_words, 0);
  std::vector<std::size_t> uniq;
  for (const SentenceRecord& rec : corpus.records) {
    uniq = rec.tokens;
    std::sort(uniq.begin(), uniq.end());
    uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
    for (std::size_t w : uniq) ++df[w];
  }

  std::vector<double> idf(n_words, 0.0);
  for (std::size_t w = 0; w < n_words; ++w)
    if (df[w] > 0)
      idf[w] = std::log(static_cast<double>(n_sents) /
                        static_cast<double>(df[w]));

  std::vector<Triplet> entries;
  std::unordered_map<std::size_t, std::uint64_t> tf;
  for (const SentenceRecord& rec : corpus.records) {
    tf.clear();
    for (std::size_t w : rec.tokens) ++tf[w];
    uniq.clear();
    for (const auto& [w, c] : tf) uniq.push_back(w);
    std::sort(uniq.begin(), uniq.end());
    for (std::size_t w : uniq) {
      const double weight = static_cast<double>(tf[w]) * idf[w];
      if (weight != 0.0) entries.push_back({w, rec.id, weight});
    }
  }
  return SparseMatrix::from_triplets(n_words, n_sents, std::move(entries),
                                     false);
}

const char* graph_kind_name(GraphKind k) {
  switch (k) {
    case GraphKind::W:
      return "w";
    case GraphKind::S:
      return "s";
    case GraphKind::WS:
      return "ws";
  }
  return "?";
}

std::optional<GraphKind> graph_kind_from_name(std::string_view name) {
  if (name == "w") return GraphKind::W;
  if (name == "s") return GraphKind::S;
  if (name == "ws" || name == "w+s") return GraphKind::WS;
  return std::nullopt;
}

SparseMatrix normalize_adjacency(const SparseMatrix& a, NormalizeMode mode) {
  if (mode == NormalizeMode::Raw) return a;
  if (a.n_rows() != a.n_cols())
    throw std::logic_error("normalize_adjacency: matrix must be square");

  const std::vector<double> degree = a.row_sums();
  std::vector<double> inv_sqrt(degree.size());
  for (std::size_t i = 0; i < degree.size(); ++i) {
    if (degree[i] <= 0.0)
      throw UsageError("normalize_adjacency: node " + std::to_string(i) +
                       " has non-positive degree " + std::to_string(degree[i]));
    inv_sqrt[i] = 1.0 / std::sqrt(degree[i]);
  }

  std::vector<Triplet> entries;
  entries.reserve(a.nnz());
  for (std::size_t r = 0; r < a.n_rows(); ++r) {
    auto cols = a.row_cols(r);
    auto vals = a.row_values(r);
    // The scale factor is grouped so both orientations of an edge multiply
    // by the exact same double, keeping the result bitwise symmetric.
    for (std::size_t k = 0; k < cols.size(); ++k)
      entries.push_back(
          {r, cols[k], vals[k] * (inv_sqrt[r] * inv_sqrt[cols[k]])});
  }
  return SparseMatrix::from_triplets(a.n_rows(), a.n_cols(), std::move(entries),
                                     a.symmetric());
}

std::size_t TextGraph::sentence_row(std::size_t sentence_id) const {
  if (!has_sentence_nodes())
    throw std::logic_error("word graph has no sentence nodes");
  return (kind == GraphKind::WS ? n_words : 0) + sentence_id;
}

TextGraph build_word_graph(const LabeledCorpus& corpus,
                           const Vocabulary& vocab, int window_size,
                           NormalizeMode mode, int n_threads) {
  const CooccurrenceTable table =
      count_cooccurrence(corpus, vocab, window_size, n_threads);
  const SparseMatrix pmi = pmi_edges(table, vocab.size());

  std::vector<Triplet> entries;
  entries.reserve(pmi.nnz() + vocab.size());
  for (std::size_t r = 0; r < pmi.n_rows(); ++r) {
    auto cols = pmi.row_cols(r);
    auto vals = pmi.row_values(r);
    for (std::size_t k = 0; k < cols.size(); ++k)
      entries.push_back({r, cols[k], vals[k]});
  }
  for (std::size_t i = 0; i < vocab.size(); ++i) entries.push_back({i, i, 1.0});

  TextGraph g;
  g.kind = GraphKind::W;
  g.n_words = vocab.size();
  g.n_sentences = 0;
  g.adjacency = SparseMatrix::from_triplets(vocab.size(), vocab.size(),
                                            std::move(entries), true);
  g.normalized = normalize_adjacency(g.adjacency, mode);
  return g;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

TextGraph build_sentence_graph(const LabeledCorpus& corpus,
                               const EmbeddingTable& word_vectors,
                               int k_neighbors, NormalizeMode mode) {
  if (k_neighbors < 1) throw UsageError("k_neighbors must be at least 1");
  const std::size_t m = corpus.size();
  const std::size_t dim = word_vectors.dim();

  Matrix sent(m, dim);
  for (std::size_t s = 0; s < m; ++s) {
    const auto& toks = corpus.records[s].raw_tokens;
    if (toks.empty()) continue;
    auto row = sent.row(s);
    for (const std::string& tok : toks) {
      if (auto r = word_vectors.row_of(tok)) {
        auto v = word_vectors.vectors.row(*r);
        for (std::size_t d = 0; d < dim; ++d) row[d] += v[d];
      }
    }
    const double inv = 1.0 / static_cast<double>(toks.size());
    for (std::size_t d = 0; d < dim; ++d) row[d] *= inv;
  }

  // Top-k positive-similarity neighbors per sentence, union-symmetrized.
  std::vector<std::pair<std::size_t, std::size_t>> kept;  // i<j undirected
  std::vector<double> kept_sim;
  std::vector<std::pair<double, std::size_t>> cand;
  for (std::size_t i = 0; i < m; ++i) {
    cand.clear();
    for (std::size_t j = 0; j < m; ++j) {
      if (j == i) continue;
      const double sim = cosine_similarity(sent.row(i), sent.row(j));
      if (sim > 0.0) cand.emplace_back(sim, j);
    }
    std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
      return a.first != b.first ? a.first > b.first : a.second < b.second;
    });
    const std::size_t take =
        std::min<std::size_t>(static_cast<std::size_t>(k_neighbors),
                              cand.size());
    for (std::size_t k = 0; k < take; ++k) {
      const std::size_t j = cand[k].second;
      kept.emplace_back(std::min(i, j), std::max(i, j));
      kept_sim.push_back(cand[k].first);
    }
  }

  // Deduplicate undirected pairs (both endpoints may have kept the edge).
  std::vector<std::size_t> idx(kept.size());
  for (std::size_t k = 0; k < idx.size(); ++k) idx[k] = k;
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return kept[a] < kept[b];
  });
  std::vector<Triplet> entries;
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (k > 0 && kept[idx[k]] == kept[idx[k - 1]]) continue;
    const auto [i, j] = kept[idx[k]];
    const double sim = kept_sim[idx[k]];
    entries.push_back({i, j, sim});
    entries.push_back({j, i, sim});
  }
  for (std::size_t i = 0; i < m; ++i) entries.push_back({i, i, 1.0});

  TextGraph g;
  g.kind = GraphKind::S;
  g.n_words = 0;
  g.n_sentences = m;
  g.adjacency = SparseMatrix::from_triplets(m, m, std::move(entries), true);
  g.normalized = normalize_adjacency(g.adjacency, mode);
  return g;
}

TextGraph build_ws_graph(const LabeledCorpus& corpus, const Vocabulary& vocab,
                         int window_size, NormalizeMode mode, int n_threads) {
  const std::size_t v = vocab.size();
  const std::size_t m = corpus.size();
  const std::size_t n = v + m;

  const CooccurrenceTable table =
      count_cooccurrence(corpus, vocab, window_size, n_threads);
  const SparseMatrix pmi = pmi_edges(table, v);
  const SparseMatrix tfidf = tfidf_edges(corpus, vocab);

  std::vector<Triplet> entries;
  entries.reserve(pmi.nnz() + 2 * tfidf.nnz() + n);
  for (std::size_t r = 0; r < v; ++r) {
    auto cols = pmi.row_cols(r);
    auto vals = pmi.row_values(r);
    for (std::size_t k = 0; k < cols.size(); ++k)
      entries.push_back({r, cols[k], vals[k]});
  }
  for (std::size_t w = 0; w < v; ++w) {
    auto cols = tfidf.row_cols(w);
    auto vals = tfidf.row_values(w);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      entries.push_back({w, v + cols[k], vals[k]});
      entries.push_back({v + cols[k], w, vals[k]});
    }
  }
  for (std::size_t i = 0; i < n; ++i) entries.push_back({i, i, 1.0});

  TextGraph g;
  g.kind = GraphKind::WS;
  g.n_words = v;
  g.n_sentences = m;
  g.adjacency = SparseMatrix::from_triplets(n, n, std::move(entries), true);
  g.normalized = normalize_adjacency(g.adjacency, mode);
  return g;
}

TextGraph attach_graph(GraphKind kind, SparseMatrix adjacency,
                       std::size_t n_words, std::size_t n_sentences,
                       NormalizeMode mode) {
  const std::size_t expected =
      kind == GraphKind::W ? n_words
      : kind == GraphKind::S ? n_sentences
                             : n_words + n_sentences;
  if (adjacency.n_rows() != expected || adjacency.n_cols() != expected)
    throw UsageError(
        "graph size " + std::to_string(adjacency.n_rows()) +
        " does not match corpus/vocabulary (expected " +
        std::to_string(expected) + " nodes for kind " +
        graph_kind_name(kind) + ")");
  TextGraph g;
  g.kind = kind;
  g.n_words = kind == GraphKind::S ? 0 : n_words;
  g.n_sentences = kind == GraphKind::W ? 0 : n_sentences;
  g.adjacency = std::move(adjacency);
  g.normalized = normalize_adjacency(g.adjacency, mode);
  return g;
}

}  // namespace textgcn
