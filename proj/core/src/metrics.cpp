#include "textgcn/metrics.hpp"

#include <algorithm>
#include <stdexcept>

#include "textgcn/error.hpp"
#include "textgcn/graph.hpp"

namespace textgcn {

F1Result f1_scores(std::span<const int> gold, std::span<const int> pred,
                   int n_classes) {
  if (gold.empty()) throw std::invalid_argument("f1_scores: empty input");
  if (gold.size() != pred.size())
    throw std::invalid_argument("f1_scores: length mismatch");
  const ConfusionMatrix cm = confusion(gold, pred, n_classes);

  F1Result out;
  out.per_class.resize(n_classes);
  double macro_sum = 0.0, weighted_sum = 0.0;
  for (int c = 0; c < n_classes; ++c) {
    std::uint64_t tp = cm.at(c, c), fp = 0, fn = 0;
    for (int o = 0; o < n_classes; ++o) {
      if (o == c) continue;
      fp += cm.at(o, c);
      fn += cm.at(c, o);
    }
    ClassStats& s = out.per_class[c];
    s.support = tp + fn;
    s.precision = (tp + fp) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
    s.recall = (tp + fn) > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
    s.f1 = (s.precision + s.recall) > 0.0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    macro_sum += s.f1;
    weighted_sum += s.f1 * static_cast<double>(s.support);
  }
  out.macro_f1 = macro_sum / static_cast<double>(n_classes);
  out.weighted_f1 = weighted_sum / static_cast<double>(gold.size());
  return out;
}

std::uint64_t ConfusionMatrix::total() const {
  std::uint64_t s = 0;
  for (std::uint64_t v : counts) s += v;
  return s;
}

std::uint64_t ConfusionMatrix::trace() const {
  std::uint64_t s = 0;
  for (int c = 0; c < n_classes; ++c) s += at(c, c);
  return s;
}

std::vector<double> ConfusionMatrix::row_percent() const {
  std::vector<double> out(counts.size(), 0.0);
  for (int g = 0; g < n_classes; ++g) {
    std::uint64_t row_sum = 0;
    for (int p = 0; p < n_classes; ++p) row_sum += at(g, p);
    if (row_sum == 0) continue;
    for (int p = 0; p < n_classes; ++p)
      out[static_cast<std::size_t>(g) * n_classes + p] =
          100.0 * static_cast<double>(at(g, p)) / static_cast<double>(row_sum);
  }
  return out;
}

ConfusionMatrix confusion(std::span<const int> gold, std::span<const int> pred,
                          int n_classes) {
  if (gold.empty()) throw std::invalid_argument("confusion: empty input");
  if (gold.size() != pred.size())
    throw std::invalid_argument("confusion: length mismatch");
  ConfusionMatrix cm;
  cm.n_classes = n_classes;
  cm.counts.assign(static_cast<std::size_t>(n_classes) * n_classes, 0);
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (gold[i] < 0 || gold[i] >= n_classes || pred[i] < 0 ||
        pred[i] >= n_classes)
      throw std::invalid_argument("confusion: label out of range");
    ++cm.counts[static_cast<std::size_t>(gold[i]) * n_classes + pred[i]];
  }
  return cm;
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
  for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::vector<std::pair<std::string, double>> nearest_neighbors(
    const EmbeddingTable& table, std::string_view query, std::size_t k) {
  if (k < 1) throw UsageError("nearest_neighbors: k must be at least 1");
  const auto qrow = table.row_of(query);
  if (!qrow) {
    // Suggest the closest keys by edit distance.
    std::vector<std::pair<std::size_t, std::size_t>> dist;  // (distance, row)
    dist.reserve(table.size());
    for (std::size_t i = 0; i < table.size(); ++i)
      dist.emplace_back(levenshtein(query, table.keys[i]), i);
    std::sort(dist.begin(), dist.end());
    std::string msg = "unknown query \"" + std::string(query) +
                      "\"; nearest vocabulary matches:";
    for (std::size_t i = 0; i < std::min<std::size_t>(5, dist.size()); ++i)
      msg += " " + table.keys[dist[i].second];
    throw UsageError(msg);
  }

  std::vector<std::pair<double, std::size_t>> scored;
  scored.reserve(table.size());
  const auto q = table.vectors.row(*qrow);
  for (std::size_t i = 0; i < table.size(); ++i) {
    if (i == *qrow) continue;
    scored.emplace_back(cosine_similarity(q, table.vectors.row(i)), i);
  }
  std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first != b.first ? a.first > b.first : a.second < b.second;
  });
  const std::size_t take = std::min(k, scored.size());
  std::vector<std::pair<std::string, double>> out;
  out.reserve(take);
  for (std::size_t i = 0; i < take; ++i)
    out.emplace_back(table.keys[scored[i].second], scored[i].first);
  return out;
}

}  // namespace textgcn
