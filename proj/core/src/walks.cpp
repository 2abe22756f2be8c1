#include "textgcn/walks.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <list>
#include <numeric>
#include <stdexcept>
#include <thread>
#include <unordered_map>

#include "textgcn/error.hpp"

namespace textgcn {

void WalkConfig::validate() const {
  if (walks_per_node < 1) throw UsageError("walks_per_node must be >= 1");
  if (walk_length < 2) throw UsageError("walk_length must be >= 2");
  if (!(p > 0.0) || !(q > 0.0)) throw UsageError("p and q must be > 0");
  if (sg_window < 1) throw UsageError("sg_window must be >= 1");
  if (dim < 1) throw UsageError("dim must be >= 1");
  if (negatives < 0) throw UsageError("negatives must be >= 0");
  if (epochs < 0) throw UsageError("epochs must be >= 0");
}

namespace {

// Vose alias table; construction and sampling are deterministic.
struct AliasTable {
  std::vector<std::size_t> items;
  std::vector<double> prob;
  std::vector<std::uint32_t> alias;

  std::size_t sample(Rng& rng) const {
    const std::size_t i = rng.uniform_index(items.size());
    return rng.uniform01() < prob[i] ? items[i] : items[alias[i]];
  }
};

AliasTable build_alias(std::vector<std::size_t> items,
                       const std::vector<double>& weights) {
  const std::size_t n = items.size();
  AliasTable t;
  t.items = std::move(items);
  t.prob.assign(n, 0.0);
  t.alias.assign(n, 0);

  double total = 0.0;
  for (double w : weights) total += w;
  std::vector<double> scaled(n);
  for (std::size_t i = 0; i < n; ++i)
    scaled[i] = weights[i] * static_cast<double>(n) / total;

  std::vector<std::uint32_t> small, large;
  for (std::size_t i = 0; i < n; ++i)
    (scaled[i] < 1.0 ? small : large).push_back(static_cast<std::uint32_t>(i));

  while (!small.empty() && !large.empty()) {
    const std::uint32_t s = small.back();
    small.pop_back();
    const std::uint32_t l = large.back();
    large.pop_back();
    t.prob[s] = scaled[s];
    t.alias[s] = l;
    scaled[l] = (scaled[l] + scaled[s]) - 1.0;
    (scaled[l] < 1.0 ? small : large).push_back(l);
  }
  while (!large.empty()) {
    t.prob[large.back()] = 1.0;
    large.pop_back();
  }
  while (!small.empty()) {
    t.prob[small.back()] = 1.0;
    small.pop_back();
  }
  return t;
}

std::vector<double> second_order_weights(const SparseMatrix& adjacency,
                                         std::size_t prev, std::size_t current,
                                         double p, double q) {
  auto cols = adjacency.row_cols(current);
  auto vals = adjacency.row_values(current);
  std::vector<double> w(cols.size());
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const std::size_t x = cols[k];
    if (x == prev)
      w[k] = vals[k] / p;
    else if (adjacency.has_entry(prev, x))
      w[k] = vals[k];
    else
      w[k] = vals[k] / q;
  }
  return w;
}

// Per-thread LRU of second-order alias tables keyed by (prev, current).
class AliasCache {
 public:
  explicit AliasCache(std::size_t capacity) : capacity_(capacity) {}

  const AliasTable& get(const SparseMatrix& adjacency, std::size_t prev,
                        std::size_t current, double p, double q) {
    const std::uint64_t key =
        (static_cast<std::uint64_t>(prev) << 32) | current;
    auto it = index_.find(key);
    if (it != index_.end()) {
      entries_.splice(entries_.begin(), entries_, it->second);
      return it->second->second;
    }
    auto cols = adjacency.row_cols(current);
    AliasTable table = build_alias(
        std::vector<std::size_t>(cols.begin(), cols.end()),
        second_order_weights(adjacency, prev, current, p, q));
    entries_.emplace_front(key, std::move(table));
    index_[key] = entries_.begin();
    if (entries_.size() > capacity_) {
      index_.erase(entries_.back().first);
      entries_.pop_back();
    }
    return entries_.front().second;
  }

 private:
  std::size_t capacity_;
  std::list<std::pair<std::uint64_t, AliasTable>> entries_;
  std::unordered_map<std::uint64_t,
                     std::list<std::pair<std::uint64_t, AliasTable>>::iterator>
      index_;
};

}  // namespace

std::vector<std::pair<std::size_t, double>> transition_distribution(
    const SparseMatrix& adjacency, std::optional<std::size_t> prev,
    std::size_t current, double p, double q) {
  auto cols = adjacency.row_cols(current);
  auto vals = adjacency.row_values(current);
  std::vector<double> w = prev.has_value()
                              ? second_order_weights(adjacency, *prev, current,
                                                     p, q)
                              : std::vector<double>(vals.begin(), vals.end());
  double total = 0.0;
  for (double v : w) total += v;
  std::vector<std::pair<std::size_t, double>> dist;
  dist.reserve(cols.size());
  for (std::size_t k = 0; k < cols.size(); ++k)
    dist.emplace_back(cols[k], w[k] / total);
  return dist;
}

WalkCorpus generate_walks(const SparseMatrix& adjacency, const WalkConfig& cfg,
                          int n_threads) {
  cfg.validate();
  const std::size_t n = adjacency.n_rows();
  for (std::size_t v = 0; v < n; ++v)
    if (adjacency.row_cols(v).empty())
      throw UsageError("node " + std::to_string(v) +
                       " is isolated; add self-loops before walking");

  // First-order tables, one per node, built up front.
  std::vector<AliasTable> first_order;
  first_order.reserve(n);
  for (std::size_t v = 0; v < n; ++v) {
    auto cols = adjacency.row_cols(v);
    auto vals = adjacency.row_values(v);
    first_order.push_back(
        build_alias(std::vector<std::size_t>(cols.begin(), cols.end()),
                    std::vector<double>(vals.begin(), vals.end())));
  }

  const std::size_t rounds = static_cast<std::size_t>(cfg.walks_per_node);
  const std::size_t length = static_cast<std::size_t>(cfg.walk_length);
  WalkCorpus corpus;
  corpus.walks.assign(rounds * n, {});

  auto walk_one = [&](std::size_t round, std::size_t start,
                      AliasCache& cache) {
    Rng rng(mix_seed(cfg.seed, start * rounds + round));
    std::vector<std::uint32_t> walk;
    walk.reserve(length);
    walk.push_back(static_cast<std::uint32_t>(start));
    std::size_t current = start;
    std::size_t prev = start;
    for (std::size_t step = 1; step < length; ++step) {
      std::size_t next;
      if (step == 1) {
        next = first_order[current].sample(rng);
      } else {
        next = cache.get(adjacency, prev, current, cfg.p, cfg.q).sample(rng);
      }
      walk.push_back(static_cast<std::uint32_t>(next));
      prev = current;
      current = next;
    }
    return walk;
  };

  auto run_range = [&](std::size_t begin, std::size_t end) {
    AliasCache cache(cfg.alias_cache_capacity);
    for (std::size_t idx = begin; idx < end; ++idx) {
      const std::size_t round = idx / n;
      const std::size_t start = idx % n;
      corpus.walks[idx] = walk_one(round, start, cache);
    }
  };

  const std::size_t total = rounds * n;
  if (n_threads <= 1 || total < 64) {
    run_range(0, total);
  } else {
    const std::size_t nt = static_cast<std::size_t>(n_threads);
    const std::size_t chunk = (total + nt - 1) / nt;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < nt; ++t) {
      const std::size_t b = std::min(t * chunk, total);
      const std::size_t e = std::min(b + chunk, total);
      if (b < e) pool.emplace_back(run_range, b, e);
    }
    for (auto& th : pool) th.join();
  }
  return corpus;
}

Matrix sgns_initial_embeddings(std::size_t n_nodes, const WalkConfig& cfg) {
  Matrix m(n_nodes, static_cast<std::size_t>(cfg.dim));
  const double inv_dim = 1.0 / static_cast<double>(cfg.dim);
  for (std::size_t v = 0; v < n_nodes; ++v) {
    Rng rng(mix_seed(cfg.seed, 0x5EED0000ULL + v));
    auto row = m.row(v);
    for (std::size_t d = 0; d < row.size(); ++d)
      row[d] = (rng.uniform01() - 0.5) * inv_dim;
  }
  return m;
}

SgnsResult sgns_train(const WalkCorpus& walks, const WalkConfig& cfg,
                      std::size_t n_nodes, int n_threads) {
  cfg.validate();
  if (walks.walks.empty()) throw UsageError("walk corpus is empty");
  for (const auto& w : walks.walks)
    for (std::uint32_t v : w)
      if (v >= n_nodes)
        throw std::logic_error("sgns_train: walk node out of range");

  SgnsResult result;
  result.embeddings = sgns_initial_embeddings(n_nodes, cfg);
  Matrix out_vectors(n_nodes, static_cast<std::size_t>(cfg.dim));

  // Noise distribution: unigram counts over the walks, raised to 3/4.
  std::vector<double> counts(n_nodes, 0.0);
  for (const auto& w : walks.walks)
    for (std::uint32_t v : w) counts[v] += 1.0;
  std::vector<double> noise_cdf(n_nodes, 0.0);
  double acc = 0.0;
  for (std::size_t v = 0; v < n_nodes; ++v) {
    acc += std::pow(counts[v], 0.75);
    noise_cdf[v] = acc;
  }
  if (acc <= 0.0) throw std::logic_error("sgns_train: empty noise table");

  const std::size_t window = static_cast<std::size_t>(cfg.sg_window);
  std::uint64_t positives_per_epoch = 0;
  for (const auto& w : walks.walks) {
    const std::size_t len = w.size();
    for (std::size_t i = 0; i < len; ++i) {
      const std::size_t lo = i >= window ? i - window : 0;
      const std::size_t hi = std::min(len - 1, i + window);
      positives_per_epoch += hi - lo;  // excludes the center itself
    }
  }
  const std::uint64_t total_updates =
      positives_per_epoch * static_cast<std::uint64_t>(cfg.epochs);

  const std::size_t dim = static_cast<std::size_t>(cfg.dim);
  std::atomic<std::uint64_t> update_counter{0};

  // SGD over one range of walks. In the parallel mode the matrix updates
  // intentionally race (lock-free SGD); the single-shard path is exact.
  auto process_range = [&](std::size_t first, std::size_t last, Rng& rng,
                           double& loss_sum, std::uint64_t& n_positives) {
    std::vector<double> in_delta(dim);
    auto sample_noise = [&]() {
      const double u = rng.uniform01() * acc;
      const auto it = std::lower_bound(noise_cdf.begin(), noise_cdf.end(), u);
      return static_cast<std::size_t>(it - noise_cdf.begin());
    };
    for (std::size_t wi = first; wi < last; ++wi) {
      const auto& walk = walks.walks[wi];
      const std::size_t len = walk.size();
      for (std::size_t i = 0; i < len; ++i) {
        const std::size_t center = walk[i];
        double* in = result.embeddings.data.data() + center * dim;
        const std::size_t lo = i >= window ? i - window : 0;
        const std::size_t hi = std::min(len - 1, i + window);
        for (std::size_t j = lo; j <= hi; ++j) {
          if (j == i) continue;
          const std::uint64_t update_idx =
              update_counter.fetch_add(1, std::memory_order_relaxed);
          const double frac =
              total_updates > 0
                  ? static_cast<double>(update_idx) /
                        static_cast<double>(total_updates)
                  : 0.0;
          const double lr = std::max(
              cfg.lr_end, cfg.lr_start - (cfg.lr_start - cfg.lr_end) * frac);
          ++n_positives;
          std::fill(in_delta.begin(), in_delta.end(), 0.0);

          // Positive pair.
          {
            const std::size_t ctx = walk[j];
            double* out = out_vectors.data.data() + ctx * dim;
            double s = 0.0;
            for (std::size_t d = 0; d < dim; ++d) s += in[d] * out[d];
            const double sig = sigmoid(s);
            loss_sum += -std::log(std::max(sig, 1e-12));
            const double g = lr * (1.0 - sig);
            for (std::size_t d = 0; d < dim; ++d) {
              in_delta[d] += g * out[d];
              out[d] += g * in[d];
            }
          }
          // Negative samples.
          for (int neg = 0; neg < cfg.negatives; ++neg) {
            const std::size_t node = sample_noise();
            double* out = out_vectors.data.data() + node * dim;
            double s = 0.0;
            for (std::size_t d = 0; d < dim; ++d) s += in[d] * out[d];
            const double sig = sigmoid(s);
            loss_sum += -std::log(std::max(1.0 - sig, 1e-12));
            const double g = lr * (0.0 - sig);
            for (std::size_t d = 0; d < dim; ++d) {
              in_delta[d] += g * out[d];
              out[d] += g * in[d];
            }
          }
          for (std::size_t d = 0; d < dim; ++d) in[d] += in_delta[d];
        }
      }
    }
  };

  const std::size_t n_walks = walks.walks.size();
  Rng serial_rng(mix_seed(cfg.seed, 4));
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    if (n_threads <= 1 || n_walks < 2) {
      double loss = 0.0;
      std::uint64_t positives = 0;
      process_range(0, n_walks, serial_rng, loss, positives);
      result.epoch_losses.push_back(
          positives > 0 ? loss / static_cast<double>(positives) : 0.0);
    } else {
      const std::size_t nt = static_cast<std::size_t>(n_threads);
      std::vector<double> losses(nt, 0.0);
      std::vector<std::uint64_t> positives(nt, 0);
      std::vector<Rng> rngs;
      for (std::size_t t = 0; t < nt; ++t)
        rngs.emplace_back(
            mix_seed(cfg.seed, 4 + 100 * (epoch + 1) + t));
      std::vector<std::thread> pool;
      const std::size_t chunk = (n_walks + nt - 1) / nt;
      for (std::size_t t = 0; t < nt; ++t) {
        const std::size_t b = std::min(t * chunk, n_walks);
        const std::size_t e = std::min(b + chunk, n_walks);
        if (b < e)
          pool.emplace_back([&, t, b, e] {
            process_range(b, e, rngs[t], losses[t], positives[t]);
          });
      }
      for (auto& th : pool) th.join();
      double loss = 0.0;
      std::uint64_t pos = 0;
      for (std::size_t t = 0; t < nt; ++t) {
        loss += losses[t];
        pos += positives[t];
      }
      result.epoch_losses.push_back(
          pos > 0 ? loss / static_cast<double>(pos) : 0.0);
    }
  }
  return result;
}

}  // namespace textgcn
