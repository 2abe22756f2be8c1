#include "textgcn/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include <nlohmann/json.hpp>

#include "textgcn/error.hpp"
#include "textgcn/rng.hpp"

namespace textgcn {

namespace {

using nlohmann::json;

[[noreturn]] void line_error(std::size_t line_no, const std::string& what) {
  throw UsageError("line " + std::to_string(line_no) + ": " + what);
}

std::optional<int> parse_label_or_die(Task t, const std::string& raw,
                                      std::size_t line_no) {
  auto v = parse_label(t, raw);
  if (!v)
    line_error(line_no, std::string("unknown label \"") + raw +
                            "\" for task " + task_name(t));
  return v;
}

void parse_jsonl_line(const std::string& line, std::size_t line_no,
                      SentenceRecord& rec) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::exception& e) {
    line_error(line_no, std::string("invalid JSON: ") + e.what());
  }
  if (!obj.is_object()) line_error(line_no, "expected a JSON object");
  if (!obj.contains("text") || !obj["text"].is_string())
    line_error(line_no, "missing required string field \"text\"");
  rec.text = obj["text"].get<std::string>();

  for (Task t : kAllTasks) {
    const char* key = task_name(t);
    if (!obj.contains(key) || obj[key].is_null()) continue;
    const json& v = obj[key];
    std::optional<int> label;
    if (v.is_number_integer()) {
      const long long iv = v.get<long long>();
      if (iv < 0 || iv >= class_count(t))
        line_error(line_no, std::string("unknown label \"") +
                                std::to_string(iv) + "\" for task " + key);
      label = static_cast<int>(iv);
    } else if (v.is_string()) {
      label = parse_label_or_die(t, v.get<std::string>(), line_no);
    } else {
      line_error(line_no, std::string("label for task ") + key +
                              " must be an integer, string, or null");
    }
    rec.labels[static_cast<std::size_t>(t)] = label;
  }

  for (auto it = obj.begin(); it != obj.end(); ++it) {
    const std::string& key = it.key();
    if (key == "text") continue;
    if (!task_from_name(key))
      line_error(line_no, "unknown field \"" + key + "\"");
  }
}

void parse_tsv_line(const std::string& line, std::size_t line_no,
                    SentenceRecord& rec) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t tab = line.find('\t', start);
    if (tab == std::string::npos) {
      cells.push_back(line.substr(start));
      break;
    }
    cells.push_back(line.substr(start, tab - start));
    start = tab + 1;
  }
  if (cells.size() != 1 + kTaskCount)
    line_error(line_no, "expected 5 tab-separated columns "
                        "(text, sa, ei, hs, sar), got " +
                            std::to_string(cells.size()));
  rec.text = cells[0];
  for (Task t : kAllTasks) {
    const std::string& cell = cells[1 + static_cast<std::size_t>(t)];
    if (cell.empty()) continue;
    rec.labels[static_cast<std::size_t>(t)] =
        parse_label_or_die(t, cell, line_no);
  }
}

bool is_tsv_header(const std::string& line) {
  return line == "text\tsa\tei\ths\tsar";
}

}  // namespace

std::optional<std::size_t> Vocabulary::index_of(std::string_view token) const {
  auto it = token_to_index.find(std::string(token));
  if (it == token_to_index.end()) return std::nullopt;
  return it->second;
}

LabeledCorpus load_corpus(const std::filesystem::path& path,
                          CorpusFormat format) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw UsageError("cannot open corpus file: " + path.string());

  LabeledCorpus corpus;
  std::string line;
  std::size_t line_no = 0;
  bool first_line = true;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (format == CorpusFormat::Tsv && first_line && is_tsv_header(line)) {
      first_line = false;
      continue;
    }
    first_line = false;
    if (line.empty()) {
      if (format == CorpusFormat::Jsonl) continue;  // blank JSONL lines skipped
      line_error(line_no, "empty line");
    }

    SentenceRecord rec;
    rec.id = corpus.records.size();
    if (format == CorpusFormat::Jsonl)
      parse_jsonl_line(line, line_no, rec);
    else
      parse_tsv_line(line, line_no, rec);

    rec.raw_tokens = tokenize(rec.text);
    if (rec.raw_tokens.empty())
      line_error(line_no, "text tokenizes to nothing");
    corpus.records.push_back(std::move(rec));
  }
  if (corpus.records.empty()) throw UsageError("empty corpus");
  return corpus;
}

Vocabulary build_vocabulary(LabeledCorpus& corpus, std::uint64_t min_count) {
  std::unordered_map<std::string, std::uint64_t> tally;
  for (const SentenceRecord& rec : corpus.records)
    for (const std::string& tok : rec.raw_tokens) ++tally[tok];

  std::vector<std::pair<std::string, std::uint64_t>> kept;
  kept.reserve(tally.size());
  for (auto& [tok, cnt] : tally)
    if (cnt >= min_count) kept.emplace_back(tok, cnt);
  if (kept.empty())
    throw UsageError("vocabulary is empty after min_count filtering");

  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });

  Vocabulary vocab;
  vocab.min_count = min_count;
  vocab.index_to_token.reserve(kept.size());
  vocab.counts.reserve(kept.size());
  for (std::size_t i = 0; i < kept.size(); ++i) {
    vocab.token_to_index.emplace(kept[i].first, i);
    vocab.index_to_token.push_back(kept[i].first);
    vocab.counts.push_back(kept[i].second);
  }
  apply_vocabulary(corpus, vocab);
  return vocab;
}

void apply_vocabulary(LabeledCorpus& corpus, const Vocabulary& vocab) {
  for (SentenceRecord& rec : corpus.records) {
    rec.tokens.clear();
    rec.tokens.reserve(rec.raw_tokens.size());
    for (const std::string& tok : rec.raw_tokens)
      if (auto idx = vocab.index_of(tok)) rec.tokens.push_back(*idx);
  }
}

void save_vocabulary(const Vocabulary& vocab,
                     const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw UsageError("cannot open for writing: " + path.string());
  for (std::size_t i = 0; i < vocab.size(); ++i)
    os << vocab.index_to_token[i] << '\t' << vocab.counts[i] << '\n';
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

Vocabulary load_vocabulary(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw UsageError("cannot open vocabulary file: " + path.string());
  Vocabulary vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::size_t tab = line.rfind('\t');
    if (tab == std::string::npos)
      line_error(line_no, "vocabulary line must be token<TAB>count");
    const std::string token = line.substr(0, tab);
    std::uint64_t count = 0;
    try {
      count = std::stoull(line.substr(tab + 1));
    } catch (const std::exception&) {
      line_error(line_no, "bad count in vocabulary file");
    }
    vocab.token_to_index.emplace(token, vocab.index_to_token.size());
    vocab.index_to_token.push_back(token);
    vocab.counts.push_back(count);
  }
  if (vocab.size() == 0) throw UsageError("empty vocabulary file");
  return vocab;
}

FoldPlan make_folds(const LabeledCorpus& corpus, int k, std::uint64_t seed,
                    double val_fraction) {
  const std::size_t n = corpus.size();
  if (k < 2) throw UsageError("fold count must be at least 2");
  if (static_cast<std::size_t>(k) > n)
    throw UsageError("fold count " + std::to_string(k) +
                     " exceeds corpus size " + std::to_string(n));
  if (val_fraction < 0.0 || val_fraction >= 1.0)
    throw UsageError("val_fraction must be in [0, 1)");

  FoldPlan plan;
  plan.k = k;
  plan.seed = seed;
  plan.val_fraction = val_fraction;
  plan.order.resize(n);
  std::iota(plan.order.begin(), plan.order.end(), std::size_t{0});

  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = rng.uniform_index(i);
    std::swap(plan.order[i - 1], plan.order[j]);
  }

  plan.assignments.assign(n, 0);
  for (std::size_t pos = 0; pos < n; ++pos)
    plan.assignments[plan.order[pos]] = static_cast<int>(pos % k);
  return plan;
}

std::vector<Split> FoldPlan::splits_for(int test_fold) const {
  const std::size_t n = assignments.size();
  std::vector<Split> splits(n, Split::Train);
  const auto val_target =
      static_cast<std::size_t>(std::llround(val_fraction * static_cast<double>(n)));
  std::size_t val_taken = 0;
  for (std::size_t pos = 0; pos < n; ++pos) {
    const std::size_t rec = order[pos];
    if (assignments[rec] == test_fold) {
      splits[rec] = Split::Test;
    } else if (val_taken < val_target) {
      splits[rec] = Split::Val;
      ++val_taken;
    }
  }
  return splits;
}

}  // namespace textgcn
