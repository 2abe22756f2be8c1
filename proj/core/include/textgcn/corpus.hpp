#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "textgcn/tasks.hpp"

namespace textgcn {

struct SentenceRecord {
  std::size_t id = 0;
  std::string text;
  std::vector<std::string> raw_tokens;   // NFC-normalized surface tokens
  std::vector<std::size_t> tokens;       // vocabulary indices, in-vocab only
  std::array<std::optional<int>, kTaskCount> labels;

  std::optional<int> label(Task t) const {
    return labels[static_cast<std::size_t>(t)];
  }
};

struct LabeledCorpus {
  std::vector<SentenceRecord> records;
  std::size_t size() const { return records.size(); }
};

enum class CorpusFormat { Jsonl, Tsv };

// NFC-normalizes `text` and splits it into maximal runs of non-whitespace
// scalar values (Unicode White_Space). No case folding. Invalid UTF-8 byte
// sequences become U+FFFD.
std::vector<std::string> tokenize(std::string_view text);

std::string normalize_nfc(std::string_view utf8);

// Loads and tokenizes a corpus. Ids are assigned in file order from 0.
// Throws UsageError naming the offending line for malformed input; an empty
// file is the error "empty corpus".
LabeledCorpus load_corpus(const std::filesystem::path& path,
                          CorpusFormat format);

struct Vocabulary {
  std::unordered_map<std::string, std::size_t> token_to_index;
  std::vector<std::string> index_to_token;
  std::vector<std::uint64_t> counts;
  std::uint64_t min_count = 1;

  std::size_t size() const { return index_to_token.size(); }
  std::optional<std::size_t> index_of(std::string_view token) const;
};

// Counts tokens, drops those below min_count, assigns indices by descending
// count with lexicographic tie-break, and rewrites every record's `tokens`
// to the retained indices. Throws if nothing survives the threshold.
Vocabulary build_vocabulary(LabeledCorpus& corpus, std::uint64_t min_count);

// Rewrites record token indices against an existing vocabulary (tokens not
// in the vocabulary are dropped).
void apply_vocabulary(LabeledCorpus& corpus, const Vocabulary& vocab);

void save_vocabulary(const Vocabulary& vocab, const std::filesystem::path& path);
Vocabulary load_vocabulary(const std::filesystem::path& path);

enum class Split { Train, Val, Test };

struct FoldPlan {
  int k = 5;
  std::uint64_t seed = 0;
  double val_fraction = 0.10;
  std::vector<int> assignments;     // per-record fold index in [0,k)
  std::vector<std::size_t> order;   // the seeded permutation used to deal

  // Train/val/test assignment of every record when `test_fold` is held out:
  // validation is the first round(val_fraction*N) non-test records in
  // permuted order, train is the rest.
  std::vector<Split> splits_for(int test_fold) const;
};

FoldPlan make_folds(const LabeledCorpus& corpus, int k, std::uint64_t seed,
                    double val_fraction);

}  // namespace textgcn
