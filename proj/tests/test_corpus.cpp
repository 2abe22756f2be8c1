#include <doctest.h>

#include <fstream>
#include <map>
#include <set>

#include "testutil.hpp"
#include "textgcn/corpus.hpp"
#include "textgcn/error.hpp"

using namespace textgcn;

namespace {

void write_file(const std::filesystem::path& p, const std::string& s) {
  std::ofstream os(p, std::ios::binary);
  os << s;
}

}  // namespace

TEST_CASE("tokenize: whitespace split") {
  CHECK(tokenize("a b  c") == std::vector<std::string>{"a", "b", "c"});
  CHECK(tokenize("").empty());
  CHECK(tokenize("  \t \n ").empty());
  CHECK(tokenize("one") == std::vector<std::string>{"one"});
  // No case folding.
  CHECK(tokenize("Mixed CASE") == std::vector<std::string>{"Mixed", "CASE"});
}

TEST_CASE("tokenize: NFC normalization matches the unicodedata reference") {
  // generated with CPython unicodedata.normalize('NFC', ...)
  static const std::pair<const char*, const char*> kCases[] = {
      {"\xe0\xb0\x95\xe0\xb1\x86\xe0\xb1\x96", "\xe0\xb0\x95\xe0\xb1\x88"},
      {"\xe0\xb0\x95\xe0\xb1\x88", "\xe0\xb0\x95\xe0\xb1\x88"},
      {"\xe0\xb0\xaa\xe0\xb1\x8b\xe0\xb0\x9f\xe0\xb1\x80",
       "\xe0\xb0\xaa\xe0\xb1\x8b\xe0\xb0\x9f\xe0\xb1\x80"},
      {"\xe0\xb0\xaa\xe0\xb1\x8a\xe0\xb1\x96\xe0\xb0\x9f\xe0\xb1\x80",
       "\xe0\xb0\xaa\xe0\xb1\x8a\xe0\xb1\x96\xe0\xb0\x9f\xe0\xb1\x80"},
      {"\xe0\xb0\x92\xe0\xb1\x95", "\xe0\xb0\x92\xe0\xb1\x95"},
      {"\xe0\xb0\x93", "\xe0\xb0\x93"},
      {"\x65\xcc\x81\x63\x6f\x6c\x65", "\xc3\xa9\x63\x6f\x6c\x65"},
      {"\xc3\xa9\x63\x6f\x6c\x65", "\xc3\xa9\x63\x6f\x6c\x65"},
      {"\x41\xcc\x8a\x4e\x47\x53\x54\x52\x4f\xcc\x88\x4d",
       "\xc3\x85\x4e\x47\x53\x54\x52\xc3\x96\x4d"},
      {"\xe2\x84\xab\x20\x74\x65\x73\x74", "\xc3\x85\x20\x74\x65\x73\x74"},
      {"\xe0\xb0\xa4\xe0\xb1\x86\xe0\xb0\xb2\xe0\xb1\x81\xe0\xb0\x97\xe0\xb1"
       "\x81\x20\xe0\xb0\xad\xe0\xb0\xbe\xe0\xb0\xb7",
       "\xe0\xb0\xa4\xe0\xb1\x86\xe0\xb0\xb2\xe0\xb1\x81\xe0\xb0\x97\xe0\xb1"
       "\x81\x20\xe0\xb0\xad\xe0\xb0\xbe\xe0\xb0\xb7"},
      {"\x61\x73\x63\x69\x69\x20\x6f\x6e\x6c\x79\x20\x77\x6f\x72\x64\x73",
       "\x61\x73\x63\x69\x69\x20\x6f\x6e\x6c\x79\x20\x77\x6f\x72\x64\x73"},
      {"\x6d\x69\x78\x65\x64\x20\xe0\xb0\x95\xe0\xb1\x86\xe0\xb1\x96\x20\x65"
       "\xcc\x81\x20\x74\x6f\x6b\x65\x6e\x73",
       "\x6d\x69\x78\x65\x64\x20\xe0\xb0\x95\xe0\xb1\x88\x20\xc3\xa9\x20\x74"
       "\x6f\x6b\x65\x6e\x73"},
      {"\xe1\xb9\xa9", "\xe1\xb9\xa9"},
      {"\x73\xcc\xa3\xcc\x87", "\xe1\xb9\xa9"},
      {"\x71\xcc\x87\xcc\xa3", "\x71\xcc\xa3\xcc\x87"},
      {"\xe0\xbd\xb7", "\xe0\xbd\xb7"},
      {"\xe0\xa5\x98", "\xe0\xa4\x95\xe0\xa4\xbc"},
      {"\xea\xb0\x80", "\xea\xb0\x80"},
      {"\xe1\x84\x80\xe1\x85\xa1", "\xea\xb0\x80"},
  };
  for (const auto& [input, expected] : kCases) {
    CHECK(normalize_nfc(input) == expected);
    // Decomposed and composed forms tokenize identically.
    CHECK(tokenize(input) == tokenize(expected));
  }
}

TEST_CASE("load_corpus: jsonl basics") {
  testutil::TempDir dir;
  write_file(dir / "c.jsonl",
             "{\"text\": \"a b\", \"sa\": 1, \"hs\": 0, \"sar\": 0}\n"
             "{\"text\": \"c d\", \"sa\": 0, \"hs\": 0, \"sar\": 0}\n"
             "{\"text\": \"e f\", \"sa\": 1, \"hs\": 0, \"sar\": 0}\n");
  const LabeledCorpus c = load_corpus(dir / "c.jsonl", CorpusFormat::Jsonl);
  REQUIRE(c.size() == 3);
  CHECK(c.records[0].id == 0);
  CHECK(c.records[2].id == 2);
  CHECK(c.records[0].label(Task::Sa) == 1);
  CHECK(c.records[0].label(Task::Hs) == 0);
  for (const auto& r : c.records) CHECK(!r.label(Task::Ei).has_value());
}

TEST_CASE("load_corpus: empty file errors") {
  testutil::TempDir dir;
  write_file(dir / "c.jsonl", "");
  CHECK_THROWS_WITH_AS(load_corpus(dir / "c.jsonl", CorpusFormat::Jsonl),
                       "empty corpus", UsageError);
}

TEST_CASE("load_corpus: malformed line names the line number") {
  testutil::TempDir dir;
  write_file(dir / "c.jsonl",
             "{\"text\": \"ok\"}\n"
             "{not json}\n");
  try {
    load_corpus(dir / "c.jsonl", CorpusFormat::Jsonl);
    FAIL("expected UsageError");
  } catch (const UsageError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("load_corpus: unknown label names task and value") {
  testutil::TempDir dir;
  write_file(dir / "c.jsonl", "{\"text\": \"ok\", \"sa\": \"maybe\"}\n");
  try {
    load_corpus(dir / "c.jsonl", CorpusFormat::Jsonl);
    FAIL("expected UsageError");
  } catch (const UsageError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("sa") != std::string::npos);
    CHECK(msg.find("maybe") != std::string::npos);
  }
}

TEST_CASE("load_corpus: label range and class-name strings") {
  testutil::TempDir dir;
  write_file(dir / "c.jsonl",
             "{\"text\": \"x\", \"sa\": \"Positive\", \"ei\": \"sad\"}\n");
  const LabeledCorpus c = load_corpus(dir / "c.jsonl", CorpusFormat::Jsonl);
  CHECK(c.records[0].label(Task::Sa) == 1);
  CHECK(c.records[0].label(Task::Ei) == 2);

  write_file(dir / "bad.jsonl", "{\"text\": \"x\", \"ei\": 4}\n");
  CHECK_THROWS_AS(load_corpus(dir / "bad.jsonl", CorpusFormat::Jsonl),
                  UsageError);
}

TEST_CASE("load_corpus: tsv with header, empty cells absent") {
  testutil::TempDir dir;
  write_file(dir / "c.tsv",
             "text\tsa\tei\ths\tsar\n"
             "a b c\t1\t\t0\t0\n"
             "d e\t0\t3\t0\t1\n");
  const LabeledCorpus c = load_corpus(dir / "c.tsv", CorpusFormat::Tsv);
  REQUIRE(c.size() == 2);
  CHECK(!c.records[0].label(Task::Ei).has_value());
  CHECK(c.records[1].label(Task::Ei) == 3);
  CHECK(c.records[1].label(Task::Sar) == 1);
}

TEST_CASE("load_corpus: whitespace-only text is rejected") {
  testutil::TempDir dir;
  write_file(dir / "c.jsonl", "{\"text\": \"   \"}\n");
  CHECK_THROWS_AS(load_corpus(dir / "c.jsonl", CorpusFormat::Jsonl),
                  UsageError);
}

TEST_CASE("build_vocabulary: count ordering with lexicographic ties") {
  LabeledCorpus c = testutil::corpus_from_tokens({{"a", "a", "b"}});
  const Vocabulary v = build_vocabulary(c, 1);
  REQUIRE(v.size() == 2);
  CHECK(v.index_of("a") == 0);
  CHECK(v.index_of("b") == 1);
  CHECK(v.counts == std::vector<std::uint64_t>{2, 1});
}

TEST_CASE("build_vocabulary: min_count drops tokens from records") {
  LabeledCorpus c = testutil::corpus_from_tokens({{"a", "a", "b"}});
  const Vocabulary v = build_vocabulary(c, 2);
  REQUIRE(v.size() == 1);
  CHECK(v.index_of("a") == 0);
  CHECK(!v.index_of("b").has_value());
  CHECK(c.records[0].tokens == std::vector<std::size_t>{0, 0});
}

TEST_CASE("build_vocabulary: empty after filtering errors") {
  LabeledCorpus c = testutil::corpus_from_tokens({{"a", "b"}});
  CHECK_THROWS_AS(build_vocabulary(c, 10), UsageError);
}

TEST_CASE("build_vocabulary: counts equal a brute-force tally") {
  Rng rng(31);
  LabeledCorpus c = testutil::random_corpus(rng, 500, 80, 3, 12);
  const Vocabulary v = build_vocabulary(c, 1);

  std::map<std::string, std::uint64_t> tally;
  for (const auto& rec : c.records)
    for (const auto& tok : rec.raw_tokens) ++tally[tok];
  REQUIRE(v.size() == tally.size());
  for (const auto& [tok, cnt] : tally) {
    auto idx = v.index_of(tok);
    REQUIRE(idx.has_value());
    CHECK(v.counts[*idx] == cnt);
  }
  // Total order: counts non-increasing, ties lexicographically ascending.
  for (std::size_t i = 1; i < v.size(); ++i) {
    const bool ok =
        v.counts[i - 1] > v.counts[i] ||
        (v.counts[i - 1] == v.counts[i] &&
         v.index_to_token[i - 1] < v.index_to_token[i]);
    CHECK(ok);
  }
}

TEST_CASE("vocabulary: save/load round-trip and rerun determinism") {
  Rng rng(77);
  LabeledCorpus c1 = testutil::random_corpus(rng, 100, 40, 3, 8);
  LabeledCorpus c2 = c1;
  const Vocabulary v1 = build_vocabulary(c1, 2);
  const Vocabulary v2 = build_vocabulary(c2, 2);
  CHECK(v1.index_to_token == v2.index_to_token);
  CHECK(v1.counts == v2.counts);
  for (std::size_t i = 0; i < c1.size(); ++i)
    CHECK(c1.records[i].tokens == c2.records[i].tokens);

  testutil::TempDir dir;
  save_vocabulary(v1, dir / "v.tsv");
  save_vocabulary(v2, dir / "v2.tsv");
  CHECK(testutil::read_file(dir / "v.tsv") ==
        testutil::read_file(dir / "v2.tsv"));
  const Vocabulary back = load_vocabulary(dir / "v.tsv");
  CHECK(back.index_to_token == v1.index_to_token);
  CHECK(back.counts == v1.counts);
}

TEST_CASE("make_folds: 100/5 gives 20-10-70 splits") {
  Rng rng(1);
  LabeledCorpus c = testutil::random_corpus(rng, 100, 30, 3, 6);
  const FoldPlan plan = make_folds(c, 5, 42, 0.10);

  for (int fold = 0; fold < 5; ++fold) {
    const auto splits = plan.splits_for(fold);
    std::size_t n_test = 0, n_val = 0, n_train = 0;
    for (Split s : splits) {
      if (s == Split::Test) ++n_test;
      if (s == Split::Val) ++n_val;
      if (s == Split::Train) ++n_train;
    }
    CHECK(n_test == 20);
    CHECK(n_val == 10);
    CHECK(n_train == 70);
  }
}

TEST_CASE("make_folds: folds are balanced, disjoint, and cover the corpus") {
  Rng rng(2);
  LabeledCorpus c = testutil::random_corpus(rng, 103, 30, 3, 6);
  const FoldPlan plan = make_folds(c, 5, 7, 0.10);

  std::vector<std::size_t> sizes(5, 0);
  for (int f : plan.assignments) {
    REQUIRE(f >= 0);
    REQUIRE(f < 5);
    ++sizes[f];
  }
  const auto [mn, mx] = std::minmax_element(sizes.begin(), sizes.end());
  CHECK(*mx - *mn <= 1);

  // Union of test folds = corpus; pairwise intersections empty (each record
  // has exactly one fold assignment by construction; verify via splits).
  std::set<std::size_t> seen;
  for (int fold = 0; fold < 5; ++fold) {
    const auto splits = plan.splits_for(fold);
    for (std::size_t r = 0; r < splits.size(); ++r)
      if (splits[r] == Split::Test) {
        CHECK(!seen.contains(r));
        seen.insert(r);
      }
  }
  CHECK(seen.size() == c.size());
}

TEST_CASE("make_folds: same seed twice is identical") {
  Rng rng(3);
  LabeledCorpus c = testutil::random_corpus(rng, 60, 20, 3, 6);
  const FoldPlan a = make_folds(c, 4, 9, 0.1);
  const FoldPlan b = make_folds(c, 4, 9, 0.1);
  CHECK(a.assignments == b.assignments);
  CHECK(a.order == b.order);
}

TEST_CASE("make_folds: k > corpus size errors") {
  Rng rng(4);
  LabeledCorpus c = testutil::random_corpus(rng, 3, 10, 2, 4);
  CHECK_THROWS_AS(make_folds(c, 4, 1, 0.1), UsageError);
  CHECK_THROWS_AS(make_folds(c, 1, 1, 0.1), UsageError);
}
