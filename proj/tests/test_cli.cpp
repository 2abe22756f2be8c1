#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "testutil.hpp"
#include "textgcn/corpus.hpp"
#include "textgcn/embedding.hpp"
#include "textgcn/mtl.hpp"

using namespace textgcn;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args, const std::filesystem::path& dir) {
  const std::filesystem::path out = dir / "cli_output.txt";
  const std::string cmd = std::string(TEXTGCN_CLI_BIN) + " " + args + " > " +
                          out.string() + " 2>&1";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  r.output = testutil::read_file(out);
  return r;
}

// Toy but separable corpus the CLI suites train on.
void write_toy_corpus(const std::filesystem::path& path,
                      std::size_t n_sentences = 60) {
  testutil::TwoClusterSpec spec;
  spec.n_sentences = n_sentences;
  spec.words_per_subcluster = 10;
  spec.seed = 12;
  testutil::write_jsonl(testutil::two_cluster_corpus(spec), path);
}

}  // namespace

TEST_CASE("cli: build-graph stats show |V| + sentences for kind ws") {
  testutil::TempDir dir;
  std::ofstream(dir / "c.jsonl")
      << "{\"text\": \"aa bb cc\"}\n{\"text\": \"bb cc dd\"}\n"
         "{\"text\": \"cc dd ee\"}\n";
  const auto r = run_cli("build-graph --corpus " + (dir / "c.jsonl").string() +
                             " --graph-kind ws --out " + (dir / "g").string(),
                         dir.path());
  REQUIRE(r.exit_code == 0);
  CHECK(r.output.find("\"n_nodes\": 8") != std::string::npos);  // 5 words + 3
  CHECK(r.output.find("\"n_words\": 5") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "g" / "graph.tg1"));
  CHECK(std::filesystem::exists(dir / "g" / "vocab.tsv"));
  CHECK(std::filesystem::exists(dir / "g" / "stats.json"));
  CHECK(std::filesystem::exists(dir / "g" / "config.txt"));
}

TEST_CASE("cli: word-graph nnz grows with the window") {
  testutil::TempDir dir;
  write_toy_corpus(dir / "c.jsonl");
  auto nnz_for = [&](int window, const std::string& out) {
    const auto r = run_cli(
        "build-graph --corpus " + (dir / "c.jsonl").string() +
            " --graph-kind w --window-size " + std::to_string(window) +
            " --out " + (dir / out).string(),
        dir.path());
    REQUIRE(r.exit_code == 0);
    const std::string stats = testutil::read_file(dir / out / "stats.json");
    const auto pos = stats.find("\"nnz\": ");
    REQUIRE(pos != std::string::npos);
    return std::stoull(stats.substr(pos + 7));
  };
  const auto nnz2 = nnz_for(2, "g2");
  const auto nnz4 = nnz_for(4, "g4");
  CHECK(nnz4 >= nnz2);
}

TEST_CASE("cli: rebuilding with the same config is byte-identical") {
  testutil::TempDir dir;
  write_toy_corpus(dir / "c.jsonl");
  const std::string base = "build-graph --corpus " +
                           (dir / "c.jsonl").string() +
                           " --graph-kind ws --window-size 3 --out ";
  REQUIRE(run_cli(base + (dir / "a").string(), dir.path()).exit_code == 0);
  REQUIRE(run_cli(base + (dir / "b").string(), dir.path()).exit_code == 0);
  CHECK(testutil::read_file(dir / "a" / "graph.tg1") ==
        testutil::read_file(dir / "b" / "graph.tg1"));
  CHECK(testutil::read_file(dir / "a" / "vocab.tsv") ==
        testutil::read_file(dir / "b" / "vocab.tsv"));
  CHECK(testutil::read_file(dir / "a" / "stats.json") ==
        testutil::read_file(dir / "b" / "stats.json"));
}

TEST_CASE("cli: train single-task and multi-task, lambda 0 drops l_cla") {
  testutil::TempDir dir;
  write_toy_corpus(dir / "c.jsonl");
  REQUIRE(run_cli("build-graph --corpus " + (dir / "c.jsonl").string() +
                      " --graph-kind ws --out " + (dir / "g").string(),
                  dir.path())
              .exit_code == 0);
  const std::string common =
      "train --corpus " + (dir / "c.jsonl").string() + " --graph " +
      (dir / "g" / "graph.tg1").string() + " --vocab " +
      (dir / "g" / "vocab.tsv").string() +
      " --embed-dim 8 --max-epochs 5 --patience 5 --folds 2 --seed 3 ";

  // ST-Text GCN: a single task.
  auto st = run_cli(common + "--tasks sa --out " + (dir / "st").string(),
                    dir.path());
  REQUIRE(st.exit_code == 0);
  // MT-Text GCN: all four tasks.
  auto mt = run_cli(common + "--tasks sa,ei,hs,sar --out " +
                        (dir / "mt").string(),
                    dir.path());
  REQUIRE(mt.exit_code == 0);
  CHECK(std::filesystem::exists(dir / "mt" / "checkpoint.bin"));

  // lambda = 0: l_total column equals l_mse in every epoch row.
  auto l0 = run_cli(common + "--tasks sa,ei,hs,sar --lambda 0 --out " +
                        (dir / "l0").string(),
                    dir.path());
  REQUIRE(l0.exit_code == 0);
  std::ifstream hist(dir / "l0" / "history.csv");
  std::string line;
  std::getline(hist, line);  // header
  int rows = 0;
  while (std::getline(hist, line)) {
    std::stringstream ss(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    REQUIRE(cells.size() >= 5);
    CHECK(cells[1] == cells[3]);  // l_mse == l_total
    ++rows;
  }
  CHECK(rows == 5);
}

TEST_CASE("cli: missing graph file exits 2 with a clean error") {
  testutil::TempDir dir;
  write_toy_corpus(dir / "c.jsonl");
  const auto r = run_cli(
      "train --corpus " + (dir / "c.jsonl").string() +
          " --graph /nonexistent/graph.tg1 --vocab /nonexistent/vocab.tsv"
          " --out " +
          (dir / "o").string(),
      dir.path());
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("error:") != std::string::npos);
}

TEST_CASE("cli: full train/evaluate/embed/neighbors round trip") {
  testutil::TempDir dir;
  write_toy_corpus(dir / "c.jsonl", 60);
  REQUIRE(run_cli("build-graph --corpus " + (dir / "c.jsonl").string() +
                      " --graph-kind ws --out " + (dir / "g").string(),
                  dir.path())
              .exit_code == 0);
  const std::string io = " --corpus " + (dir / "c.jsonl").string() +
                         " --graph " + (dir / "g" / "graph.tg1").string() +
                         " --vocab " + (dir / "g" / "vocab.tsv").string();

  // Train long enough to separate the toy clusters perfectly.
  REQUIRE(run_cli("train" + io +
                      " --embed-dim 16 --learning-rate 0.01 --max-epochs 60"
                      " --patience 60 --folds 2 --seed 3 --out " +
                      (dir / "run").string(),
                  dir.path())
              .exit_code == 0);

  // evaluate: perfect toy dataset reports 1.0 everywhere.
  auto ev = run_cli("evaluate" + io + " --checkpoint " +
                        (dir / "run" / "checkpoint.bin").string() + " --out " +
                        (dir / "eval").string(),
                    dir.path());
  REQUIRE(ev.exit_code == 0);
  CHECK(ev.output.find("1.0000") != std::string::npos);
  CHECK(std::filesystem::exists(dir / "eval" / "report.json"));
  CHECK(std::filesystem::exists(dir / "eval" / "confusion_sa.csv"));

  // evaluate rerun determinism.
  REQUIRE(run_cli("evaluate" + io + " --checkpoint " +
                      (dir / "run" / "checkpoint.bin").string() + " --out " +
                      (dir / "eval2").string(),
                  dir.path())
              .exit_code == 0);
  CHECK(testutil::read_file(dir / "eval" / "report.json") ==
        testutil::read_file(dir / "eval2" / "report.json"));

  // absent checkpoint -> usage error.
  CHECK(run_cli("evaluate" + io + " --checkpoint /nonexistent.bin --out " +
                    (dir / "evx").string(),
                dir.path())
            .exit_code == 2);

  // embed: word export round-trips to printed precision; sentence exports
  // have one row per corpus sentence.
  REQUIRE(run_cli("embed" + io + " --checkpoint " +
                      (dir / "run" / "checkpoint.bin").string() +
                      " --target words --out " + (dir / "words.vec").string(),
                  dir.path())
              .exit_code == 0);
  const EmbeddingTable words = load_word2vec_text(dir / "words.vec");
  CHECK(words.dim() == 16);
  {
    testutil::TempDir dir2;
    save_word2vec_text(words, dir2 / "again.vec");
    CHECK(testutil::read_file(dir / "words.vec") ==
          testutil::read_file(dir2 / "again.vec"));
  }

  REQUIRE(run_cli("embed" + io + " --checkpoint " +
                      (dir / "run" / "checkpoint.bin").string() +
                      " --target sentences-gae --out " +
                      (dir / "sent.vec").string(),
                  dir.path())
              .exit_code == 0);
  CHECK(load_word2vec_text(dir / "sent.vec").size() == 60);

  REQUIRE(run_cli("embed" + io + " --checkpoint " +
                      (dir / "run" / "checkpoint.bin").string() +
                      " --target sentences-avg --out " +
                      (dir / "avg.vec").string(),
                  dir.path())
              .exit_code == 0);
  const EmbeddingTable avg = load_word2vec_text(dir / "avg.vec");
  CHECK(avg.size() == 60);
  // sentences-avg equals the mean of the exported word vectors.
  LabeledCorpus corpus = load_corpus(dir / "c.jsonl", CorpusFormat::Jsonl);
  Vocabulary vocab = load_vocabulary(dir / "g" / "vocab.tsv");
  apply_vocabulary(corpus, vocab);
  Matrix z_words(words.size(), words.dim());
  for (std::size_t w = 0; w < vocab.size(); ++w) {
    const auto row = words.row_of(vocab.index_to_token[w]);
    REQUIRE(row.has_value());
    for (std::size_t d = 0; d < words.dim(); ++d)
      z_words(w, d) = words.vectors(*row, d);
  }
  const Matrix expected = embed_sentences_from_words(z_words, corpus);
  for (std::size_t s = 0; s < avg.size(); ++s) {
    const auto row = avg.row_of(sentence_key(s));
    REQUIRE(row.has_value());
    for (std::size_t d = 0; d < avg.dim(); ++d)
      CHECK(avg.vectors(*row, d) ==
            doctest::Approx(expected(s, d)).epsilon(1e-12));
  }

  // neighbors on the word export.
  const std::string some_word = vocab.index_to_token[0];
  auto nn = run_cli("neighbors --embeddings " + (dir / "words.vec").string() +
                        " --query " + some_word + " --k 3",
                    dir.path());
  REQUIRE(nn.exit_code == 0);
  int lines = 0;
  std::stringstream ss(nn.output);
  std::string line;
  while (std::getline(ss, line))
    if (!line.empty()) ++lines;
  CHECK(lines == 3);

  CHECK(run_cli("neighbors --embeddings " + (dir / "words.vec").string() +
                    " --query definitely_not_a_token",
                dir.path())
            .exit_code == 2);
}

TEST_CASE("cli: sweep-lambda emits one row per lambda, duplicates identical") {
  testutil::TempDir dir;
  write_toy_corpus(dir / "c.jsonl", 40);
  REQUIRE(run_cli("build-graph --corpus " + (dir / "c.jsonl").string() +
                      " --graph-kind ws --out " + (dir / "g").string(),
                  dir.path())
              .exit_code == 0);
  const auto r = run_cli(
      "sweep-lambda --corpus " + (dir / "c.jsonl").string() + " --graph " +
          (dir / "g" / "graph.tg1").string() + " --vocab " +
          (dir / "g" / "vocab.tsv").string() +
          " --embed-dim 8 --max-epochs 4 --patience 4 --folds 2 --seed 3"
          " --lambdas 0,0.2,0.2 --out " +
          (dir / "sweep").string(),
      dir.path());
  REQUIRE(r.exit_code == 0);
  std::ifstream csv(dir / "sweep" / "sweep.csv");
  std::string header, row0, row1, row2;
  std::getline(csv, header);
  std::getline(csv, row0);
  std::getline(csv, row1);
  std::getline(csv, row2);
  CHECK(header.find("lambda,l_mse,l_cla") == 0);
  CHECK(row1.substr(row1.find(',')) == row2.substr(row2.find(',')));
  CHECK(std::filesystem::exists(dir / "sweep" / "history_0.csv"));
  CHECK(std::filesystem::exists(dir / "sweep" / "history_2.csv"));
}

TEST_CASE("cli: walks produces valid walks and embeddings") {
  testutil::TempDir dir;
  write_toy_corpus(dir / "c.jsonl", 30);
  REQUIRE(run_cli("build-graph --corpus " + (dir / "c.jsonl").string() +
                      " --graph-kind ws --out " + (dir / "g").string(),
                  dir.path())
              .exit_code == 0);
  const auto r = run_cli(
      "walks --graph " + (dir / "g" / "graph.tg1").string() + " --vocab " +
          (dir / "g" / "vocab.tsv").string() +
          " --walks-per-node 2 --walk-length 8 --dim 8 --epochs 1 --out " +
          (dir / "w").string(),
      dir.path());
  REQUIRE(r.exit_code == 0);

  const Vocabulary vocab = load_vocabulary(dir / "g" / "vocab.tsv");
  const std::size_t n_nodes = vocab.size() + 30;
  std::ifstream walks(dir / "w" / "walks.txt");
  std::size_t n_lines = 0;
  std::string line;
  while (std::getline(walks, line)) {
    std::stringstream ss(line);
    std::size_t node, count = 0;
    while (ss >> node) {
      CHECK(node < n_nodes);
      ++count;
    }
    CHECK(count == 8);
    ++n_lines;
  }
  CHECK(n_lines == 2 * n_nodes);
  CHECK(load_word2vec_text(dir / "w" / "embeddings.vec").size() == n_nodes);

  // determinism
  REQUIRE(run_cli(
              "walks --graph " + (dir / "g" / "graph.tg1").string() +
                  " --vocab " + (dir / "g" / "vocab.tsv").string() +
                  " --walks-per-node 2 --walk-length 8 --dim 8 --epochs 1"
                  " --out " +
                  (dir / "w2").string(),
              dir.path())
              .exit_code == 0);
  CHECK(testutil::read_file(dir / "w" / "walks.txt") ==
        testutil::read_file(dir / "w2" / "walks.txt"));
  CHECK(testutil::read_file(dir / "w" / "embeddings.vec") ==
        testutil::read_file(dir / "w2" / "embeddings.vec"));
}

TEST_CASE("cli: sentence graph from pretrained vectors trains end to end") {
  testutil::TempDir dir;
  testutil::TwoClusterSpec spec;
  spec.n_sentences = 30;
  spec.words_per_subcluster = 8;
  spec.seed = 12;
  const LabeledCorpus corpus = testutil::two_cluster_corpus(spec);
  testutil::write_jsonl(corpus, dir / "c.jsonl");

  // Pretrained word vectors: random but fixed, one row per token.
  {
    LabeledCorpus copy = corpus;
    const Vocabulary vocab = build_vocabulary(copy, 1);
    Rng rng(6);
    Matrix vec(vocab.size(), 8);
    for (double& v : vec.data) v = rng.uniform(-1, 1);
    save_word2vec_text(
        EmbeddingTable::from_rows(std::move(vec), vocab.index_to_token),
        dir / "w2v.vec");
  }

  REQUIRE(run_cli("build-graph --corpus " + (dir / "c.jsonl").string() +
                      " --graph-kind s --k-neighbors 5 --word-vectors " +
                      (dir / "w2v.vec").string() + " --out " +
                      (dir / "g").string(),
                  dir.path())
              .exit_code == 0);
  const std::string stats = testutil::read_file(dir / "g" / "stats.json");
  CHECK(stats.find("\"kind\": \"s\"") != std::string::npos);
  CHECK(stats.find("\"n_nodes\": 30") != std::string::npos);

  REQUIRE(run_cli("train --corpus " + (dir / "c.jsonl").string() +
                      " --graph " + (dir / "g" / "graph.tg1").string() +
                      " --vocab " + (dir / "g" / "vocab.tsv").string() +
                      " --tasks sa --embed-dim 8 --max-epochs 3 --patience 3"
                      " --folds 2 --seed 3 --out " +
                      (dir / "run").string(),
                  dir.path())
              .exit_code == 0);

  // Word export is impossible on a sentence-only graph.
  CHECK(run_cli("embed --corpus " + (dir / "c.jsonl").string() + " --graph " +
                    (dir / "g" / "graph.tg1").string() + " --vocab " +
                    (dir / "g" / "vocab.tsv").string() + " --checkpoint " +
                    (dir / "run" / "checkpoint.bin").string() +
                    " --target words --out " + (dir / "x.vec").string(),
                dir.path())
            .exit_code == 2);
}

TEST_CASE("cli: evaluate --cv trains every fold") {
  testutil::TempDir dir;
  write_toy_corpus(dir / "c.jsonl", 40);
  const auto r = run_cli(
      "evaluate --cv --corpus " + (dir / "c.jsonl").string() +
          " --graph-kind ws --tasks sa --embed-dim 8 --max-epochs 4"
          " --patience 4 --folds 2 --seed 3 --out " +
          (dir / "cv").string(),
      dir.path());
  REQUIRE(r.exit_code == 0);
  const std::string json = testutil::read_file(dir / "cv" / "report.json");
  CHECK(json.find("\"k\": 2") != std::string::npos);
  CHECK(json.find("\"fold\": 1") != std::string::npos);
}

TEST_CASE("cli: bad flags and unknown subcommands exit 2") {
  testutil::TempDir dir;
  CHECK(run_cli("definitely-not-a-subcommand", dir.path()).exit_code == 2);
  CHECK(run_cli("train --no-such-flag", dir.path()).exit_code == 2);
  CHECK(run_cli("build-graph", dir.path()).exit_code == 2);  // missing required
}

TEST_CASE("cli: corrupt graph file is a usage error") {
  testutil::TempDir dir;
  write_toy_corpus(dir / "c.jsonl", 30);
  // Out-of-bounds entry in an otherwise well-formed tg1 file.
  std::ofstream(dir / "bad.tg1") << "tg1 ws 4 4 1 1\n9 9 1.0\n";
  std::ofstream(dir / "v.tsv") << "a\t1\nb\t1\n";
  const auto r = run_cli("train --corpus " + (dir / "c.jsonl").string() +
                             " --graph " + (dir / "bad.tg1").string() +
                             " --vocab " + (dir / "v.tsv").string() +
                             " --out " + (dir / "o").string(),
                         dir.path());
  CHECK(r.exit_code == 2);
  CHECK(r.output.find("tg1") != std::string::npos);
}

TEST_CASE("cli: config file drives options, unknown keys rejected") {
  testutil::TempDir dir;
  write_toy_corpus(dir / "c.jsonl", 30);
  std::ofstream(dir / "ok.ini") << "[build-graph]\n"
                                << "corpus=" << (dir / "c.jsonl").string()
                                << "\n"
                                << "graph-kind=w\n"
                                << "window-size=2\n"
                                << "out=" << (dir / "gc").string() << "\n";
  const auto ok =
      run_cli("--config " + (dir / "ok.ini").string() + " build-graph",
              dir.path());
  REQUIRE(ok.exit_code == 0);
  CHECK(testutil::read_file(dir / "gc" / "stats.json").find("\"kind\": \"w\"") !=
        std::string::npos);

  std::ofstream(dir / "bad.ini") << "[build-graph]\n"
                                 << "corpus=" << (dir / "c.jsonl").string()
                                 << "\n"
                                 << "out=" << (dir / "gx").string() << "\n"
                                 << "definitely_unknown_key=1\n";
  CHECK(run_cli("--config " + (dir / "bad.ini").string() + " build-graph",
                dir.path())
            .exit_code == 2);
}
