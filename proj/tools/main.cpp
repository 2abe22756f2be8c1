// textgcn: build text graphs, train the multi-task GCN autoencoder, train
// random-walk baselines, and evaluate everything with k-fold CV.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "textgcn/checkpoint.hpp"
#include "textgcn/corpus.hpp"
#include "textgcn/embedding.hpp"
#include "textgcn/error.hpp"
#include "textgcn/eval.hpp"
#include "textgcn/gcn.hpp"
#include "textgcn/graph.hpp"
#include "textgcn/metrics.hpp"
#include "textgcn/mtl.hpp"
#include "textgcn/walks.hpp"

namespace fs = std::filesystem;
using namespace textgcn;

namespace {

int env_threads() {
  const char* v = std::getenv("TEXTGCN_THREADS");
  if (v == nullptr) return 1;
  const int n = std::atoi(v);
  return n > 0 ? n : 1;
}

std::string fmt17(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CorpusFormat parse_format(const std::string& s) {
  if (s == "jsonl") return CorpusFormat::Jsonl;
  if (s == "tsv") return CorpusFormat::Tsv;
  throw UsageError("unknown corpus format: " + s);
}

GraphKind parse_kind(const std::string& s) {
  auto k = graph_kind_from_name(s);
  if (!k) throw UsageError("unknown graph kind: " + s);
  return *k;
}

NormalizeMode parse_normalize(const std::string& s) {
  if (s == "sym") return NormalizeMode::SymRenorm;
  if (s == "raw") return NormalizeMode::Raw;
  throw UsageError("unknown normalize mode: " + s);
}

DecoderMode parse_decoder(const std::string& s) {
  if (s == "gcn") return DecoderMode::Gcn;
  if (s == "inner") return DecoderMode::Inner;
  throw UsageError("unknown decoder: " + s);
}

std::vector<Task> parse_tasks(const std::string& s) {
  if (s.empty() || s == "none") return {};
  std::vector<Task> tasks;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    const std::string name = s.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    auto t = task_from_name(name);
    if (!t) throw UsageError("unknown task: " + name);
    tasks.push_back(*t);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return tasks;
}

std::vector<double> parse_doubles(const std::string& s) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t comma = s.find(',', start);
    const std::string item = s.substr(
        start, comma == std::string::npos ? std::string::npos : comma - start);
    try {
      out.push_back(std::stod(item));
    } catch (const std::exception&) {
      throw UsageError("not a number: " + item);
    }
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

void write_text_file(const fs::path& path, const std::string& content) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw UsageError("cannot open for writing: " + path.string());
  os << content;
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

// Per-subcommand option bundles. Defaults carry their provenance: [paper]
// values follow the published method this tool implements, [artifact]
// values are this implementation's own documented choices.
struct CorpusOpts {
  std::string path;
  std::string format = "jsonl";
  std::uint64_t min_count = 1;

  void attach(CLI::App* cmd, bool need_min_count = true) {
    cmd->add_option("--corpus", path, "labeled corpus file")->required();
    cmd->add_option("--format", format, "corpus format: jsonl|tsv [artifact: jsonl]")
        ->check(CLI::IsMember({"jsonl", "tsv"}));
    if (need_min_count)
      cmd->add_option("--min-count", min_count,
                      "drop tokens seen fewer times [artifact: 1]");
  }
};

struct GraphBuildOpts {
  std::string kind = "ws";
  int window_size = 3;
  int k_neighbors = 10;
  std::string normalize = "sym";
  std::string word_vectors;

  void attach(CLI::App* cmd) {
    cmd->add_option("--graph-kind", kind,
                    "graph kind: w|s|ws [artifact: ws]")
        ->check(CLI::IsMember({"w", "s", "ws"}));
    cmd->add_option("--window-size", window_size,
                    "co-occurrence sliding window [paper: 3]");
    cmd->add_option("--k-neighbors", k_neighbors,
                    "sentence-graph neighbors kept per node [artifact: 10]");
    cmd->add_option("--normalize", normalize,
                    "propagation matrix: sym|raw [artifact: sym]")
        ->check(CLI::IsMember({"sym", "raw"}));
    cmd->add_option("--word-vectors", word_vectors,
                    "word2vec text file (required for --graph-kind s)");
  }

  GraphRecipe recipe(const EmbeddingTable* vectors, int threads) const {
    GraphRecipe r;
    r.kind = parse_kind(kind);
    r.window_size = window_size;
    r.k_neighbors = k_neighbors;
    r.normalize = parse_normalize(normalize);
    r.word_vectors = vectors;
    r.n_threads = threads;
    return r;
  }
};

struct TrainOpts {
  double lambda = 0.2;
  int max_epochs = 100;
  int patience = 10;
  double dropout = 0.5;
  std::size_t embed_dim = 200;
  double learning_rate = 1e-3;
  double weight_decay = 5e-4;
  std::uint64_t seed = 1;
  std::string decoder = "gcn";
  std::string tasks = "sa,ei,hs,sar";
  std::string task_weights = "1,1,1,1";
  int folds = 5;
  int fold_index = 0;
  double val_fraction = 0.10;
  bool sampled_mse = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--lambda", lambda,
                    "classification weight in the joint objective [paper: 0.2]");
    cmd->add_option("--max-epochs", max_epochs, "epoch cap [paper: 100]");
    cmd->add_option("--patience", patience,
                    "early-stop patience on validation loss [paper: 10]");
    cmd->add_option("--dropout", dropout,
                    "dropout after the first layer [paper: 0.5]");
    cmd->add_option("--embed-dim", embed_dim,
                    "first-layer embedding size [paper: 200]");
    cmd->add_option("--learning-rate", learning_rate,
                    "Adam learning rate [paper: 0.001]");
    cmd->add_option("--weight-decay", weight_decay,
                    "L2 decay on W0/W1 [paper: 5e-4]");
    cmd->add_option("--seed", seed, "master seed [artifact: 1]");
    cmd->add_option("--decoder", decoder, "decoder: gcn|inner [artifact: gcn]")
        ->check(CLI::IsMember({"gcn", "inner"}));
    cmd->add_option("--tasks", tasks,
                    "comma list of sa,ei,hs,sar or 'none' [artifact: all]");
    cmd->add_option("--task-weights", task_weights,
                    "per-task loss weights, sa,ei,hs,sar order [artifact: 1s]");
    cmd->add_option("--folds", folds, "cross-validation folds [paper: 5]");
    cmd->add_option("--fold-index", fold_index,
                    "which fold is the test fold [artifact: 0]");
    cmd->add_option("--val-fraction", val_fraction,
                    "validation share of the corpus [paper: 0.10]");
    cmd->add_flag("--sampled-mse", sampled_mse,
                  "sampled reconstruction loss for large graphs [artifact]");
  }

  TrainConfig config(int threads) const {
    TrainConfig cfg;
    cfg.lambda = lambda;
    cfg.max_epochs = max_epochs;
    cfg.patience = patience;
    cfg.dropout = dropout;
    cfg.embed_dim = embed_dim;
    cfg.adam.learning_rate = learning_rate;
    cfg.adam.weight_decay = weight_decay;
    cfg.seed = seed;
    cfg.decoder = parse_decoder(decoder);
    cfg.tasks = parse_tasks(tasks);
    const std::vector<double> w = parse_doubles(task_weights);
    if (w.size() != kTaskCount)
      throw UsageError("--task-weights needs exactly 4 values");
    for (std::size_t i = 0; i < kTaskCount; ++i) cfg.task_weights[i] = w[i];
    cfg.sampled_mse = sampled_mse;
    cfg.n_threads = threads;
    return cfg;
  }
};

struct LoadedGraph {
  LabeledCorpus corpus;
  Vocabulary vocab;
  TextGraph graph;
};

LoadedGraph load_graph_inputs(const CorpusOpts& corpus_opts,
                              const std::string& graph_path,
                              const std::string& vocab_path,
                              const std::string& normalize) {
  LoadedGraph lg;
  lg.corpus = load_corpus(corpus_opts.path, parse_format(corpus_opts.format));
  lg.vocab = load_vocabulary(vocab_path);
  apply_vocabulary(lg.corpus, lg.vocab);
  Tg1File file = read_tg1_file(graph_path);
  auto kind = graph_kind_from_name(file.kind);
  if (!kind) throw UsageError("graph file has unknown kind: " + file.kind);
  lg.graph = attach_graph(*kind, std::move(file.matrix), lg.vocab.size(),
                          lg.corpus.size(), parse_normalize(normalize));
  return lg;
}

void write_history_csv(const fs::path& path, const TrainHistory& history) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw UsageError("cannot open for writing: " + path.string());
  os << "epoch,l_mse,l_cla,l_total,val_total,f1_sa,f1_ei,f1_hs,f1_sar\n";
  for (const EpochRecord& r : history.epochs) {
    os << r.epoch << ',' << fmt17(r.l_mse) << ',' << fmt17(r.l_cla) << ','
       << fmt17(r.l_total) << ',' << fmt17(r.val_total);
    for (Task t : kAllTasks) {
      const auto& f1 = r.val_f1[static_cast<std::size_t>(t)];
      os << ',';
      if (f1) os << fmt17(*f1);
    }
    os << '\n';
  }
}

void write_report_files(const MetricsReport& report, const fs::path& out) {
  write_text_file(out / "report.json", report_to_json(report));
  write_text_file(out / "report.txt", report_to_text(report));
  write_confusion_csvs(report, out);
}

std::vector<std::string> graph_node_keys(const TextGraph& graph,
                                         const Vocabulary* vocab) {
  std::vector<std::string> keys;
  keys.reserve(graph.n_nodes());
  if (graph.has_word_nodes()) {
    if (vocab == nullptr || vocab->size() != graph.n_words)
      throw UsageError("graph has word nodes; pass the matching --vocab");
    for (const std::string& tok : vocab->index_to_token) keys.push_back(tok);
  }
  for (std::size_t s = 0; s < graph.n_sentences; ++s)
    keys.push_back(sentence_key(s));
  return keys;
}

struct AppState {
  int threads = env_threads();
};

void echo_config(CLI::App& app, const fs::path& out_dir) {
  fs::create_directories(out_dir);
  write_text_file(out_dir / "config.txt", app.config_to_str(true, true));
}

int run(int argc, char** argv) {
  CLI::App app{"word/sentence text-graph GCN autoencoder with multi-task "
               "classification heads, random-walk baselines, and k-fold "
               "evaluation"};
  app.require_subcommand(1);
  app.set_config("--config", "", "key=value configuration file; command-line "
                                 "flags override it");
  app.allow_config_extras(CLI::config_extras_mode::error);

  AppState st;

  // ---- build-graph ----
  auto* cmd_build = app.add_subcommand(
      "build-graph", "build a word/sentence/word+sentence graph");
  CorpusOpts bg_corpus;
  GraphBuildOpts bg_graph;
  std::string bg_out;
  bg_corpus.attach(cmd_build);
  bg_graph.attach(cmd_build);
  cmd_build->add_option("--out", bg_out, "output directory")->required();

  cmd_build->callback([&] {
    LabeledCorpus corpus =
        load_corpus(bg_corpus.path, parse_format(bg_corpus.format));
    Vocabulary vocab = build_vocabulary(corpus, bg_corpus.min_count);
    std::optional<EmbeddingTable> vectors;
    if (!bg_graph.word_vectors.empty())
      vectors = load_word2vec_text(bg_graph.word_vectors);
    const TextGraph graph = build_graph(
        corpus, vocab,
        bg_graph.recipe(vectors ? &*vectors : nullptr, st.threads));

    const fs::path out(bg_out);
    echo_config(app, out);
    write_tg1_file((out / "graph.tg1").string(), graph.adjacency,
                   graph_kind_name(graph.kind));
    save_vocabulary(vocab, out / "vocab.tsv");

    // Block-wise edge statistics (undirected counts, diagonal separate).
    std::size_t self_loops = 0, ww = 0, ws = 0, ss = 0;
    const std::size_t nw = graph.n_words;
    for (std::size_t r = 0; r < graph.adjacency.n_rows(); ++r) {
      for (std::size_t c : graph.adjacency.row_cols(r)) {
        if (r == c) {
          ++self_loops;
        } else if (r < c) {
          const bool rw = graph.has_word_nodes() && r < nw;
          const bool cw = graph.has_word_nodes() && c < nw;
          if (rw && cw)
            ++ww;
          else if (!rw && !cw)
            ++ss;
          else
            ++ws;
        }
      }
    }
    nlohmann::ordered_json stats;
    stats["kind"] = graph_kind_name(graph.kind);
    stats["n_nodes"] = graph.n_nodes();
    stats["n_words"] = graph.n_words;
    stats["n_sentences"] = graph.n_sentences;
    stats["nnz"] = graph.adjacency.nnz();
    stats["self_loops"] = self_loops;
    stats["pmi_edges"] = ww;
    stats["tfidf_edges"] = ws;
    stats["similarity_edges"] = ss;
    write_text_file(out / "stats.json", stats.dump(2) + "\n");
    std::cout << stats.dump(2) << "\n";
  });

  // ---- train ----
  auto* cmd_train = app.add_subcommand(
      "train", "train the GCN autoencoder with multi-task heads");
  CorpusOpts tr_corpus;
  TrainOpts tr_opts;
  std::string tr_graph, tr_vocab, tr_normalize = "sym", tr_out;
  tr_corpus.attach(cmd_train, false);
  tr_opts.attach(cmd_train);
  cmd_train->add_option("--graph", tr_graph, "tg1 graph file")->required();
  cmd_train->add_option("--vocab", tr_vocab, "vocabulary file")->required();
  cmd_train->add_option("--normalize", tr_normalize,
                        "propagation matrix: sym|raw [artifact: sym]")
      ->check(CLI::IsMember({"sym", "raw"}));
  cmd_train->add_option("--out", tr_out, "output directory")->required();

  cmd_train->callback([&] {
    LoadedGraph lg =
        load_graph_inputs(tr_corpus, tr_graph, tr_vocab, tr_normalize);
    const TrainConfig cfg = tr_opts.config(st.threads);
    const FoldPlan plan =
        make_folds(lg.corpus, tr_opts.folds, cfg.seed, tr_opts.val_fraction);
    TrainResult res = train(lg.graph, lg.corpus, plan, tr_opts.fold_index, cfg);

    const fs::path out(tr_out);
    echo_config(app, out);
    write_history_csv(out / "history.csv", res.history);

    Checkpoint ckpt;
    ckpt.graph_kind = lg.graph.kind;
    ckpt.n_words = lg.graph.n_words;
    ckpt.n_sentences = lg.graph.n_sentences;
    ckpt.normalize = parse_normalize(tr_normalize);
    ckpt.k_folds = tr_opts.folds;
    ckpt.fold_index = tr_opts.fold_index;
    ckpt.val_fraction = tr_opts.val_fraction;
    ckpt.config = cfg;
    ckpt.model = std::move(res.model);
    save_checkpoint(ckpt, out / "checkpoint.bin");

    std::cout << "best_epoch=" << res.history.best_epoch
              << " stopped_epoch=" << res.history.stopped_epoch;
    if (!res.history.epochs.empty()) {
      const EpochRecord& last =
          res.history.epochs[res.history.best_epoch - 1];
      std::cout << " l_mse=" << last.l_mse << " l_cla=" << last.l_cla
                << " val_total=" << last.val_total;
    }
    std::cout << "\n";
  });

  // ---- evaluate ----
  auto* cmd_eval = app.add_subcommand(
      "evaluate", "evaluate a checkpoint on its test fold, or run full "
                  "cross-validation with --cv");
  CorpusOpts ev_corpus;
  TrainOpts ev_train;
  GraphBuildOpts ev_graph;
  std::string ev_checkpoint, ev_graph_file, ev_vocab, ev_out;
  bool ev_cv = false;
  int ev_fold_override = -1;
  ev_corpus.attach(cmd_eval);
  ev_train.attach(cmd_eval);
  ev_graph.attach(cmd_eval);
  cmd_eval->add_option("--checkpoint", ev_checkpoint,
                       "checkpoint to evaluate (non-CV mode)");
  cmd_eval->add_option("--graph", ev_graph_file,
                       "tg1 graph file (non-CV mode)");
  cmd_eval->add_option("--vocab", ev_vocab, "vocabulary file (non-CV mode)");
  cmd_eval->add_flag("--cv", ev_cv,
                     "train and evaluate every fold (ignores --checkpoint)");
  cmd_eval->add_option("--eval-fold", ev_fold_override,
                       "override the checkpoint's test fold");
  cmd_eval->add_option("--out", ev_out, "output directory")->required();

  cmd_eval->callback([&] {
    const fs::path out(ev_out);
    MetricsReport report;
    if (ev_cv) {
      LabeledCorpus corpus =
          load_corpus(ev_corpus.path, parse_format(ev_corpus.format));
      Vocabulary vocab = build_vocabulary(corpus, ev_corpus.min_count);
      std::optional<EmbeddingTable> vectors;
      if (!ev_graph.word_vectors.empty())
        vectors = load_word2vec_text(ev_graph.word_vectors);
      const TrainConfig cfg = ev_train.config(st.threads);
      report = cross_validate(
          corpus, vocab,
          ev_graph.recipe(vectors ? &*vectors : nullptr, st.threads), cfg,
          ev_train.folds, ev_train.val_fraction);
    } else {
      if (ev_checkpoint.empty() || ev_graph_file.empty() || ev_vocab.empty())
        throw UsageError(
            "evaluate needs --checkpoint, --graph, and --vocab (or --cv)");
      Checkpoint ckpt = load_checkpoint(ev_checkpoint);
      CorpusOpts opts = ev_corpus;
      LoadedGraph lg = load_graph_inputs(
          opts, ev_graph_file, ev_vocab,
          ckpt.normalize == NormalizeMode::SymRenorm ? "sym" : "raw");
      if (lg.graph.kind != ckpt.graph_kind ||
          lg.graph.n_nodes() != ckpt.model.n_nodes)
        throw UsageError("checkpoint does not match this graph");
      const FoldPlan plan = make_folds(lg.corpus, ckpt.k_folds,
                                       ckpt.config.seed, ckpt.val_fraction);
      const int fold =
          ev_fold_override >= 0 ? ev_fold_override : ckpt.fold_index;
      if (fold >= ckpt.k_folds) throw UsageError("fold index out of range");
      report = single_fold_report(
          fold, evaluate_model(lg.graph, ckpt.model, lg.corpus,
                               plan.splits_for(fold), Split::Test,
                               st.threads));
    }
    echo_config(app, out);
    write_report_files(report, out);
    std::cout << report_to_text(report);
  });

  // ---- embed ----
  auto* cmd_embed = app.add_subcommand(
      "embed", "export learned embeddings in word2vec text format");
  CorpusOpts em_corpus;
  std::string em_checkpoint, em_graph, em_vocab, em_target = "words", em_out;
  em_corpus.attach(cmd_embed, false);
  cmd_embed->add_option("--checkpoint", em_checkpoint, "trained checkpoint")
      ->required();
  cmd_embed->add_option("--graph", em_graph, "tg1 graph file")->required();
  cmd_embed->add_option("--vocab", em_vocab, "vocabulary file")->required();
  cmd_embed
      ->add_option("--target", em_target,
                   "words | sentences-gae | sentences-avg")
      ->check(CLI::IsMember({"words", "sentences-gae", "sentences-avg"}));
  cmd_embed->add_option("--out", em_out, "output .vec file")->required();

  cmd_embed->callback([&] {
    Checkpoint ckpt = load_checkpoint(em_checkpoint);
    LoadedGraph lg = load_graph_inputs(
        em_corpus, em_graph, em_vocab,
        ckpt.normalize == NormalizeMode::SymRenorm ? "sym" : "raw");
    if (lg.graph.kind != ckpt.graph_kind ||
        lg.graph.n_nodes() != ckpt.model.n_nodes)
      throw UsageError("checkpoint does not match this graph");
    const Matrix z = encode(lg.graph.normalized, ckpt.model.w0, st.threads);

    Matrix rows;
    std::vector<std::string> keys;
    if (em_target == "words") {
      if (!lg.graph.has_word_nodes())
        throw UsageError("graph has no word nodes");
      rows = Matrix(lg.graph.n_words, z.cols);
      std::copy_n(z.data.begin(), rows.data.size(), rows.data.begin());
      keys = lg.vocab.index_to_token;
    } else if (em_target == "sentences-gae") {
      if (!lg.graph.has_sentence_nodes())
        throw UsageError("graph has no sentence nodes");
      rows = Matrix(lg.graph.n_sentences, z.cols);
      for (std::size_t s = 0; s < lg.graph.n_sentences; ++s) {
        auto src = z.row(lg.graph.sentence_row(s));
        std::copy(src.begin(), src.end(), rows.row(s).begin());
      }
      for (std::size_t s = 0; s < lg.graph.n_sentences; ++s)
        keys.push_back(sentence_key(s));
    } else {  // sentences-avg
      if (!lg.graph.has_word_nodes())
        throw UsageError("sentences-avg needs word nodes");
      Matrix z_words(lg.graph.n_words, z.cols);
      std::copy_n(z.data.begin(), z_words.data.size(), z_words.data.begin());
      rows = embed_sentences_from_words(z_words, lg.corpus);
      for (std::size_t s = 0; s < lg.corpus.size(); ++s)
        keys.push_back(sentence_key(s));
    }
    save_word2vec_text(EmbeddingTable::from_rows(std::move(rows),
                                                 std::move(keys)),
                       em_out);
  });

  // ---- neighbors ----
  auto* cmd_nn = app.add_subcommand(
      "neighbors", "top-k nearest tokens by cosine similarity");
  std::string nn_embeddings, nn_query;
  std::size_t nn_k = 8;
  cmd_nn->add_option("--embeddings", nn_embeddings, "word2vec text file")
      ->required();
  cmd_nn->add_option("--query", nn_query, "query token")->required();
  cmd_nn->add_option("--k", nn_k, "neighbors to return [paper: 8]");

  cmd_nn->callback([&] {
    const EmbeddingTable table = load_word2vec_text(nn_embeddings);
    for (const auto& [key, cos] : nearest_neighbors(table, nn_query, nn_k))
      std::cout << key << '\t' << fmt17(cos) << '\n';
  });

  // ---- sweep-lambda ----
  auto* cmd_sweep = app.add_subcommand(
      "sweep-lambda", "train once per lambda and tabulate the loss trade-off");
  CorpusOpts sw_corpus;
  TrainOpts sw_opts;
  std::string sw_graph, sw_vocab, sw_normalize = "sym", sw_out;
  std::string sw_lambdas = "0,0.2,0.5,1.0";
  sw_corpus.attach(cmd_sweep, false);
  sw_opts.attach(cmd_sweep);
  cmd_sweep->add_option("--graph", sw_graph, "tg1 graph file")->required();
  cmd_sweep->add_option("--vocab", sw_vocab, "vocabulary file")->required();
  cmd_sweep->add_option("--normalize", sw_normalize,
                        "propagation matrix: sym|raw [artifact: sym]")
      ->check(CLI::IsMember({"sym", "raw"}));
  cmd_sweep->add_option("--lambdas", sw_lambdas,
                        "comma list of lambda values [paper: Fig. 3 grid]");
  cmd_sweep->add_option("--out", sw_out, "output directory")->required();

  cmd_sweep->callback([&] {
    LoadedGraph lg =
        load_graph_inputs(sw_corpus, sw_graph, sw_vocab, sw_normalize);
    const TrainConfig cfg = sw_opts.config(st.threads);
    const FoldPlan plan =
        make_folds(lg.corpus, sw_opts.folds, cfg.seed, sw_opts.val_fraction);
    const std::vector<double> lambdas = parse_doubles(sw_lambdas);
    const std::vector<SweepRow> rows = sweep_lambda(
        lg.graph, lg.corpus, plan, sw_opts.fold_index, cfg, lambdas);

    const fs::path out(sw_out);
    echo_config(app, out);
    std::ofstream os(out / "sweep.csv", std::ios::binary);
    os << "lambda,l_mse,l_cla,f1_sa,f1_ei,f1_hs,f1_sar,best_epoch,"
          "stopped_epoch\n";
    for (std::size_t i = 0; i < rows.size(); ++i) {
      const SweepRow& r = rows[i];
      os << fmt17(r.lambda) << ',' << fmt17(r.l_mse) << ',' << fmt17(r.l_cla);
      for (Task t : kAllTasks) {
        os << ',';
        const auto& f1 = r.val_f1[static_cast<std::size_t>(t)];
        if (f1) os << fmt17(*f1);
      }
      os << ',' << r.best_epoch << ',' << r.stopped_epoch << '\n';
      write_history_csv(out / ("history_" + std::to_string(i) + ".csv"),
                        r.history);
    }
    std::cout << "swept " << rows.size() << " lambda values into " << sw_out
              << "\n";
  });

  // ---- walks ----
  auto* cmd_walks = app.add_subcommand(
      "walks", "generate DeepWalk/Node2Vec walks and train SGNS embeddings");
  std::string wk_graph, wk_vocab, wk_out;
  WalkConfig wk_cfg;
  cmd_walks->add_option("--graph", wk_graph, "tg1 graph file")->required();
  cmd_walks->add_option("--vocab", wk_vocab,
                        "vocabulary file (required when the graph has word "
                        "nodes)");
  cmd_walks->add_option("--walks-per-node", wk_cfg.walks_per_node,
                        "walks started from each node [artifact: 10]");
  cmd_walks->add_option("--walk-length", wk_cfg.walk_length,
                        "nodes per walk [artifact: 40]");
  cmd_walks->add_option("--p", wk_cfg.p, "return parameter [paper: biased walk]");
  cmd_walks->add_option("--q", wk_cfg.q, "in-out parameter [paper: biased walk]");
  cmd_walks->add_option("--sg-window", wk_cfg.sg_window,
                        "skip-gram window [artifact: 5]");
  cmd_walks->add_option("--dim", wk_cfg.dim, "embedding size [artifact: 200]");
  cmd_walks->add_option("--negatives", wk_cfg.negatives,
                        "negative samples per positive [artifact: 5]");
  cmd_walks->add_option("--epochs", wk_cfg.epochs, "SGNS epochs [artifact: 5]");
  cmd_walks->add_option("--seed", wk_cfg.seed, "master seed [artifact: 1]");
  cmd_walks->add_option("--out", wk_out, "output directory")->required();

  cmd_walks->callback([&] {
    Tg1File file = read_tg1_file(wk_graph);
    auto kind = graph_kind_from_name(file.kind);
    if (!kind) throw UsageError("graph file has unknown kind: " + file.kind);

    std::optional<Vocabulary> vocab;
    if (!wk_vocab.empty()) vocab = load_vocabulary(wk_vocab);
    std::size_t n_words = 0, n_sents = 0;
    if (*kind == GraphKind::S) {
      n_sents = file.matrix.n_rows();
    } else {
      if (!vocab)
        throw UsageError("graph has word nodes; pass the matching --vocab");
      n_words = vocab->size();
      n_sents = file.matrix.n_rows() - n_words;
    }
    TextGraph graph = attach_graph(*kind, std::move(file.matrix), n_words,
                                   n_sents, NormalizeMode::SymRenorm);

    WalkCorpus walks = generate_walks(graph.adjacency, wk_cfg, st.threads);
    walks.source_graph = wk_graph;
    const SgnsResult sgns = sgns_train(walks, wk_cfg, graph.n_nodes());

    const fs::path out(wk_out);
    echo_config(app, out);
    {
      std::ofstream os(out / "walks.txt", std::ios::binary);
      for (const auto& walk : walks.walks) {
        for (std::size_t i = 0; i < walk.size(); ++i)
          os << (i ? " " : "") << walk[i];
        os << '\n';
      }
    }
    {
      std::ofstream os(out / "sgns_loss.csv", std::ios::binary);
      os << "epoch,loss\n";
      for (std::size_t e = 0; e < sgns.epoch_losses.size(); ++e)
        os << (e + 1) << ',' << fmt17(sgns.epoch_losses[e]) << '\n';
    }
    save_word2vec_text(
        EmbeddingTable::from_rows(sgns.embeddings,
                                  graph_node_keys(graph, vocab ? &*vocab
                                                               : nullptr)),
        out / "embeddings.vec");
    std::cout << "wrote " << walks.walks.size() << " walks and "
              << graph.n_nodes() << " embeddings to " << wk_out << "\n";
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;  // user/config error
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
