#include "textgcn/eval.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "textgcn/error.hpp"

namespace textgcn {

using ordered_json = nlohmann::ordered_json;

TextGraph build_graph(const LabeledCorpus& corpus, const Vocabulary& vocab,
                      const GraphRecipe& recipe) {
  switch (recipe.kind) {
    case GraphKind::W:
      return build_word_graph(corpus, vocab, recipe.window_size,
                              recipe.normalize, recipe.n_threads);
    case GraphKind::S:
      if (recipe.word_vectors == nullptr)
        throw UsageError("sentence graph requires pretrained word vectors");
      return build_sentence_graph(corpus, *recipe.word_vectors,
                                  recipe.k_neighbors, recipe.normalize);
    case GraphKind::WS:
      return build_ws_graph(corpus, vocab, recipe.window_size,
                            recipe.normalize, recipe.n_threads);
  }
  throw std::logic_error("build_graph: bad kind");
}

std::vector<TaskEvalResult> evaluate_model(const TextGraph& graph,
                                           const GcnModel& model,
                                           const LabeledCorpus& corpus,
                                           std::span<const Split> splits,
                                           Split which, int n_threads) {
  const Matrix z = encode(graph.normalized, model.w0, n_threads);
  std::vector<TaskEvalResult> out;
  for (const TaskHead& head : model.heads) {
    std::vector<std::size_t> rows;
    std::vector<int> gold;
    for (const SentenceRecord& rec : corpus.records) {
      if (splits[rec.id] != which) continue;
      const auto label = rec.label(head.task);
      if (!label) continue;
      rows.push_back(graph.sentence_row(rec.id));
      gold.push_back(*label);
    }
    if (rows.empty()) continue;

    const Matrix scores = head_forward(z, rows, head.weight);
    std::vector<int> pred(rows.size());
    for (std::size_t r = 0; r < scores.rows; ++r) {
      std::size_t arg = 0;
      for (std::size_t c = 1; c < scores.cols; ++c)
        if (scores(r, c) > scores(r, arg)) arg = c;
      pred[r] = static_cast<int>(arg);
    }

    TaskEvalResult res;
    res.task = head.task;
    res.n = rows.size();
    res.f1 = f1_scores(gold, pred, class_count(head.task));
    res.confusion = confusion(gold, pred, class_count(head.task));
    out.push_back(std::move(res));
  }
  return out;
}

namespace {

std::vector<TaskEvalResult> aggregate_folds(
    const std::vector<FoldResult>& folds) {
  std::vector<TaskEvalResult> agg;
  for (Task t : kAllTasks) {
    std::vector<const TaskEvalResult*> per_fold;
    for (const FoldResult& f : folds)
      for (const TaskEvalResult& r : f.tasks)
        if (r.task == t) per_fold.push_back(&r);
    if (per_fold.empty()) continue;

    TaskEvalResult a;
    a.task = t;
    const int nc = class_count(t);
    a.confusion.n_classes = nc;
    a.confusion.counts.assign(static_cast<std::size_t>(nc) * nc, 0);
    a.f1.per_class.resize(nc);
    const double inv = 1.0 / static_cast<double>(per_fold.size());
    for (const TaskEvalResult* r : per_fold) {
      a.n += r->n;
      a.f1.macro_f1 += inv * r->f1.macro_f1;
      a.f1.weighted_f1 += inv * r->f1.weighted_f1;
      for (int c = 0; c < nc; ++c) {
        a.f1.per_class[c].precision += inv * r->f1.per_class[c].precision;
        a.f1.per_class[c].recall += inv * r->f1.per_class[c].recall;
        a.f1.per_class[c].f1 += inv * r->f1.per_class[c].f1;
        a.f1.per_class[c].support += r->f1.per_class[c].support;
      }
      for (std::size_t i = 0; i < a.confusion.counts.size(); ++i)
        a.confusion.counts[i] += r->confusion.counts[i];
    }
    agg.push_back(std::move(a));
  }
  return agg;
}

}  // namespace

MetricsReport cross_validate(const LabeledCorpus& corpus,
                             const Vocabulary& vocab,
                             const GraphRecipe& recipe, const TrainConfig& cfg,
                             int k, double val_fraction) {
  const TextGraph graph = build_graph(corpus, vocab, recipe);
  const FoldPlan plan = make_folds(corpus, k, cfg.seed, val_fraction);

  MetricsReport report;
  report.k = k;
  for (int fold = 0; fold < k; ++fold) {
    TrainResult res = train(graph, corpus, plan, fold, cfg);
    FoldResult fr;
    fr.fold = fold;
    fr.tasks = evaluate_model(graph, res.model, corpus,
                              plan.splits_for(fold), Split::Test,
                              cfg.n_threads);
    report.folds.push_back(std::move(fr));
  }
  report.aggregate = aggregate_folds(report.folds);
  return report;
}

MetricsReport single_fold_report(int fold, std::vector<TaskEvalResult> tasks) {
  MetricsReport report;
  report.k = 1;
  FoldResult fr;
  fr.fold = fold;
  fr.tasks = std::move(tasks);
  report.folds.push_back(std::move(fr));
  report.aggregate = aggregate_folds(report.folds);
  return report;
}

namespace {

ordered_json task_to_json(const TaskEvalResult& r) {
  ordered_json j;
  j["task"] = task_name(r.task);
  j["n"] = r.n;
  j["macro_f1"] = r.f1.macro_f1;
  j["weighted_f1"] = r.f1.weighted_f1;
  ordered_json classes = ordered_json::array();
  for (std::size_t c = 0; c < r.f1.per_class.size(); ++c) {
    const ClassStats& s = r.f1.per_class[c];
    ordered_json cj;
    cj["class"] = class_name(r.task, static_cast<int>(c));
    cj["precision"] = s.precision;
    cj["recall"] = s.recall;
    cj["f1"] = s.f1;
    cj["support"] = s.support;
    classes.push_back(std::move(cj));
  }
  j["per_class"] = std::move(classes);
  ordered_json conf = ordered_json::array();
  for (int g = 0; g < r.confusion.n_classes; ++g) {
    ordered_json row = ordered_json::array();
    for (int p = 0; p < r.confusion.n_classes; ++p)
      row.push_back(r.confusion.at(g, p));
    conf.push_back(std::move(row));
  }
  j["confusion"] = std::move(conf);
  return j;
}

}  // namespace

std::string report_to_json(const MetricsReport& report) {
  ordered_json j;
  j["k"] = report.k;
  ordered_json folds = ordered_json::array();
  for (const FoldResult& f : report.folds) {
    ordered_json fj;
    fj["fold"] = f.fold;
    ordered_json tasks = ordered_json::array();
    for (const TaskEvalResult& r : f.tasks) tasks.push_back(task_to_json(r));
    fj["tasks"] = std::move(tasks);
    folds.push_back(std::move(fj));
  }
  j["folds"] = std::move(folds);
  ordered_json agg = ordered_json::array();
  for (const TaskEvalResult& r : report.aggregate)
    agg.push_back(task_to_json(r));
  j["aggregate"] = std::move(agg);
  return j.dump(2) + "\n";
}

std::string report_to_text(const MetricsReport& report) {
  std::ostringstream os;
  char buf[160];
  std::snprintf(buf, sizeof(buf), "%-6s %-6s %8s %10s %12s %8s\n", "task",
                "fold", "n", "macro_f1", "weighted_f1", "report");
  os << buf;
  auto line = [&](const TaskEvalResult& r, const std::string& fold) {
    // HS is reported with weighted F1 (class imbalance); others with macro.
    const double headline = r.task == Task::Hs ? r.f1.weighted_f1 : r.f1.macro_f1;
    std::snprintf(buf, sizeof(buf), "%-6s %-6s %8zu %10.4f %12.4f %8.4f\n",
                  task_name(r.task), fold.c_str(), r.n, r.f1.macro_f1,
                  r.f1.weighted_f1, headline);
    os << buf;
  };
  for (const FoldResult& f : report.folds)
    for (const TaskEvalResult& r : f.tasks) line(r, std::to_string(f.fold));
  for (const TaskEvalResult& r : report.aggregate) line(r, "mean");
  return os.str();
}

void write_confusion_csvs(const MetricsReport& report,
                          const std::filesystem::path& dir) {
  char buf[64];
  for (const TaskEvalResult& r : report.aggregate) {
    const int nc = r.confusion.n_classes;
    const std::vector<double> pct = r.confusion.row_percent();
    std::ofstream os(dir / ("confusion_" + std::string(task_name(r.task)) +
                            ".csv"),
                     std::ios::binary);
    if (!os) throw UsageError("cannot write confusion CSV in " + dir.string());
    os << "gold";
    for (int p = 0; p < nc; ++p) os << ',' << class_name(r.task, p);
    for (int p = 0; p < nc; ++p) os << ',' << class_name(r.task, p) << "_pct";
    os << '\n';
    for (int g = 0; g < nc; ++g) {
      os << class_name(r.task, g);
      for (int p = 0; p < nc; ++p) os << ',' << r.confusion.at(g, p);
      for (int p = 0; p < nc; ++p) {
        std::snprintf(buf, sizeof(buf), "%.17g",
                      pct[static_cast<std::size_t>(g) * nc + p]);
        os << ',' << buf;
      }
      os << '\n';
    }
  }
}

}  // namespace textgcn
