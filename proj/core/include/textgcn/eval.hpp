#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "textgcn/corpus.hpp"
#include "textgcn/graph.hpp"
#include "textgcn/metrics.hpp"
#include "textgcn/mtl.hpp"

namespace textgcn {

// How to (re)build the transductive graph over the full corpus.
struct GraphRecipe {
  GraphKind kind = GraphKind::WS;
  int window_size = 3;
  int k_neighbors = 10;
  NormalizeMode normalize = NormalizeMode::SymRenorm;
  const EmbeddingTable* word_vectors = nullptr;  // required for kind S
  int n_threads = 1;
};

TextGraph build_graph(const LabeledCorpus& corpus, const Vocabulary& vocab,
                      const GraphRecipe& recipe);

struct TaskEvalResult {
  Task task = Task::Sa;
  std::size_t n = 0;  // evaluated sentences
  F1Result f1;
  ConfusionMatrix confusion;
};

// Argmax head predictions over the labeled sentences of one split.
std::vector<TaskEvalResult> evaluate_model(const TextGraph& graph,
                                           const GcnModel& model,
                                           const LabeledCorpus& corpus,
                                           std::span<const Split> splits,
                                           Split which, int n_threads = 1);

struct FoldResult {
  int fold = 0;
  std::vector<TaskEvalResult> tasks;
};

struct MetricsReport {
  int k = 0;
  std::vector<FoldResult> folds;
  // Mean-of-folds F1 plus the pooled confusion matrix per task.
  std::vector<TaskEvalResult> aggregate;
};

// Builds the graph once over the full corpus (transductive: test sentences
// shape the structure, never the supervision), trains per fold, and
// evaluates each fold's test split.
MetricsReport cross_validate(const LabeledCorpus& corpus,
                             const Vocabulary& vocab,
                             const GraphRecipe& recipe, const TrainConfig& cfg,
                             int k, double val_fraction);

MetricsReport single_fold_report(int fold, std::vector<TaskEvalResult> tasks);

std::string report_to_json(const MetricsReport& report);
// Aligned table; the headline column follows the reporting convention of
// weighted F1 for HS and macro F1 for the other tasks.
std::string report_to_text(const MetricsReport& report);
// Per-task aggregate confusion matrices as counts and row percentages.
void write_confusion_csvs(const MetricsReport& report,
                          const std::filesystem::path& dir);

}  // namespace textgcn
