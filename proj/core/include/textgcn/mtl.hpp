#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "textgcn/corpus.hpp"
#include "textgcn/gcn.hpp"
#include "textgcn/graph.hpp"

namespace textgcn {

struct TrainConfig {
  double lambda = 0.2;
  int max_epochs = 100;
  int patience = 10;
  double dropout = 0.5;
  std::size_t embed_dim = 200;
  AdamConfig adam;
  std::uint64_t seed = 1;
  DecoderMode decoder = DecoderMode::Gcn;
  // Active tasks; empty = pure graph autoencoder, singleton = single-task.
  std::vector<Task> tasks = {Task::Sa, Task::Ei, Task::Hs, Task::Sar};
  std::array<double, kTaskCount> task_weights = {1.0, 1.0, 1.0, 1.0};
  bool sampled_mse = false;  // positives + equal sampled zeros, for large N
  int n_threads = 1;

  void validate() const;
};

struct EpochRecord {
  int epoch = 0;
  double l_mse = 0.0;
  double l_cla = 0.0;
  double l_total = 0.0;
  double val_total = 0.0;
  std::array<std::optional<double>, kTaskCount> val_f1;  // macro F1
};

struct TrainHistory {
  std::vector<EpochRecord> epochs;
  int stopped_epoch = 0;
  int best_epoch = 0;
};

// Scores = Z_rows * weight; one row per selected graph row.
Matrix head_forward(const Matrix& z, std::span<const std::size_t> rows,
                    const Matrix& weight);

// Per-row sigmoid cross-entropy against a one-hot target, summed over
// classes; rows with mask == 0 are skipped entirely (their label slots are
// never read). Returns the mean over contributing rows.
double sigmoid_cross_entropy(const Matrix& scores, std::span<const int> gold,
                             std::span<const std::uint8_t> mask = {});

struct TaskLossInput {
  Task task = Task::Sa;
  Matrix scores;
  std::vector<int> labels;
  std::vector<std::uint8_t> mask;  // empty = all labeled
  double weight = 1.0;
};

// Mean over active tasks (those with at least one unmasked row) of the
// task-weighted masked cross-entropy. Throws when every task is empty.
double multitask_loss(std::span<const TaskLossInput> tasks);

// L = L_MSE + lambda * L_MT_CLA
double joint_loss(double l_mse, double l_cla, double lambda);

// Labeled sentence rows of one task within one split.
struct TaskSupervision {
  Task task = Task::Sa;
  double weight = 1.0;
  std::vector<std::size_t> rows;  // graph rows
  std::vector<int> gold;
};

std::vector<TaskSupervision> build_supervision(
    const TextGraph& graph, const LabeledCorpus& corpus,
    std::span<const Split> splits, Split which, std::span<const Task> tasks,
    const std::array<double, kTaskCount>& weights);

struct StepResult {
  double l_mse = 0.0;
  double l_cla = 0.0;
  double l_total = 0.0;
  Gradients grads;
};

// One full-batch forward/backward pass. Dropout (and hence rng consumption)
// only when `training`; head gradients only when lambda > 0 (at lambda = 0
// the classification loss is still evaluated for reporting). `cells`
// selects the sampled-MSE estimator; null means the dense mean over N^2.
// Gradients include the L2 weight-decay term on W0/W1.
StepResult forward_backward(const TextGraph& graph, GcnModel& model,
                            std::span<const TaskSupervision> supervision,
                            const TrainConfig& cfg, bool training,
                            const CellSample* cells = nullptr);

// The scalar objective the gradients above differentiate, evaluated with
// dropout off: L_MSE + lambda*L_CLA + (wd/2)(|W0|^2 + |W1|^2). Used by the
// finite-difference checks.
double model_objective(const TextGraph& graph, const GcnModel& model,
                       std::span<const TaskSupervision> supervision,
                       const TrainConfig& cfg,
                       const CellSample* cells = nullptr);

struct TrainResult {
  GcnModel model;  // snapshot from best_epoch
  TrainHistory history;
};

// Full-batch training with early stopping on total validation loss
// (reconstruction term over the full graph, classification term over
// validation labels, dropout off). Returns the model from the best epoch.
TrainResult train(const TextGraph& graph, const LabeledCorpus& corpus,
                  const FoldPlan& plan, int test_fold, const TrainConfig& cfg);

struct SweepRow {
  double lambda = 0.0;
  double l_mse = 0.0;  // best-epoch model, evaluation mode, full target
  double l_cla = 0.0;  // best-epoch model, evaluation mode, train labels
  std::array<std::optional<double>, kTaskCount> val_f1;
  int best_epoch = 0;
  int stopped_epoch = 0;
  TrainHistory history;
};

// One full train per lambda with the same seed (rows are deterministic, so
// duplicate lambdas produce identical rows).
std::vector<SweepRow> sweep_lambda(const TextGraph& graph,
                                   const LabeledCorpus& corpus,
                                   const FoldPlan& plan, int test_fold,
                                   const TrainConfig& cfg,
                                   std::span<const double> lambdas);

// Sentence vectors as means of their tokens' embedding rows; sentences with
// no in-vocabulary tokens get the zero vector (with a warning on stderr).
Matrix embed_sentences_from_words(const Matrix& z_words,
                                  const LabeledCorpus& corpus);

}  // namespace textgcn
