#include "textgcn/mtl.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <stdexcept>

#include "textgcn/error.hpp"
#include "textgcn/metrics.hpp"

namespace textgcn {

void TrainConfig::validate() const {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw UsageError("lambda must be finite and >= 0");
  if (max_epochs < 1) throw UsageError("max_epochs must be at least 1");
  if (patience < 1 || patience > max_epochs)
    throw UsageError("patience must be in [1, max_epochs]");
  if (dropout < 0.0 || dropout >= 1.0)
    throw UsageError("dropout must be in [0, 1)");
  if (embed_dim < 1) throw UsageError("embed_dim must be at least 1");
  for (std::size_t i = 0; i < tasks.size(); ++i)
    for (std::size_t j = i + 1; j < tasks.size(); ++j)
      if (tasks[i] == tasks[j]) throw UsageError("duplicate task in task set");
}

Matrix head_forward(const Matrix& z, std::span<const std::size_t> rows,
                    const Matrix& weight) {
  if (z.cols != weight.rows)
    throw std::logic_error("head_forward: embedding/head shape mismatch");
  Matrix scores(rows.size(), weight.cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    const double* zrow = z.data.data() + rows[r] * z.cols;
    double* srow = scores.data.data() + r * scores.cols;
    for (std::size_t k = 0; k < z.cols; ++k) {
      const double zk = zrow[k];
      if (zk == 0.0) continue;
      const double* wrow = weight.data.data() + k * weight.cols;
      for (std::size_t c = 0; c < weight.cols; ++c) srow[c] += zk * wrow[c];
    }
  }
  return scores;
}

namespace {

// Stable binary cross-entropy from a logit: max(s,0) - s*y + log(1+e^-|s|).
double bce_from_logit(double s, double y) {
  return std::max(s, 0.0) - s * y + std::log1p(std::exp(-std::abs(s)));
}

}  // namespace

double sigmoid_cross_entropy(const Matrix& scores, std::span<const int> gold,
                             std::span<const std::uint8_t> mask) {
  if (scores.rows != gold.size())
    throw std::logic_error("sigmoid_cross_entropy: row/label mismatch");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t r = 0; r < scores.rows; ++r) {
    if (!mask.empty() && mask[r] == 0) continue;
    const int y = gold[r];
    if (y < 0 || static_cast<std::size_t>(y) >= scores.cols)
      throw std::logic_error("sigmoid_cross_entropy: label out of range");
    for (std::size_t c = 0; c < scores.cols; ++c)
      sum += bce_from_logit(scores(r, c), c == static_cast<std::size_t>(y) ? 1.0 : 0.0);
    ++n;
  }
  if (n == 0) throw std::invalid_argument("sigmoid_cross_entropy: no rows");
  return sum / static_cast<double>(n);
}

double multitask_loss(std::span<const TaskLossInput> tasks) {
  double sum = 0.0;
  std::size_t active = 0;
  for (const TaskLossInput& t : tasks) {
    std::size_t present = 0;
    if (t.mask.empty()) {
      present = t.scores.rows;
    } else {
      for (std::uint8_t m : t.mask) present += m != 0;
    }
    if (present == 0) continue;
    sum += t.weight * sigmoid_cross_entropy(t.scores, t.labels, t.mask);
    ++active;
  }
  if (active == 0)
    throw std::invalid_argument("multitask_loss: all tasks empty");
  return sum / static_cast<double>(active);
}

double joint_loss(double l_mse, double l_cla, double lambda) {
  return l_mse + lambda * l_cla;
}

std::vector<TaskSupervision> build_supervision(
    const TextGraph& graph, const LabeledCorpus& corpus,
    std::span<const Split> splits, Split which, std::span<const Task> tasks,
    const std::array<double, kTaskCount>& weights) {
  std::vector<TaskSupervision> out;
  for (Task t : tasks) {
    TaskSupervision sup;
    sup.task = t;
    sup.weight = weights[static_cast<std::size_t>(t)];
    for (const SentenceRecord& rec : corpus.records) {
      if (splits[rec.id] != which) continue;
      const auto label = rec.label(t);
      if (!label) continue;
      sup.rows.push_back(graph.sentence_row(rec.id));
      sup.gold.push_back(*label);
    }
    out.push_back(std::move(sup));
  }
  return out;
}

namespace {

std::size_t count_active(std::span<const TaskSupervision> sup) {
  std::size_t n = 0;
  for (const TaskSupervision& t : sup)
    if (!t.rows.empty()) ++n;
  return n;
}

// Classification loss over supervision, optionally accumulating gradients
// of lambda * L_CLA into grad_z and head gradients.
double classification_term(const GcnModel& model, const Matrix& z,
                           std::span<const TaskSupervision> sup, double lambda,
                           Matrix* grad_z, std::vector<Matrix>* grad_heads) {
  const std::size_t n_active = count_active(sup);
  if (n_active == 0) return 0.0;

  double l_cla = 0.0;
  for (const TaskSupervision& t : sup) {
    if (t.rows.empty()) continue;
    const TaskHead* head = nullptr;
    std::size_t head_idx = 0;
    for (std::size_t h = 0; h < model.heads.size(); ++h)
      if (model.heads[h].task == t.task) {
        head = &model.heads[h];
        head_idx = h;
        break;
      }
    if (head == nullptr)
      throw std::logic_error("classification_term: no head for task");

    Matrix scores = head_forward(z, t.rows, head->weight);
    l_cla += t.weight * sigmoid_cross_entropy(scores, t.gold);

    if (grad_z != nullptr && lambda > 0.0) {
      // dL/dscores = scale * (sigmoid(scores) - onehot)
      const double scale = lambda * t.weight /
                           (static_cast<double>(n_active) *
                            static_cast<double>(t.rows.size()));
      Matrix g(scores.rows, scores.cols);
      for (std::size_t r = 0; r < scores.rows; ++r)
        for (std::size_t c = 0; c < scores.cols; ++c) {
          const double y = c == static_cast<std::size_t>(t.gold[r]) ? 1.0 : 0.0;
          g(r, c) = scale * (sigmoid(scores(r, c)) - y);
        }
      // head grad += Z_rowsᵀ g ; grad_z rows += g headᵀ
      Matrix& gh = (*grad_heads)[head_idx];
      for (std::size_t r = 0; r < g.rows; ++r) {
        const double* zrow = z.data.data() + t.rows[r] * z.cols;
        double* gzrow = grad_z->data.data() + t.rows[r] * z.cols;
        const double* grow = g.data.data() + r * g.cols;
        for (std::size_t k = 0; k < z.cols; ++k) {
          const double* wrow = head->weight.data.data() + k * g.cols;
          double* ghrow = gh.data.data() + k * g.cols;
          double acc = 0.0;
          for (std::size_t c = 0; c < g.cols; ++c) {
            ghrow[c] += zrow[k] * grow[c];
            acc += grow[c] * wrow[c];
          }
          gzrow[k] += acc;
        }
      }
    }
  }
  return l_cla / static_cast<double>(n_active);
}

}  // namespace

StepResult forward_backward(const TextGraph& graph, GcnModel& model,
                            std::span<const TaskSupervision> supervision,
                            const TrainConfig& cfg, bool training,
                            const CellSample* cells) {
  const SparseMatrix& a_hat = graph.normalized;
  const SparseMatrix& target = graph.normalized;
  const std::size_t n = a_hat.n_rows();
  const std::size_t kdim = model.embed_dim;
  if (model.w0.rows != n)
    throw std::logic_error("forward_backward: model/graph size mismatch");

  const double p = training ? cfg.dropout : 0.0;
  EncodeCache cache =
      encode_train(a_hat, model.w0, p, model.train_rng, cfg.n_threads);

  StepResult out;
  out.grads.w0 = Matrix(n, kdim);
  if (model.decoder == DecoderMode::Gcn) out.grads.w1 = Matrix(kdim, n);
  out.grads.heads.clear();
  for (const TaskHead& h : model.heads)
    out.grads.heads.emplace_back(h.weight.rows, h.weight.cols);

  Matrix grad_z(n, kdim);

  if (model.decoder == DecoderMode::Gcn) {
    const Matrix q = a_hat.multiply(cache.z, cfg.n_threads);
    Matrix grad_q(n, kdim);
    out.l_mse = cells == nullptr
                    ? recon_term_gcn(target, q, model.w1, &grad_q,
                                     &out.grads.w1)
                    : recon_term_gcn_sampled(target, *cells, q, model.w1,
                                             &grad_q, &out.grads.w1);
    // dL/dZ += Âᵀ (dL/dQ); Â is symmetric.
    grad_z = a_hat.multiply(grad_q, cfg.n_threads);
  } else {
    out.l_mse = cells == nullptr
                    ? recon_term_inner(target, cache.z, &grad_z)
                    : recon_term_inner_sampled(target, *cells, cache.z,
                                               &grad_z);
  }

  out.l_cla = classification_term(model, cache.z, supervision, cfg.lambda,
                                  &grad_z, &out.grads.heads);

  // Chain through dropout and ReLU, then dL/dW0 = Âᵀ dL/dP.
  Matrix grad_p(n, kdim);
  const bool has_dropout = !cache.dropout_scale.empty();
  for (std::size_t i = 0; i < grad_z.data.size(); ++i) {
    double g = grad_z.data[i];
    if (has_dropout) g *= cache.dropout_scale.data[i];
    grad_p.data[i] = cache.pre_activation.data[i] > 0.0 ? g : 0.0;
  }
  out.grads.w0 = a_hat.multiply(grad_p, cfg.n_threads);

  const double wd = model.adam_config.weight_decay;
  if (wd != 0.0) {
    add_scaled(out.grads.w0, model.w0, wd);
    if (!model.w1.empty()) add_scaled(out.grads.w1, model.w1, wd);
  }

  out.l_total = joint_loss(out.l_mse, out.l_cla, cfg.lambda);
  return out;
}

double model_objective(const TextGraph& graph, const GcnModel& model,
                       std::span<const TaskSupervision> supervision,
                       const TrainConfig& cfg, const CellSample* cells) {
  const SparseMatrix& a_hat = graph.normalized;
  const Matrix z = encode(a_hat, model.w0, cfg.n_threads);

  double l_mse = 0.0;
  if (model.decoder == DecoderMode::Gcn) {
    const Matrix q = a_hat.multiply(z, cfg.n_threads);
    l_mse = cells == nullptr
                ? recon_term_gcn(a_hat, q, model.w1, nullptr, nullptr)
                : recon_term_gcn_sampled(a_hat, *cells, q, model.w1, nullptr,
                                         nullptr);
  } else {
    l_mse = cells == nullptr
                ? recon_term_inner(a_hat, z, nullptr)
                : recon_term_inner_sampled(a_hat, *cells, z, nullptr);
  }

  const double l_cla =
      classification_term(model, z, supervision, cfg.lambda, nullptr, nullptr);

  double obj = joint_loss(l_mse, l_cla, cfg.lambda);
  const double wd = model.adam_config.weight_decay;
  if (wd != 0.0) {
    obj += 0.5 * wd * squared_norm(model.w0);
    if (!model.w1.empty()) obj += 0.5 * wd * squared_norm(model.w1);
  }
  return obj;
}

namespace {

struct ModelSnapshot {
  Matrix w0, w1;
  std::vector<TaskHead> heads;
  AdamState adam;
  Rng rng{0};
};

ModelSnapshot snapshot(const GcnModel& m) {
  return {m.w0, m.w1, m.heads, m.adam, m.train_rng};
}

void restore(GcnModel& m, const ModelSnapshot& s) {
  m.w0 = s.w0;
  m.w1 = s.w1;
  m.heads = s.heads;
  m.adam = s.adam;
  m.train_rng = s.rng;
}

}  // namespace

TrainResult train(const TextGraph& graph, const LabeledCorpus& corpus,
                  const FoldPlan& plan, int test_fold, const TrainConfig& cfg) {
  cfg.validate();
  if (test_fold < 0 || test_fold >= plan.k)
    throw UsageError("fold index out of range");
  if (!cfg.tasks.empty() && !graph.has_sentence_nodes())
    throw UsageError(
        "word graph has no sentence nodes; train with an empty task set and "
        "use exported embeddings with an external classifier");

  const std::vector<Split> splits = plan.splits_for(test_fold);
  const auto sup_train = build_supervision(graph, corpus, splits, Split::Train,
                                           cfg.tasks, cfg.task_weights);
  const auto sup_val = build_supervision(graph, corpus, splits, Split::Val,
                                         cfg.tasks, cfg.task_weights);
  if (!cfg.tasks.empty() && count_active(sup_train) == 0)
    throw UsageError("no labeled training sentences for any configured task");

  if (!cfg.sampled_mse && graph.n_nodes() > 20000)
    std::cerr << "warning: dense reconstruction over "
              << graph.n_nodes() * graph.n_nodes()
              << " cells; consider --sampled-mse for graphs this large\n";

  GcnModel model = GcnModel::init(graph.n_nodes(), cfg.embed_dim, cfg.decoder,
                                  cfg.tasks, cfg.adam, cfg.seed);

  TrainResult result;
  result.history.best_epoch = 0;
  double best_val = std::numeric_limits<double>::infinity();
  ModelSnapshot best = snapshot(model);
  int epochs_without_improvement = 0;

  for (int epoch = 1; epoch <= cfg.max_epochs; ++epoch) {
    CellSample cells;
    const CellSample* cptr = nullptr;
    if (cfg.sampled_mse) {
      cells = sample_cells(graph.normalized, model.train_rng);
      cptr = &cells;
    }

    StepResult step =
        forward_backward(graph, model, sup_train, cfg, true, cptr);
    if (!std::isfinite(step.l_total))
      throw std::runtime_error("divergence detected at epoch " +
                               std::to_string(epoch));
    try {
      adam_step(model, step.grads);
    } catch (const std::runtime_error& e) {
      throw std::runtime_error(std::string(e.what()) + " at epoch " +
                               std::to_string(epoch));
    }

    // Validation pass, dropout off, on post-update parameters.
    const Matrix z_eval = encode(graph.normalized, model.w0, cfg.n_threads);
    double val_mse = 0.0;
    if (model.decoder == DecoderMode::Gcn) {
      const Matrix q = graph.normalized.multiply(z_eval, cfg.n_threads);
      val_mse = cptr == nullptr
                    ? recon_term_gcn(graph.normalized, q, model.w1, nullptr,
                                     nullptr)
                    : recon_term_gcn_sampled(graph.normalized, *cptr, q,
                                             model.w1, nullptr, nullptr);
    } else {
      val_mse = cptr == nullptr
                    ? recon_term_inner(graph.normalized, z_eval, nullptr)
                    : recon_term_inner_sampled(graph.normalized, *cptr, z_eval,
                                               nullptr);
    }
    const double val_cla = classification_term(model, z_eval, sup_val,
                                               cfg.lambda, nullptr, nullptr);
    const double val_total = joint_loss(val_mse, val_cla, cfg.lambda);

    EpochRecord rec;
    rec.epoch = epoch;
    rec.l_mse = step.l_mse;
    rec.l_cla = step.l_cla;
    rec.l_total = step.l_total;
    rec.val_total = val_total;
    for (const TaskSupervision& t : sup_val) {
      if (t.rows.empty()) continue;
      const TaskHead* head = model.head_for(t.task);
      const Matrix scores = head_forward(z_eval, t.rows, head->weight);
      std::vector<int> pred(t.rows.size());
      for (std::size_t r = 0; r < scores.rows; ++r) {
        std::size_t arg = 0;
        for (std::size_t c = 1; c < scores.cols; ++c)
          if (scores(r, c) > scores(r, arg)) arg = c;
        pred[r] = static_cast<int>(arg);
      }
      rec.val_f1[static_cast<std::size_t>(t.task)] =
          f1_scores(t.gold, pred, class_count(t.task)).macro_f1;
    }
    result.history.epochs.push_back(rec);
    result.history.stopped_epoch = epoch;

    if (val_total < best_val) {
      best_val = val_total;
      result.history.best_epoch = epoch;
      best = snapshot(model);
      epochs_without_improvement = 0;
    } else {
      ++epochs_without_improvement;
      if (epochs_without_improvement >= cfg.patience) break;
    }
  }

  restore(model, best);
  result.model = std::move(model);
  return result;
}

std::vector<SweepRow> sweep_lambda(const TextGraph& graph,
                                   const LabeledCorpus& corpus,
                                   const FoldPlan& plan, int test_fold,
                                   const TrainConfig& cfg,
                                   std::span<const double> lambdas) {
  if (lambdas.empty()) throw UsageError("lambda list is empty");
  std::vector<SweepRow> rows;
  rows.reserve(lambdas.size());
  const std::vector<Split> splits = plan.splits_for(test_fold);

  for (double lambda : lambdas) {
    TrainConfig run_cfg = cfg;
    run_cfg.lambda = lambda;
    TrainResult res = train(graph, corpus, plan, test_fold, run_cfg);

    SweepRow row;
    row.lambda = lambda;
    row.best_epoch = res.history.best_epoch;
    row.stopped_epoch = res.history.stopped_epoch;

    const Matrix z_eval =
        encode(graph.normalized, res.model.w0, cfg.n_threads);
    CellSample cells;
    const CellSample* cptr = nullptr;
    if (cfg.sampled_mse) {
      Rng sample_rng(mix_seed(cfg.seed, 3));
      cells = sample_cells(graph.normalized, sample_rng);
      cptr = &cells;
    }
    if (res.model.decoder == DecoderMode::Gcn) {
      const Matrix q = graph.normalized.multiply(z_eval, cfg.n_threads);
      row.l_mse = cptr == nullptr
                      ? recon_term_gcn(graph.normalized, q, res.model.w1,
                                       nullptr, nullptr)
                      : recon_term_gcn_sampled(graph.normalized, *cptr, q,
                                               res.model.w1, nullptr, nullptr);
    } else {
      row.l_mse = cptr == nullptr
                      ? recon_term_inner(graph.normalized, z_eval, nullptr)
                      : recon_term_inner_sampled(graph.normalized, *cptr,
                                                 z_eval, nullptr);
    }
    const auto sup_train = build_supervision(
        graph, corpus, splits, Split::Train, cfg.tasks, cfg.task_weights);
    row.l_cla = classification_term(res.model, z_eval, sup_train, cfg.lambda,
                                    nullptr, nullptr);
    if (!res.history.epochs.empty()) {
      row.val_f1 = res.history.epochs[res.history.best_epoch - 1].val_f1;
    }
    row.history = std::move(res.history);
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix embed_sentences_from_words(const Matrix& z_words,
                                  const LabeledCorpus& corpus) {
  Matrix out(corpus.size(), z_words.cols);
  for (const SentenceRecord& rec : corpus.records) {
    if (rec.tokens.empty()) {
      std::cerr << "warning: sentence " << rec.id
                << " has no in-vocabulary tokens; using the zero vector\n";
      continue;
    }
    auto row = out.row(rec.id);
    for (std::size_t tok : rec.tokens) {
      auto v = z_words.row(tok);
      for (std::size_t d = 0; d < out.cols; ++d) row[d] += v[d];
    }
    const double inv = 1.0 / static_cast<double>(rec.tokens.size());
    for (std::size_t d = 0; d < out.cols; ++d) row[d] *= inv;
  }
  return out;
}

}  // namespace textgcn
