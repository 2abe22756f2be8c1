#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "textgcn/matrix.hpp"
#include "textgcn/rng.hpp"
#include "textgcn/sparse.hpp"
#include "textgcn/tasks.hpp"

namespace textgcn {

// Which decoder reconstructs the graph from the latent embedding Z:
//   Gcn:   A' = sigmoid(Â Z W1)   (second GCN layer as decoder)
//   Inner: A' = sigmoid(Z Zᵀ)
enum class DecoderMode { Gcn, Inner };

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  // L2 decay on W0/W1 only, folded into gradients as wd * W.
  double weight_decay = 5e-4;
};

struct TaskHead {
  Task task = Task::Sa;
  Matrix weight;  // K x class_count(task)
};

struct AdamState {
  std::uint64_t step = 0;
  Matrix m_w0, v_w0;
  Matrix m_w1, v_w1;
  std::vector<Matrix> m_head, v_head;
};

// Two-layer GCN autoencoder with identity node features (X = I, so the
// encoder pre-activation is just Â W0 and W0's rows act as free node
// embeddings) plus optional linear task heads. The reconstruction target
// is the propagation matrix Â itself, whose entries lie in (0,1] after
// symmetric renormalization, matching the sigmoid output range.
struct GcnModel {
  DecoderMode decoder = DecoderMode::Gcn;
  std::size_t n_nodes = 0;
  std::size_t embed_dim = 0;
  Matrix w0;  // N x K
  Matrix w1;  // K x N (empty in Inner mode)
  std::vector<TaskHead> heads;
  AdamConfig adam_config;
  AdamState adam;
  Rng train_rng{0};  // dropout masks and cell sampling

  // Glorot-uniform parameters from three independent seed streams
  // (encoder/decoder, heads, training randomness), so adding or removing
  // heads never shifts the dropout stream.
  static GcnModel init(std::size_t n_nodes, std::size_t embed_dim,
                       DecoderMode decoder, std::span<const Task> tasks,
                       const AdamConfig& cfg, std::uint64_t seed);

  const TaskHead* head_for(Task t) const;
};

struct Gradients {
  Matrix w0, w1;
  std::vector<Matrix> heads;  // aligned with model.heads
};

struct EncodeCache {
  Matrix pre_activation;  // Â W0
  Matrix dropout_scale;   // per-entry 0 or 1/(1-p); empty when p = 0
  Matrix z;               // dropout(relu(pre_activation))
};

// Evaluation-mode encoder: Z = relu(Â W0).
Matrix encode(const SparseMatrix& a_hat, const Matrix& w0, int n_threads = 1);

// Training-mode encoder with inverted dropout; consumes rng only when
// dropout_p > 0.
EncodeCache encode_train(const SparseMatrix& a_hat, const Matrix& w0,
                         double dropout_p, Rng& rng, int n_threads = 1);

Matrix decode_gcn(const SparseMatrix& a_hat, const Matrix& z, const Matrix& w1,
                  int n_threads = 1);
Matrix decode_inner(const Matrix& z);

// Mean over all N*N cells of (A'_ij - A_ij)^2; absent entries count as 0.
double reconstruction_loss(const Matrix& a_prime, const SparseMatrix& target);

// Fused reconstruction loss/gradient over all N*N cells, never
// materializing A'. For the Gcn decoder pass q = Â Z; gradients (when
// requested) accumulate dL/dQ and dL/dW1. For Inner, dL/dZ.
double recon_term_gcn(const SparseMatrix& target, const Matrix& q,
                      const Matrix& w1, Matrix* grad_q, Matrix* grad_w1);
double recon_term_inner(const SparseMatrix& target, const Matrix& z,
                        Matrix* grad_z);

// Sampled MSE for large graphs: every positive cell of the target plus an
// equal number of uniformly sampled cells (with replacement) from the zero
// complement. The estimate is the exact mean over the sampled cell list.
struct CellSample {
  std::vector<std::pair<std::uint32_t, std::uint32_t>> cells;
};
CellSample sample_cells(const SparseMatrix& target, Rng& rng);

double recon_term_gcn_sampled(const SparseMatrix& target,
                              const CellSample& sample, const Matrix& q,
                              const Matrix& w1, Matrix* grad_q,
                              Matrix* grad_w1);
double recon_term_inner_sampled(const SparseMatrix& target,
                                const CellSample& sample, const Matrix& z,
                                Matrix* grad_z);

// One Adam update with bias correction over every parameter present in
// `grads` (weight decay is already inside the gradients). Throws
// "divergence detected" on non-finite gradients.
void adam_step(GcnModel& model, const Gradients& grads);

}  // namespace textgcn
