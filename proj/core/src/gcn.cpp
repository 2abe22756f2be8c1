#include "textgcn/gcn.hpp"

#include <cmath>
#include <stdexcept>

namespace textgcn {

GcnModel GcnModel::init(std::size_t n_nodes, std::size_t embed_dim,
                        DecoderMode decoder, std::span<const Task> tasks,
                        const AdamConfig& cfg, std::uint64_t seed) {
  GcnModel m;
  m.decoder = decoder;
  m.n_nodes = n_nodes;
  m.embed_dim = embed_dim;
  m.adam_config = cfg;

  Rng param_rng(mix_seed(seed, 0));
  m.w0 = glorot_uniform(n_nodes, embed_dim, param_rng);
  if (decoder == DecoderMode::Gcn)
    m.w1 = glorot_uniform(embed_dim, n_nodes, param_rng);

  Rng head_rng(mix_seed(seed, 1));
  for (Task t : tasks) {
    TaskHead head;
    head.task = t;
    head.weight = glorot_uniform(embed_dim,
                                 static_cast<std::size_t>(class_count(t)),
                                 head_rng);
    m.heads.push_back(std::move(head));
  }

  m.adam.m_w0 = Matrix(m.w0.rows, m.w0.cols);
  m.adam.v_w0 = Matrix(m.w0.rows, m.w0.cols);
  if (!m.w1.empty()) {
    m.adam.m_w1 = Matrix(m.w1.rows, m.w1.cols);
    m.adam.v_w1 = Matrix(m.w1.rows, m.w1.cols);
  }
  for (const TaskHead& h : m.heads) {
    m.adam.m_head.emplace_back(h.weight.rows, h.weight.cols);
    m.adam.v_head.emplace_back(h.weight.rows, h.weight.cols);
  }

  m.train_rng = Rng(mix_seed(seed, 2));
  return m;
}

const TaskHead* GcnModel::head_for(Task t) const {
  for (const TaskHead& h : heads)
    if (h.task == t) return &h;
  return nullptr;
}

Matrix encode(const SparseMatrix& a_hat, const Matrix& w0, int n_threads) {
  if (a_hat.n_cols() != w0.rows)
    throw std::logic_error("encode: adjacency/W0 shape mismatch");
  Matrix z = a_hat.multiply(w0, n_threads);
  relu_inplace(z);
  return z;
}

EncodeCache encode_train(const SparseMatrix& a_hat, const Matrix& w0,
                         double dropout_p, Rng& rng, int n_threads) {
  if (a_hat.n_cols() != w0.rows)
    throw std::logic_error("encode: adjacency/W0 shape mismatch");
  if (dropout_p < 0.0 || dropout_p >= 1.0)
    throw std::logic_error("encode: dropout_p must be in [0,1)");

  EncodeCache cache;
  cache.pre_activation = a_hat.multiply(w0, n_threads);
  cache.z = cache.pre_activation;
  relu_inplace(cache.z);
  if (dropout_p > 0.0) {
    const double keep_scale = 1.0 / (1.0 - dropout_p);
    cache.dropout_scale = Matrix(cache.z.rows, cache.z.cols);
    for (std::size_t i = 0; i < cache.z.data.size(); ++i) {
      const double s = rng.uniform01() < dropout_p ? 0.0 : keep_scale;
      cache.dropout_scale.data[i] = s;
      cache.z.data[i] *= s;
    }
  }
  return cache;
}

Matrix decode_gcn(const SparseMatrix& a_hat, const Matrix& z, const Matrix& w1,
                  int n_threads) {
  if (a_hat.n_cols() != z.rows || z.cols != w1.rows ||
      w1.cols != a_hat.n_rows())
    throw std::logic_error("decode_gcn: shape mismatch");
  Matrix s = matmul(a_hat.multiply(z, n_threads), w1);
  sigmoid_inplace(s);
  return s;
}

Matrix decode_inner(const Matrix& z) {
  Matrix s = matmul_a_bt(z, z);
  sigmoid_inplace(s);
  return s;
}

double reconstruction_loss(const Matrix& a_prime, const SparseMatrix& target) {
  if (a_prime.rows != target.n_rows() || a_prime.cols != target.n_cols())
    throw std::logic_error("reconstruction_loss: shape mismatch");
  double sum = 0.0;
  for (std::size_t r = 0; r < a_prime.rows; ++r) {
    auto cols = target.row_cols(r);
    auto vals = target.row_values(r);
    std::size_t k = 0;
    for (std::size_t c = 0; c < a_prime.cols; ++c) {
      double t = 0.0;
      if (k < cols.size() && cols[k] == c) t = vals[k++];
      const double d = a_prime(r, c) - t;
      sum += d * d;
    }
  }
  return sum / (static_cast<double>(a_prime.rows) *
                static_cast<double>(a_prime.cols));
}

namespace {

// Row-at-a-time (A' never materialized): for each row, scores -> sigmoid ->
// squared error against the sparse target row, and optionally the gradient
// g = scale * (a' - t) * a' * (1 - a') pushed into the factor gradients.
template <typename ScoreRowFn, typename GradRowFn>
double dense_recon_loop(const SparseMatrix& target, std::size_t n_cols,
                        ScoreRowFn&& score_row, GradRowFn&& grad_row,
                        bool want_grad) {
  const std::size_t n_rows = target.n_rows();
  const double scale =
      2.0 / (static_cast<double>(n_rows) * static_cast<double>(n_cols));
  std::vector<double> srow(n_cols), grow(n_cols);
  double sum = 0.0;
  for (std::size_t r = 0; r < n_rows; ++r) {
    score_row(r, srow);
    auto cols = target.row_cols(r);
    auto vals = target.row_values(r);
    std::size_t k = 0;
    for (std::size_t c = 0; c < n_cols; ++c) {
      double t = 0.0;
      if (k < cols.size() && cols[k] == c) t = vals[k++];
      const double a = sigmoid(srow[c]);
      const double d = a - t;
      sum += d * d;
      if (want_grad) grow[c] = scale * d * a * (1.0 - a);
    }
    if (want_grad) grad_row(r, grow);
  }
  return sum / (static_cast<double>(n_rows) * static_cast<double>(n_cols));
}

}  // namespace

double recon_term_gcn(const SparseMatrix& target, const Matrix& q,
                      const Matrix& w1, Matrix* grad_q, Matrix* grad_w1) {
  const std::size_t n = target.n_rows(), kdim = q.cols;
  if (q.rows != n || w1.rows != kdim || w1.cols != target.n_cols())
    throw std::logic_error("recon_term_gcn: shape mismatch");
  const bool want_grad = grad_q != nullptr;
  return dense_recon_loop(
      target, target.n_cols(),
      [&](std::size_t r, std::vector<double>& srow) {
        const double* qr = q.data.data() + r * kdim;
        std::fill(srow.begin(), srow.end(), 0.0);
        for (std::size_t k = 0; k < kdim; ++k) {
          const double qk = qr[k];
          if (qk == 0.0) continue;
          const double* w1row = w1.data.data() + k * w1.cols;
          for (std::size_t c = 0; c < srow.size(); ++c)
            srow[c] += qk * w1row[c];
        }
      },
      [&](std::size_t r, const std::vector<double>& grow) {
        // dL/dW1 += q_rᵀ ⊗ g ;  dL/dQ_r += g W1ᵀ
        const double* qr = q.data.data() + r * kdim;
        double* gqr = grad_q->data.data() + r * kdim;
        for (std::size_t k = 0; k < kdim; ++k) {
          double* gw1row = grad_w1->data.data() + k * w1.cols;
          const double* w1row = w1.data.data() + k * w1.cols;
          const double qk = qr[k];
          double acc = 0.0;
          for (std::size_t c = 0; c < grow.size(); ++c) {
            gw1row[c] += qk * grow[c];
            acc += grow[c] * w1row[c];
          }
          gqr[k] += acc;
        }
      },
      want_grad);
}

double recon_term_inner(const SparseMatrix& target, const Matrix& z,
                        Matrix* grad_z) {
  const std::size_t n = target.n_rows(), kdim = z.cols;
  if (z.rows != n || target.n_cols() != n)
    throw std::logic_error("recon_term_inner: shape mismatch");
  const bool want_grad = grad_z != nullptr;
  return dense_recon_loop(
      target, n,
      [&](std::size_t r, std::vector<double>& srow) {
        const double* zr = z.data.data() + r * kdim;
        for (std::size_t j = 0; j < n; ++j) {
          const double* zj = z.data.data() + j * kdim;
          double acc = 0.0;
          for (std::size_t k = 0; k < kdim; ++k) acc += zr[k] * zj[k];
          srow[j] = acc;
        }
      },
      [&](std::size_t r, const std::vector<double>& grow) {
        // S = Z Zᵀ with symmetric error term G, so dL/dZ = 2 G Z.
        double* gzr = grad_z->data.data() + r * kdim;
        for (std::size_t j = 0; j < n; ++j) {
          const double g2 = 2.0 * grow[j];
          if (g2 == 0.0) continue;
          const double* zj = z.data.data() + j * kdim;
          for (std::size_t k = 0; k < kdim; ++k) gzr[k] += g2 * zj[k];
        }
      },
      want_grad);
}

CellSample sample_cells(const SparseMatrix& target, Rng& rng) {
  CellSample s;
  const std::size_t n_rows = target.n_rows(), n_cols = target.n_cols();
  s.cells.reserve(2 * target.nnz());
  for (std::size_t r = 0; r < n_rows; ++r)
    for (std::size_t c : target.row_cols(r))
      s.cells.emplace_back(static_cast<std::uint32_t>(r),
                           static_cast<std::uint32_t>(c));
  const std::size_t n_zero = target.nnz();
  for (std::size_t k = 0; k < n_zero; ++k) {
    for (;;) {
      const std::size_t r = rng.uniform_index(n_rows);
      const std::size_t c = rng.uniform_index(n_cols);
      if (!target.has_entry(r, c)) {
        s.cells.emplace_back(static_cast<std::uint32_t>(r),
                             static_cast<std::uint32_t>(c));
        break;
      }
    }
  }
  return s;
}

double recon_term_gcn_sampled(const SparseMatrix& target,
                              const CellSample& sample, const Matrix& q,
                              const Matrix& w1, Matrix* grad_q,
                              Matrix* grad_w1) {
  const std::size_t kdim = q.cols;
  const double inv_n = 1.0 / static_cast<double>(sample.cells.size());
  double sum = 0.0;
  for (const auto& [r, c] : sample.cells) {
    const double* qr = q.data.data() + r * kdim;
    double s = 0.0;
    for (std::size_t k = 0; k < kdim; ++k) s += qr[k] * w1.data[k * w1.cols + c];
    const double a = sigmoid(s);
    const double d = a - target.value_at(r, c);
    sum += d * d;
    if (grad_q != nullptr) {
      const double g = 2.0 * inv_n * d * a * (1.0 - a);
      double* gqr = grad_q->data.data() + r * kdim;
      for (std::size_t k = 0; k < kdim; ++k) {
        grad_w1->data[k * w1.cols + c] += g * qr[k];
        gqr[k] += g * w1.data[k * w1.cols + c];
      }
    }
  }
  return sum * inv_n;
}

double recon_term_inner_sampled(const SparseMatrix& target,
                                const CellSample& sample, const Matrix& z,
                                Matrix* grad_z) {
  const std::size_t kdim = z.cols;
  const double inv_n = 1.0 / static_cast<double>(sample.cells.size());
  double sum = 0.0;
  for (const auto& [r, c] : sample.cells) {
    const double* zr = z.data.data() + r * kdim;
    const double* zc = z.data.data() + c * kdim;
    double s = 0.0;
    for (std::size_t k = 0; k < kdim; ++k) s += zr[k] * zc[k];
    const double a = sigmoid(s);
    const double d = a - target.value_at(r, c);
    sum += d * d;
    if (grad_z != nullptr) {
      // d s / d z_r = z_c and vice versa (r == c contributes both terms).
      const double g = 2.0 * inv_n * d * a * (1.0 - a);
      double* gzr = grad_z->data.data() + r * kdim;
      double* gzc = grad_z->data.data() + c * kdim;
      for (std::size_t k = 0; k < kdim; ++k) {
        gzr[k] += g * zc[k];
        gzc[k] += g * zr[k];
      }
    }
  }
  return sum * inv_n;
}

namespace {

void adam_update(Matrix& param, const Matrix& grad, Matrix& m, Matrix& v,
                 const AdamConfig& cfg, double bc1, double bc2) {
  if (!all_finite(grad)) throw std::runtime_error("divergence detected");
  for (std::size_t i = 0; i < param.data.size(); ++i) {
    const double g = grad.data[i];
    m.data[i] = cfg.beta1 * m.data[i] + (1.0 - cfg.beta1) * g;
    v.data[i] = cfg.beta2 * v.data[i] + (1.0 - cfg.beta2) * g * g;
    const double mhat = m.data[i] / bc1;
    const double vhat = v.data[i] / bc2;
    param.data[i] -= cfg.learning_rate * mhat / (std::sqrt(vhat) + cfg.epsilon);
  }
}

}  // namespace

void adam_step(GcnModel& model, const Gradients& grads) {
  if (!grads.w0.same_shape(model.w0))
    throw std::logic_error("adam_step: W0 gradient shape mismatch");
  model.adam.step += 1;
  const double t = static_cast<double>(model.adam.step);
  const double bc1 = 1.0 - std::pow(model.adam_config.beta1, t);
  const double bc2 = 1.0 - std::pow(model.adam_config.beta2, t);

  adam_update(model.w0, grads.w0, model.adam.m_w0, model.adam.v_w0,
              model.adam_config, bc1, bc2);
  if (!model.w1.empty()) {
    if (!grads.w1.same_shape(model.w1))
      throw std::logic_error("adam_step: W1 gradient shape mismatch");
    adam_update(model.w1, grads.w1, model.adam.m_w1, model.adam.v_w1,
                model.adam_config, bc1, bc2);
  }
  if (!grads.heads.empty()) {
    if (grads.heads.size() != model.heads.size())
      throw std::logic_error("adam_step: head gradient count mismatch");
    for (std::size_t h = 0; h < model.heads.size(); ++h)
      adam_update(model.heads[h].weight, grads.heads[h], model.adam.m_head[h],
                  model.adam.v_head[h], model.adam_config, bc1, bc2);
  }
}

}  // namespace textgcn
