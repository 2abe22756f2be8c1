#include <doctest.h>

#include <cmath>
#include <fstream>

#include "gradcheck.hpp"
#include "oracles.hpp"
#include "testutil.hpp"
#include "textgcn/checkpoint.hpp"
#include "textgcn/error.hpp"
#include "textgcn/gcn.hpp"

using namespace textgcn;

namespace {

Matrix random_matrix(Rng& rng, std::size_t r, std::size_t c, double lo = -1,
                     double hi = 1) {
  Matrix m(r, c);
  for (double& v : m.data) v = rng.uniform(lo, hi);
  return m;
}

Matrix dense_relu(Matrix m) {
  for (double& v : m.data) v = std::max(v, 0.0);
  return m;
}

Matrix dense_sigmoid(Matrix m) {
  for (double& v : m.data) v = 1.0 / (1.0 + std::exp(-v));
  return m;
}

}  // namespace

TEST_CASE("encode: identity propagation gives relu(W0)") {
  Rng rng(101);
  const SparseMatrix i5 = SparseMatrix::identity(5);
  const Matrix w0 = random_matrix(rng, 5, 3);
  const Matrix z = encode(i5, w0);
  for (std::size_t i = 0; i < z.data.size(); ++i)
    CHECK(z.data[i] == std::max(w0.data[i], 0.0));
}

TEST_CASE("encode: p=0 is seed-independent and consumes no rng") {
  Rng rng(103);
  const SparseMatrix a = testutil::random_adjacency(rng, 8, 0.4);
  const Matrix w0 = random_matrix(rng, 8, 4);
  Rng r1(1), r2(999);
  const EncodeCache c1 = encode_train(a, w0, 0.0, r1);
  const EncodeCache c2 = encode_train(a, w0, 0.0, r2);
  CHECK(c1.z.data == c2.z.data);
  CHECK(r1.save_state() == Rng(1).save_state());  // untouched
}

TEST_CASE("encode: matches dense reference within 1e-12") {
  Rng rng(107);
  const SparseMatrix a = testutil::random_adjacency(rng, 10, 0.4);
  const Matrix w0 = random_matrix(rng, 10, 4);
  const Matrix z = encode(a, w0);
  const Matrix ref = dense_relu(oracle::dense_matmul(a.to_dense(), w0));
  for (std::size_t i = 0; i < z.data.size(); ++i)
    CHECK(std::abs(z.data[i] - ref.data[i]) < 1e-12);
  for (double v : z.data) CHECK(v >= 0.0);  // ReLU sparsity
}

TEST_CASE("encode: inverted dropout zeroes or scales by 1/(1-p)") {
  Rng rng(109);
  const SparseMatrix a = testutil::random_adjacency(rng, 12, 0.5);
  const Matrix w0 = random_matrix(rng, 12, 6, 0.1, 1.0);
  Rng drop_rng(5);
  const EncodeCache cache = encode_train(a, w0, 0.5, drop_rng);
  REQUIRE(!cache.dropout_scale.empty());
  const Matrix plain = encode(a, w0);
  std::size_t zeros = 0;
  for (std::size_t i = 0; i < cache.z.data.size(); ++i) {
    const double s = cache.dropout_scale.data[i];
    CHECK((s == 0.0 || s == 2.0));
    if (s == 0.0) ++zeros;
    CHECK(cache.z.data[i] == plain.data[i] * s);
  }
  CHECK(zeros > 0);
  CHECK(zeros < cache.z.data.size());
}

TEST_CASE("decode_gcn: zero inputs give 0.5 everywhere") {
  const SparseMatrix a = SparseMatrix::identity(6);
  const Matrix z(6, 3);
  Rng rng(113);
  Matrix w1 = random_matrix(rng, 3, 6);
  Matrix out = decode_gcn(a, z, w1);
  for (double v : out.data) CHECK(v == 0.5);

  // zero propagation matrix
  const SparseMatrix zero = SparseMatrix::from_triplets(6, 6, {}, true);
  const Matrix z2 = random_matrix(rng, 6, 3);
  out = decode_gcn(zero, z2, w1);
  for (double v : out.data) CHECK(v == 0.5);
}

TEST_CASE("decode_gcn: matches dense oracle within 1e-12") {
  Rng rng(127);
  const SparseMatrix a = testutil::random_adjacency(rng, 6, 0.5);
  const Matrix z = random_matrix(rng, 6, 3);
  const Matrix w1 = random_matrix(rng, 3, 6);
  const Matrix out = decode_gcn(a, z, w1);
  const Matrix ref = dense_sigmoid(
      oracle::dense_matmul(oracle::dense_matmul(a.to_dense(), z), w1));
  for (std::size_t i = 0; i < out.data.size(); ++i)
    CHECK(std::abs(out.data[i] - ref.data[i]) < 1e-12);
}

TEST_CASE("decode_inner: 0.5 at zero, sigmoid(1) on orthonormal diagonal") {
  Matrix z(4, 4);
  Matrix out = decode_inner(z);
  for (double v : out.data) CHECK(v == 0.5);

  Matrix ortho(3, 3);
  for (std::size_t i = 0; i < 3; ++i) ortho(i, i) = 1.0;
  out = decode_inner(ortho);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 3; ++j)
      CHECK(out(i, j) ==
            doctest::Approx(i == j ? 0.7310585786300049 : 0.5).epsilon(1e-12));
}

TEST_CASE("decode_inner: exactly symmetric, matches oracle") {
  Rng rng(131);
  const Matrix z = random_matrix(rng, 7, 4);
  const Matrix out = decode_inner(z);
  for (std::size_t i = 0; i < 7; ++i)
    for (std::size_t j = 0; j < 7; ++j) CHECK(out(i, j) == out(j, i));
  const Matrix ref =
      dense_sigmoid(oracle::dense_matmul(z, transpose(z)));
  for (std::size_t i = 0; i < out.data.size(); ++i)
    CHECK(std::abs(out.data[i] - ref.data[i]) < 1e-12);
}

TEST_CASE("reconstruction_loss: hand cases and dense oracle") {
  // perfect reconstruction
  const SparseMatrix i2 = SparseMatrix::identity(2);
  CHECK(reconstruction_loss(i2.to_dense(), i2) == 0.0);

  // A' = 0.5 everywhere vs identity target, N=2 -> 0.25
  Matrix half(2, 2);
  half.fill(0.5);
  CHECK(reconstruction_loss(half, i2) == doctest::Approx(0.25).epsilon(1e-15));

  Rng rng(137);
  const SparseMatrix target = testutil::random_adjacency(rng, 9, 0.3);
  const Matrix a_prime = random_matrix(rng, 9, 9, 0.0, 1.0);
  double ref = 0.0;
  const Matrix dense_t = target.to_dense();
  for (std::size_t i = 0; i < a_prime.data.size(); ++i) {
    const double d = a_prime.data[i] - dense_t.data[i];
    ref += d * d;
  }
  ref /= 81.0;
  CHECK(std::abs(reconstruction_loss(a_prime, target) - ref) < 1e-12);
}

TEST_CASE("recon_term_gcn agrees with decode + reconstruction_loss") {
  Rng rng(139);
  const SparseMatrix a = testutil::random_adjacency(rng, 8, 0.4);
  const SparseMatrix target = normalize_adjacency(a, NormalizeMode::SymRenorm);
  const Matrix z = random_matrix(rng, 8, 3);
  const Matrix w1 = random_matrix(rng, 3, 8);
  const Matrix q = target.multiply(z);
  const double fused = recon_term_gcn(target, q, w1, nullptr, nullptr);
  const double ref = reconstruction_loss(decode_gcn(target, z, w1), target);
  CHECK(std::abs(fused - ref) < 1e-12);
}

TEST_CASE("gradients scale exactly with the loss-term weight") {
  // Doubling a loss term's weight doubles its gradient contribution
  // exactly: the scale multiplies each summand before accumulation, and
  // scaling by 2 is exact in binary floating point. Head gradients receive
  // only the classification term, so lambda 0.2 vs 0.4 isolates it.
  gradcheck::Instance inst = gradcheck::make_instance(
      33, 10, 4, DecoderMode::Gcn, 0.2, std::span<const Task>(kAllTasks));
  const StepResult g1 = forward_backward(inst.graph, inst.model,
                                         inst.supervision, inst.cfg, false);
  gradcheck::Instance doubled = inst;
  doubled.cfg.lambda = 0.4;
  const StepResult g2 = forward_backward(doubled.graph, doubled.model,
                                         doubled.supervision, doubled.cfg,
                                         false);
  for (std::size_t h = 0; h < g1.grads.heads.size(); ++h) {
    REQUIRE(!g1.grads.heads[h].data.empty());
    for (std::size_t i = 0; i < g1.grads.heads[h].data.size(); ++i)
      CHECK(g2.grads.heads[h].data[i] == 2.0 * g1.grads.heads[h].data[i]);
  }
}

TEST_CASE("sampled recon: covers positives plus equal zeros, loss matches") {
  Rng rng(151);
  const SparseMatrix target = testutil::random_adjacency(rng, 12, 0.25);
  Rng sample_rng(3);
  const CellSample sample = sample_cells(target, sample_rng);
  CHECK(sample.cells.size() == 2 * target.nnz());
  std::size_t positives = 0;
  for (const auto& [r, c] : sample.cells)
    if (target.has_entry(r, c)) ++positives;
  CHECK(positives == target.nnz());

  const Matrix z = random_matrix(rng, 12, 4);
  const double loss = recon_term_inner_sampled(target, sample, z, nullptr);
  // Direct recomputation over the cell list.
  double ref = 0.0;
  for (const auto& [r, c] : sample.cells) {
    double s = 0.0;
    for (std::size_t k = 0; k < 4; ++k) s += z(r, k) * z(c, k);
    const double d = 1.0 / (1.0 + std::exp(-s)) - target.value_at(r, c);
    ref += d * d;
  }
  ref /= static_cast<double>(sample.cells.size());
  CHECK(std::abs(loss - ref) < 1e-12);
}

TEST_CASE("backward: dead ReLU zeroes the encoder gradient") {
  Rng rng(157);
  gradcheck::Instance inst = gradcheck::make_instance(
      42, 10, 4, DecoderMode::Gcn, 0.2, std::span<const Task>(kAllTasks));
  inst.model.w0.fill(0.0);  // pre-activations all 0 -> ReLU dead everywhere
  inst.model.adam_config.weight_decay = 0.0;
  inst.cfg.adam.weight_decay = 0.0;
  const StepResult step = forward_backward(inst.graph, inst.model,
                                           inst.supervision, inst.cfg, false);
  for (double g : step.grads.w0.data) CHECK(g == 0.0);
}

TEST_CASE("gradient check: N=12 K=5, both decoders, rel err < 1e-4") {
  for (DecoderMode dec : {DecoderMode::Gcn, DecoderMode::Inner}) {
    gradcheck::Instance inst = gradcheck::make_instance(
        7, 12, 5, dec, 0.2, std::span<const Task>(kAllTasks));
    const auto res = gradcheck::check_gradients(inst, 1e-5);
    CHECK(res.n_coordinates > 0);
    CHECK(res.max_rel_error < 1e-4);
  }
}

TEST_CASE("gradient check: permutation equivariance of the objective") {
  // Relabeling nodes consistently leaves the loss unchanged.
  gradcheck::Instance inst = gradcheck::make_instance(
      11, 8, 3, DecoderMode::Gcn, 0.5, std::span<const Task>(kAllTasks));
  const double base =
      model_objective(inst.graph, inst.model, inst.supervision, inst.cfg);

  const std::size_t n = inst.graph.n_nodes();
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = (i + 3) % n;

  std::vector<Triplet> entries;
  for (std::size_t r = 0; r < n; ++r) {
    auto cols = inst.graph.adjacency.row_cols(r);
    auto vals = inst.graph.adjacency.row_values(r);
    for (std::size_t k = 0; k < cols.size(); ++k)
      entries.push_back({perm[r], perm[cols[k]], vals[k]});
  }
  gradcheck::Instance pinst = inst;
  pinst.graph.adjacency =
      SparseMatrix::from_triplets(n, n, std::move(entries), true);
  pinst.graph.normalized =
      normalize_adjacency(pinst.graph.adjacency, NormalizeMode::SymRenorm);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < inst.model.embed_dim; ++k)
      pinst.model.w0(perm[i], k) = inst.model.w0(i, k);
    for (std::size_t k = 0; k < inst.model.embed_dim; ++k)
      pinst.model.w1(k, perm[i]) = inst.model.w1(k, i);
  }
  for (auto& sup : pinst.supervision)
    for (auto& row : sup.rows) row = perm[row];

  const double permuted =
      model_objective(pinst.graph, pinst.model, pinst.supervision, pinst.cfg);
  CHECK(std::abs(base - permuted) < 1e-12);
}

TEST_CASE("adam: zero gradient leaves parameters bitwise unchanged") {
  Rng rng(163);
  GcnModel m = GcnModel::init(6, 3, DecoderMode::Gcn,
                              std::span<const Task>(kAllTasks), {}, 5);
  const Matrix w0_before = m.w0;
  Gradients g;
  g.w0 = Matrix(6, 3);
  g.w1 = Matrix(3, 6);
  for (const TaskHead& h : m.heads)
    g.heads.emplace_back(h.weight.rows, h.weight.cols);
  adam_step(m, g);
  CHECK(m.adam.step == 1);
  CHECK(m.w0.data == w0_before.data);
}

TEST_CASE("adam: matches an independent scalar trace") {
  AdamConfig cfg;
  cfg.learning_rate = 0.001;
  GcnModel m;
  m.decoder = DecoderMode::Inner;
  m.n_nodes = 1;
  m.embed_dim = 1;
  m.adam_config = cfg;
  m.w0 = Matrix(1, 1);
  m.w0(0, 0) = 0.3;
  m.adam.m_w0 = Matrix(1, 1);
  m.adam.v_w0 = Matrix(1, 1);

  oracle::ScalarAdam ref;
  double x = 0.3;
  Rng rng(167);
  for (int step = 0; step < 25; ++step) {
    const double g = step == 0 ? 1.0 : rng.uniform(-2, 2);
    Gradients grads;
    grads.w0 = Matrix(1, 1);
    grads.w0(0, 0) = g;
    adam_step(m, grads);
    ref.step(x, g, cfg.learning_rate, cfg.beta1, cfg.beta2, cfg.epsilon);
    CHECK(m.w0(0, 0) == doctest::Approx(x).epsilon(1e-15));
    if (step == 0)
      CHECK(m.w0(0, 0) ==
            doctest::Approx(0.3 - 0.001 / (1.0 + 1e-8)).epsilon(1e-12));
  }
}

TEST_CASE("adam: two identical runs are bit-identical after 10 steps") {
  auto run = [] {
    GcnModel m = GcnModel::init(5, 2, DecoderMode::Gcn,
                                std::span<const Task>(kAllTasks), {}, 77);
    Rng rng(13);
    for (int i = 0; i < 10; ++i) {
      Gradients g;
      g.w0 = Matrix(5, 2);
      g.w1 = Matrix(2, 5);
      for (double& v : g.w0.data) v = rng.uniform(-1, 1);
      for (double& v : g.w1.data) v = rng.uniform(-1, 1);
      for (const TaskHead& h : m.heads)
        g.heads.emplace_back(h.weight.rows, h.weight.cols);
      adam_step(m, g);
    }
    return m;
  };
  const GcnModel a = run();
  const GcnModel b = run();
  CHECK(a.w0.data == b.w0.data);
  CHECK(a.w1.data == b.w1.data);
}

TEST_CASE("adam: non-finite gradient reports divergence") {
  GcnModel m = GcnModel::init(2, 2, DecoderMode::Inner,
                              std::span<const Task>{}, {}, 1);
  Gradients g;
  g.w0 = Matrix(2, 2);
  g.w0(0, 0) = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_WITH_AS(adam_step(m, g), "divergence detected",
                       std::runtime_error);
}

TEST_CASE("checkpoint: save/load round-trip is bit-exact") {
  testutil::TempDir dir;
  Checkpoint ckpt;
  ckpt.graph_kind = GraphKind::WS;
  ckpt.n_words = 4;
  ckpt.n_sentences = 3;
  ckpt.k_folds = 2;
  ckpt.fold_index = 1;
  ckpt.config.lambda = 0.25;
  ckpt.config.tasks = {Task::Sa, Task::Ei};
  ckpt.model = GcnModel::init(7, 3, DecoderMode::Gcn, ckpt.config.tasks,
                              ckpt.config.adam, 123);
  ckpt.model.train_rng.next_u64();  // advance so the state is non-trivial

  save_checkpoint(ckpt, dir / "m.bin");
  const Checkpoint back = load_checkpoint(dir / "m.bin");
  CHECK(back.graph_kind == ckpt.graph_kind);
  CHECK(back.n_words == 4);
  CHECK(back.k_folds == 2);
  CHECK(back.fold_index == 1);
  CHECK(back.config.lambda == 0.25);
  CHECK(back.config.tasks == ckpt.config.tasks);
  CHECK(back.model.w0.data == ckpt.model.w0.data);
  CHECK(back.model.w1.data == ckpt.model.w1.data);
  REQUIRE(back.model.heads.size() == 2);
  CHECK(back.model.heads[1].weight.data == ckpt.model.heads[1].weight.data);
  CHECK(back.model.train_rng == ckpt.model.train_rng);

  save_checkpoint(back, dir / "m2.bin");
  CHECK(testutil::read_file(dir / "m.bin") ==
        testutil::read_file(dir / "m2.bin"));
}

TEST_CASE("checkpoint: rejects corrupt files") {
  testutil::TempDir dir;
  {
    std::ofstream os(dir / "junk.bin", std::ios::binary);
    os << "definitely not a checkpoint";
  }
  CHECK_THROWS_AS(load_checkpoint(dir / "junk.bin"), UsageError);
}
