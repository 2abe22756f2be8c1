#include "textgcn/checkpoint.hpp"

#include <cstring>
#include <fstream>

#include "textgcn/error.hpp"

namespace textgcn {

namespace {

constexpr char kMagic[8] = {'T', 'G', 'C', 'K', 'P', 'T', '1', '\n'};
constexpr std::uint32_t kVersion = 1;

class Writer {
 public:
  explicit Writer(std::ostream& os) : os_(os) {}

  void u8(std::uint8_t v) { raw(&v, 1); }
  void u32(std::uint32_t v) { raw(&v, sizeof v); }
  void u64(std::uint64_t v) { raw(&v, sizeof v); }
  void f64(double v) { raw(&v, sizeof v); }
  void str(const std::string& s) {
    u64(s.size());
    raw(s.data(), s.size());
  }
  void matrix(const Matrix& m) {
    u64(m.rows);
    u64(m.cols);
    raw(m.data.data(), m.data.size() * sizeof(double));
  }

 private:
  void raw(const void* p, std::size_t n) {
    os_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
  }
  std::ostream& os_;
};

class Reader {
 public:
  explicit Reader(std::istream& is) : is_(is) {}

  std::uint8_t u8() {
    std::uint8_t v;
    raw(&v, 1);
    return v;
  }
  std::uint32_t u32() {
    std::uint32_t v;
    raw(&v, sizeof v);
    return v;
  }
  std::uint64_t u64() {
    std::uint64_t v;
    raw(&v, sizeof v);
    return v;
  }
  double f64() {
    double v;
    raw(&v, sizeof v);
    return v;
  }
  std::string str() {
    std::string s(u64(), '\0');
    raw(s.data(), s.size());
    return s;
  }
  Matrix matrix() {
    const std::size_t rows = u64();
    const std::size_t cols = u64();
    Matrix m(rows, cols);
    raw(m.data.data(), m.data.size() * sizeof(double));
    return m;
  }

 private:
  void raw(void* p, std::size_t n) {
    is_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!is_) throw UsageError("truncated or corrupt checkpoint");
  }
  std::istream& is_;
};

}  // namespace

void save_checkpoint(const Checkpoint& ckpt,
                     const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw UsageError("cannot open for writing: " + path.string());
  os.write(kMagic, sizeof kMagic);
  Writer w(os);
  w.u32(kVersion);

  w.u8(static_cast<std::uint8_t>(ckpt.graph_kind));
  w.u64(ckpt.n_words);
  w.u64(ckpt.n_sentences);
  w.u8(static_cast<std::uint8_t>(ckpt.normalize));
  w.u32(static_cast<std::uint32_t>(ckpt.k_folds));
  w.u32(static_cast<std::uint32_t>(ckpt.fold_index));
  w.f64(ckpt.val_fraction);

  const TrainConfig& cfg = ckpt.config;
  w.f64(cfg.lambda);
  w.u32(static_cast<std::uint32_t>(cfg.max_epochs));
  w.u32(static_cast<std::uint32_t>(cfg.patience));
  w.f64(cfg.dropout);
  w.u64(cfg.embed_dim);
  w.f64(cfg.adam.learning_rate);
  w.f64(cfg.adam.beta1);
  w.f64(cfg.adam.beta2);
  w.f64(cfg.adam.epsilon);
  w.f64(cfg.adam.weight_decay);
  w.u64(cfg.seed);
  w.u8(static_cast<std::uint8_t>(cfg.decoder));
  w.u32(static_cast<std::uint32_t>(cfg.tasks.size()));
  for (Task t : cfg.tasks) w.u8(static_cast<std::uint8_t>(t));
  for (double v : cfg.task_weights) w.f64(v);
  w.u8(cfg.sampled_mse ? 1 : 0);

  const GcnModel& m = ckpt.model;
  w.u64(m.n_nodes);
  w.u64(m.embed_dim);
  w.matrix(m.w0);
  w.matrix(m.w1);
  w.u32(static_cast<std::uint32_t>(m.heads.size()));
  for (const TaskHead& h : m.heads) {
    w.u8(static_cast<std::uint8_t>(h.task));
    w.matrix(h.weight);
  }
  w.u64(m.adam.step);
  w.matrix(m.adam.m_w0);
  w.matrix(m.adam.v_w0);
  w.matrix(m.adam.m_w1);
  w.matrix(m.adam.v_w1);
  for (std::size_t h = 0; h < m.heads.size(); ++h) {
    w.matrix(m.adam.m_head[h]);
    w.matrix(m.adam.v_head[h]);
  }
  w.str(m.train_rng.save_state());
  if (!os) throw std::runtime_error("write failed: " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw UsageError("cannot open checkpoint: " + path.string());
  char magic[8];
  is.read(magic, sizeof magic);
  if (!is || std::memcmp(magic, kMagic, sizeof magic) != 0)
    throw UsageError("not a checkpoint file: " + path.string());
  Reader r(is);
  if (r.u32() != kVersion)
    throw UsageError("unsupported checkpoint version in " + path.string());

  Checkpoint ckpt;
  ckpt.graph_kind = static_cast<GraphKind>(r.u8());
  ckpt.n_words = r.u64();
  ckpt.n_sentences = r.u64();
  ckpt.normalize = static_cast<NormalizeMode>(r.u8());
  ckpt.k_folds = static_cast<int>(r.u32());
  ckpt.fold_index = static_cast<int>(r.u32());
  ckpt.val_fraction = r.f64();

  TrainConfig& cfg = ckpt.config;
  cfg.lambda = r.f64();
  cfg.max_epochs = static_cast<int>(r.u32());
  cfg.patience = static_cast<int>(r.u32());
  cfg.dropout = r.f64();
  cfg.embed_dim = r.u64();
  cfg.adam.learning_rate = r.f64();
  cfg.adam.beta1 = r.f64();
  cfg.adam.beta2 = r.f64();
  cfg.adam.epsilon = r.f64();
  cfg.adam.weight_decay = r.f64();
  cfg.seed = r.u64();
  cfg.decoder = static_cast<DecoderMode>(r.u8());
  cfg.tasks.resize(r.u32());
  for (Task& t : cfg.tasks) t = static_cast<Task>(r.u8());
  for (double& v : cfg.task_weights) v = r.f64();
  cfg.sampled_mse = r.u8() != 0;

  GcnModel& m = ckpt.model;
  m.decoder = cfg.decoder;
  m.adam_config = cfg.adam;
  m.n_nodes = r.u64();
  m.embed_dim = r.u64();
  m.w0 = r.matrix();
  m.w1 = r.matrix();
  m.heads.resize(r.u32());
  for (TaskHead& h : m.heads) {
    h.task = static_cast<Task>(r.u8());
    h.weight = r.matrix();
  }
  m.adam.step = r.u64();
  m.adam.m_w0 = r.matrix();
  m.adam.v_w0 = r.matrix();
  m.adam.m_w1 = r.matrix();
  m.adam.v_w1 = r.matrix();
  m.adam.m_head.resize(m.heads.size());
  m.adam.v_head.resize(m.heads.size());
  for (std::size_t h = 0; h < m.heads.size(); ++h) {
    m.adam.m_head[h] = r.matrix();
    m.adam.v_head[h] = r.matrix();
  }
  m.train_rng.load_state(r.str());
  return ckpt;
}

}  // namespace textgcn
