#include "textgcn/sparse.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "textgcn/error.hpp"

namespace textgcn {

SparseMatrix SparseMatrix::from_triplets(std::size_t n_rows,
                                         std::size_t n_cols,
                                         std::vector<Triplet> entries,
                                         bool symmetric) {
  for (const Triplet& t : entries) {
    if (t.row >= n_rows || t.col >= n_cols)
      throw std::logic_error("SparseMatrix: entry out of bounds");
    if (!std::isfinite(t.value))
      throw std::logic_error("SparseMatrix: non-finite entry");
  }
  std::sort(entries.begin(), entries.end(),
            [](const Triplet& a, const Triplet& b) {
              return a.row != b.row ? a.row < b.row : a.col < b.col;
            });

  SparseMatrix m;
  m.n_rows_ = n_rows;
  m.n_cols_ = n_cols;
  m.symmetric_ = symmetric;
  m.row_offsets_.assign(n_rows + 1, 0);
  m.cols_.reserve(entries.size());
  m.values_.reserve(entries.size());

  std::size_t i = 0;
  while (i < entries.size()) {
    std::size_t j = i;
    double sum = 0.0;
    while (j < entries.size() && entries[j].row == entries[i].row &&
           entries[j].col == entries[i].col) {
      sum += entries[j].value;
      ++j;
    }
    if (sum != 0.0) {
      m.cols_.push_back(entries[i].col);
      m.values_.push_back(sum);
      ++m.row_offsets_[entries[i].row + 1];
    }
    i = j;
  }
  for (std::size_t r = 0; r < n_rows; ++r)
    m.row_offsets_[r + 1] += m.row_offsets_[r];

  if (symmetric) {
    if (n_rows != n_cols)
      throw std::logic_error("SparseMatrix: symmetric matrix must be square");
    for (std::size_t r = 0; r < n_rows; ++r) {
      auto cols = m.row_cols(r);
      auto vals = m.row_values(r);
      for (std::size_t k = 0; k < cols.size(); ++k) {
        if (m.value_at(cols[k], r) != vals[k])
          throw std::logic_error("SparseMatrix: symmetry violated");
      }
    }
  }
  return m;
}

SparseMatrix SparseMatrix::identity(std::size_t n) {
  std::vector<Triplet> t;
  t.reserve(n);
  for (std::size_t i = 0; i < n; ++i) t.push_back({i, i, 1.0});
  return from_triplets(n, n, std::move(t), true);
}

double SparseMatrix::value_at(std::size_t r, std::size_t c) const {
  auto cols = row_cols(r);
  auto it = std::lower_bound(cols.begin(), cols.end(), c);
  if (it == cols.end() || *it != c) return 0.0;
  return values_[row_offsets_[r] + static_cast<std::size_t>(it - cols.begin())];
}

bool SparseMatrix::has_entry(std::size_t r, std::size_t c) const {
  auto cols = row_cols(r);
  return std::binary_search(cols.begin(), cols.end(), c);
}

std::vector<double> SparseMatrix::row_sums() const {
  std::vector<double> sums(n_rows_, 0.0);
  for (std::size_t r = 0; r < n_rows_; ++r) {
    double s = 0.0;
    for (double v : row_values(r)) s += v;
    sums[r] = s;
  }
  return sums;
}

Matrix SparseMatrix::multiply(const Matrix& x, int n_threads) const {
  if (x.rows != n_cols_) throw std::logic_error("SparseMatrix::multiply: shape");
  Matrix out(n_rows_, x.cols);
  auto run_rows = [&](std::size_t r0, std::size_t r1) {
    for (std::size_t r = r0; r < r1; ++r) {
      double* orow = out.data.data() + r * out.cols;
      const std::size_t b = row_offsets_[r], e = row_offsets_[r + 1];
      for (std::size_t k = b; k < e; ++k) {
        const double v = values_[k];
        const double* xrow = x.data.data() + cols_[k] * x.cols;
        for (std::size_t j = 0; j < x.cols; ++j) orow[j] += v * xrow[j];
      }
    }
  };
  // Row partitioning: each output row is produced by exactly one thread in a
  // fixed order, so the result is identical for any thread count.
  if (n_threads <= 1 || n_rows_ < 256) {
    run_rows(0, n_rows_);
  } else {
    const std::size_t nt = static_cast<std::size_t>(n_threads);
    std::vector<std::thread> pool;
    pool.reserve(nt);
    const std::size_t chunk = (n_rows_ + nt - 1) / nt;
    for (std::size_t t = 0; t < nt; ++t) {
      const std::size_t r0 = std::min(t * chunk, n_rows_);
      const std::size_t r1 = std::min(r0 + chunk, n_rows_);
      if (r0 < r1) pool.emplace_back(run_rows, r0, r1);
    }
    for (auto& th : pool) th.join();
  }
  return out;
}

Matrix SparseMatrix::to_dense() const {
  Matrix d(n_rows_, n_cols_);
  for (std::size_t r = 0; r < n_rows_; ++r) {
    auto cols = row_cols(r);
    auto vals = row_values(r);
    for (std::size_t k = 0; k < cols.size(); ++k) d(r, cols[k]) = vals[k];
  }
  return d;
}

void write_tg1(std::ostream& os, const SparseMatrix& m,
               const std::string& kind) {
  os << "tg1 " << kind << ' ' << m.n_rows() << ' ' << m.n_cols() << ' '
     << m.nnz() << ' ' << (m.symmetric() ? 1 : 0) << '\n';
  char buf[64];
  for (std::size_t r = 0; r < m.n_rows(); ++r) {
    auto cols = m.row_cols(r);
    auto vals = m.row_values(r);
    for (std::size_t k = 0; k < cols.size(); ++k) {
      std::snprintf(buf, sizeof(buf), "%.17g", vals[k]);
      os << r << ' ' << cols[k] << ' ' << buf << '\n';
    }
  }
}

void write_tg1_file(const std::string& path, const SparseMatrix& m,
                    const std::string& kind) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw UsageError("cannot open for writing: " + path);
  write_tg1(os, m, kind);
  if (!os) throw std::runtime_error("write failed: " + path);
}

Tg1File read_tg1(std::istream& is) {
  std::string magic, kind;
  std::size_t n_rows = 0, n_cols = 0, nnz = 0;
  int sym = 0;
  if (!(is >> magic >> kind >> n_rows >> n_cols >> nnz >> sym) ||
      magic != "tg1" || (sym != 0 && sym != 1))
    throw UsageError("not a tg1 graph file (bad header)");
  std::vector<Triplet> entries;
  entries.reserve(nnz);
  for (std::size_t k = 0; k < nnz; ++k) {
    Triplet t;
    if (!(is >> t.row >> t.col >> t.value))
      throw UsageError("tg1: truncated entry list at entry " +
                       std::to_string(k));
    entries.push_back(t);
  }
  try {
    return {kind, SparseMatrix::from_triplets(n_rows, n_cols,
                                              std::move(entries), sym == 1)};
  } catch (const std::logic_error& e) {
    throw UsageError(std::string("tg1: invalid entries (") + e.what() + ")");
  }
}

Tg1File read_tg1_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw UsageError("cannot open graph file: " + path);
  return read_tg1(is);
}

}  // namespace textgcn
