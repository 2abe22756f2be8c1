#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "textgcn/matrix.hpp"

namespace textgcn {

struct Triplet {
  std::size_t row;
  std::size_t col;
  double value;
};

// Compressed-row sparse matrix. Entries are unique, sorted by (row, col),
// finite, and nonzero. A symmetric matrix stores both orientations.
class SparseMatrix {
 public:
  SparseMatrix() = default;

  // Finalizes a triplet list: duplicates are summed, exact zeros dropped.
  // When `symmetric` is set the mirror-equality invariant is verified.
  static SparseMatrix from_triplets(std::size_t n_rows, std::size_t n_cols,
                                    std::vector<Triplet> entries,
                                    bool symmetric);

  static SparseMatrix identity(std::size_t n);

  std::size_t n_rows() const { return n_rows_; }
  std::size_t n_cols() const { return n_cols_; }
  std::size_t nnz() const { return values_.size(); }
  bool symmetric() const { return symmetric_; }

  std::span<const std::size_t> row_offsets() const { return row_offsets_; }
  std::span<const std::size_t> col_index() const { return cols_; }
  std::span<const double> values() const { return values_; }

  std::span<const std::size_t> row_cols(std::size_t r) const {
    return {cols_.data() + row_offsets_[r],
            row_offsets_[r + 1] - row_offsets_[r]};
  }
  std::span<const double> row_values(std::size_t r) const {
    return {values_.data() + row_offsets_[r],
            row_offsets_[r + 1] - row_offsets_[r]};
  }

  // Stored value at (r, c), or 0 when absent. Binary search per call.
  double value_at(std::size_t r, std::size_t c) const;
  bool has_entry(std::size_t r, std::size_t c) const;

  // Row sums (degrees for an adjacency matrix).
  std::vector<double> row_sums() const;

  // this * x, CSR-by-dense. Deterministic: rows accumulate in column order.
  Matrix multiply(const Matrix& x, int n_threads = 1) const;

  Matrix to_dense() const;

  bool operator==(const SparseMatrix& o) const = default;

 private:
  std::size_t n_rows_ = 0;
  std::size_t n_cols_ = 0;
  bool symmetric_ = false;
  std::vector<std::size_t> row_offsets_;  // size n_rows_+1
  std::vector<std::size_t> cols_;
  std::vector<double> values_;
};

// "tg1" text format:
//   tg1 <kind> <n_rows> <n_cols> <nnz> <symmetric:0|1>
// followed by one "row col weight" line per entry, sorted by (row, col),
// weights printed with 17 significant digits so reads are bit-exact.
void write_tg1(std::ostream& os, const SparseMatrix& m, const std::string& kind);
void write_tg1_file(const std::string& path, const SparseMatrix& m,
                    const std::string& kind);

struct Tg1File {
  std::string kind;
  SparseMatrix matrix;
};
Tg1File read_tg1(std::istream& is);
Tg1File read_tg1_file(const std::string& path);

}  // namespace textgcn
