#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace textgcn {

class Rng;

// Dense row-major matrix of doubles.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const {
    return data[i * cols + j];
  }

  std::span<double> row(std::size_t i) { return {data.data() + i * cols, cols}; }
  std::span<const double> row(std::size_t i) const {
    return {data.data() + i * cols, cols};
  }

  bool empty() const { return data.empty(); }
  bool same_shape(const Matrix& o) const {
    return rows == o.rows && cols == o.cols;
  }

  void fill(double v) { data.assign(data.size(), v); }
};

// C = A * B
Matrix matmul(const Matrix& a, const Matrix& b);
// C = A^T * B
Matrix matmul_at_b(const Matrix& a, const Matrix& b);
// C = A * B^T
Matrix matmul_a_bt(const Matrix& a, const Matrix& b);

Matrix transpose(const Matrix& a);

// dst += scale * src (shapes must match)
void add_scaled(Matrix& dst, const Matrix& src, double scale);

void relu_inplace(Matrix& m);
void sigmoid_inplace(Matrix& m);
double sigmoid(double x);

// Sum of squared entries.
double squared_norm(const Matrix& m);

bool all_finite(const Matrix& m);

// Glorot-uniform initialization: U(-s, s) with s = sqrt(6/(rows+cols)),
// filled in row-major order from the given stream.
Matrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng);

}  // namespace textgcn
