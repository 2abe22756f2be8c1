#include "textgcn/matrix.hpp"

#include <cmath>
#include <stdexcept>

#include "textgcn/rng.hpp"

namespace textgcn {

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows) throw std::logic_error("matmul: shape mismatch");
  Matrix c(a.rows, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.data.data() + i * a.cols;
    double* crow = c.data.data() + i * c.cols;
    for (std::size_t k = 0; k < a.cols; ++k) {
      const double aik = arow[k];
      if (aik == 0.0) continue;
      const double* brow = b.data.data() + k * b.cols;
      for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aik * brow[j];
    }
  }
  return c;
}

Matrix matmul_at_b(const Matrix& a, const Matrix& b) {
  if (a.rows != b.rows) throw std::logic_error("matmul_at_b: shape mismatch");
  Matrix c(a.cols, b.cols);
  for (std::size_t k = 0; k < a.rows; ++k) {
    const double* arow = a.data.data() + k * a.cols;
    const double* brow = b.data.data() + k * b.cols;
    for (std::size_t i = 0; i < a.cols; ++i) {
      const double aki = arow[i];
      if (aki == 0.0) continue;
      double* crow = c.data.data() + i * c.cols;
      for (std::size_t j = 0; j < b.cols; ++j) crow[j] += aki * brow[j];
    }
  }
  return c;
}

Matrix matmul_a_bt(const Matrix& a, const Matrix& b) {
  if (a.cols != b.cols) throw std::logic_error("matmul_a_bt: shape mismatch");
  Matrix c(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    const double* arow = a.data.data() + i * a.cols;
    double* crow = c.data.data() + i * c.cols;
    for (std::size_t j = 0; j < b.rows; ++j) {
      const double* brow = b.data.data() + j * b.cols;
      double acc = 0.0;
      for (std::size_t k = 0; k < a.cols; ++k) acc += arow[k] * brow[k];
      crow[j] = acc;
    }
  }
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols, a.rows);
  for (std::size_t i = 0; i < a.rows; ++i)
    for (std::size_t j = 0; j < a.cols; ++j) t(j, i) = a(i, j);
  return t;
}

void add_scaled(Matrix& dst, const Matrix& src, double scale) {
  if (!dst.same_shape(src)) throw std::logic_error("add_scaled: shape mismatch");
  for (std::size_t i = 0; i < dst.data.size(); ++i)
    dst.data[i] += scale * src.data[i];
}

void relu_inplace(Matrix& m) {
  for (double& v : m.data)
    if (v < 0.0) v = 0.0;
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void sigmoid_inplace(Matrix& m) {
  for (double& v : m.data) v = sigmoid(v);
}

double squared_norm(const Matrix& m) {
  double s = 0.0;
  for (double v : m.data) s += v * v;
  return s;
}

bool all_finite(const Matrix& m) {
  for (double v : m.data)
    if (!std::isfinite(v)) return false;
  return true;
}

Matrix glorot_uniform(std::size_t rows, std::size_t cols, Rng& rng) {
  Matrix m(rows, cols);
  const double s = std::sqrt(6.0 / static_cast<double>(rows + cols));
  for (double& v : m.data) v = rng.uniform(-s, s);
  return m;
}

}  // namespace textgcn
