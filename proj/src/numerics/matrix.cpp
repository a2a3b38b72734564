#include "biclkt/matrix.hpp"

#include <cmath>
#include <cstdio>

#include "biclkt/errors.hpp"
#include "biclkt/kernels.hpp"

namespace biclkt {

namespace {

void require_same_shape(const Matrix& a, const Matrix& b, const char* op) {
  if (!a.same_shape(b))
    throw DimensionError(std::string(op) + ": shape mismatch " + a.shape_str() + " vs " + b.shape_str());
}

}  // namespace

Matrix::Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {
  if (r < 0 || c < 0) throw DimensionError("negative matrix extent");
}

Matrix::Matrix(int r, int c, std::initializer_list<double> vals) : Matrix(r, c) {
  if (vals.size() != data.size()) throw DimensionError("initializer size does not match extent");
  size_t i = 0;
  for (double v : vals) data[i++] = v;
}

Matrix Matrix::full(int r, int c, double v) {
  Matrix m(r, c);
  for (auto& x : m.data) x = v;
  return m;
}

Matrix Matrix::identity(int n) {
  Matrix m(n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = 1.0;
  return m;
}

Matrix Matrix::xavier(int r, int c, Rng& rng) {
  Matrix m(r, c);
  const double limit = std::sqrt(6.0 / (static_cast<double>(r) + static_cast<double>(c)));
  for (auto& x : m.data) x = rng.uniform(-limit, limit);
  return m;
}

bool Matrix::all_finite() const {
  for (double v : data)
    if (!std::isfinite(v)) return false;
  return true;
}

std::string Matrix::shape_str() const {
  char buf[48];
  std::snprintf(buf, sizeof buf, "(%d x %d)", rows, cols);
  return buf;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols != b.rows)
    throw DimensionError("matmul: inner extents differ " + a.shape_str() + " * " + b.shape_str());
  Matrix c(a.rows, b.cols);
  if (a.size() && b.size())
    kern::ops().matmul(c.data.data(), a.data.data(), b.data.data(), a.rows, a.cols, b.cols);
  return c;
}

Matrix add(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "add");
  Matrix c(a.rows, a.cols);
  kern::ops().add(c.data.data(), a.data.data(), b.data.data(), a.size());
  return c;
}

Matrix sub(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "sub");
  Matrix c(a.rows, a.cols);
  kern::ops().sub(c.data.data(), a.data.data(), b.data.data(), a.size());
  return c;
}

Matrix hadamard(const Matrix& a, const Matrix& b) {
  require_same_shape(a, b, "hadamard");
  Matrix c(a.rows, a.cols);
  kern::ops().mul(c.data.data(), a.data.data(), b.data.data(), a.size());
  return c;
}

Matrix affine(const Matrix& a, double scale, double shift) {
  Matrix c(a.rows, a.cols);
  kern::ops().affine(c.data.data(), a.data.data(), scale, shift, a.size());
  return c;
}

Matrix transpose(const Matrix& a) {
  Matrix t(a.cols, a.rows);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) t.at(j, i) = a.at(i, j);
  return t;
}

Matrix sigmoid_m(const Matrix& a) {
  Matrix c(a.rows, a.cols);
  for (size_t i = 0; i < a.size(); ++i) {
    const double x = a.data[i];
    if (x >= 0.0) {
      c.data[i] = 1.0 / (1.0 + std::exp(-x));
    } else {
      const double e = std::exp(x);
      c.data[i] = e / (1.0 + e);
    }
  }
  return c;
}

Matrix tanh_m(const Matrix& a) {
  Matrix c(a.rows, a.cols);
  for (size_t i = 0; i < a.size(); ++i) c.data[i] = std::tanh(a.data[i]);
  return c;
}

Matrix relu_m(const Matrix& a) {
  Matrix c(a.rows, a.cols);
  kern::ops().relu(c.data.data(), a.data.data(), a.size());
  return c;
}

Matrix exp_m(const Matrix& a) {
  Matrix c(a.rows, a.cols);
  for (size_t i = 0; i < a.size(); ++i) c.data[i] = std::exp(a.data[i] > 700.0 ? 700.0 : a.data[i]);
  return c;
}

Matrix log_m(const Matrix& a) {
  Matrix c(a.rows, a.cols);
  for (size_t i = 0; i < a.size(); ++i) c.data[i] = std::log(a.data[i] < 1e-300 ? 1e-300 : a.data[i]);
  return c;
}

Matrix softmax_rows(const Matrix& a) {
  Matrix c(a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i) {
    double mx = -1e308;
    for (int j = 0; j < a.cols; ++j) mx = std::max(mx, a.at(i, j));
    double denom = 0.0;
    for (int j = 0; j < a.cols; ++j) {
      const double e = std::exp(a.at(i, j) - mx);
      c.at(i, j) = e;
      denom += e;
    }
    for (int j = 0; j < a.cols; ++j) c.at(i, j) /= denom;
  }
  return c;
}

Matrix normalize_rows(const Matrix& a) {
  Matrix c(a.rows, a.cols);
  for (int i = 0; i < a.rows; ++i) {
    double ss = 0.0;
    for (int j = 0; j < a.cols; ++j) ss += a.at(i, j) * a.at(i, j);
    const double norm = std::sqrt(ss);
    if (norm == 0.0) {
      for (int j = 0; j < a.cols; ++j) c.at(i, j) = 0.0;
    } else {
      for (int j = 0; j < a.cols; ++j) c.at(i, j) = a.at(i, j) / norm;
    }
  }
  return c;
}

double sum(const Matrix& a) {
  double s = 0.0;
  for (double v : a.data) s += v;
  return s;
}

Matrix col_sums(const Matrix& a) {
  Matrix c(1, a.cols);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) c.at(0, j) += a.at(i, j);
  return c;
}

Matrix row_sums(const Matrix& a) {
  Matrix c(a.rows, 1);
  for (int i = 0; i < a.rows; ++i)
    for (int j = 0; j < a.cols; ++j) c.at(i, 0) += a.at(i, j);
  return c;
}

double dot(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size()) throw DimensionError("dot: length mismatch");
  double s = 0.0;
  for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double cosine_sim(const std::vector<double>& a, const std::vector<double>& b) {
  const double na = std::sqrt(dot(a, a));
  const double nb = std::sqrt(dot(b, b));
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot(a, b) / (na * nb);
}

}  // namespace biclkt
