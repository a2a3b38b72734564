#pragma once

#include <cstddef>
#include <initializer_list>
#include <string>
#include <vector>

#include "biclkt/rng.hpp"

namespace biclkt {

// Dense row-major matrix of 64-bit floats. All model state and all math in
// the project lives in this one representation.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c);  // zero-filled
  Matrix(int r, int c, std::initializer_list<double> vals);

  static Matrix zeros(int r, int c) { return Matrix(r, c); }
  static Matrix full(int r, int c, double v);
  static Matrix identity(int n);
  // uniform in +-sqrt(6 / (fan_in + fan_out)); fan_in = rows, fan_out = cols
  static Matrix xavier(int r, int c, Rng& rng);

  double& at(int i, int j) { return data[static_cast<size_t>(i) * cols + j]; }
  double at(int i, int j) const { return data[static_cast<size_t>(i) * cols + j]; }

  size_t size() const { return data.size(); }
  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }
  bool all_finite() const;
  std::string shape_str() const;
};

// shape-checked ops; DimensionError on mismatch
Matrix matmul(const Matrix& a, const Matrix& b);
Matrix add(const Matrix& a, const Matrix& b);
Matrix sub(const Matrix& a, const Matrix& b);
Matrix hadamard(const Matrix& a, const Matrix& b);
Matrix affine(const Matrix& a, double scale, double shift);
Matrix transpose(const Matrix& a);

// elementwise maps
Matrix sigmoid_m(const Matrix& a);  // overflow-safe at any finite input
Matrix tanh_m(const Matrix& a);
Matrix relu_m(const Matrix& a);
Matrix exp_m(const Matrix& a);  // input saturated at 700 to stay finite
Matrix log_m(const Matrix& a);  // input floored at 1e-300 to stay finite

Matrix softmax_rows(const Matrix& a);
// each row scaled to unit L2 norm; all-zero rows pass through unchanged
Matrix normalize_rows(const Matrix& a);

double sum(const Matrix& a);
Matrix col_sums(const Matrix& a);  // 1 x cols, accumulated down rows in order
Matrix row_sums(const Matrix& a);  // rows x 1

double dot(const std::vector<double>& a, const std::vector<double>& b);
// 0 when either vector is all-zero
double cosine_sim(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace biclkt
