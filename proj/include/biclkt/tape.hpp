#pragma once

#include <functional>
#include <string>
#include <vector>

#include "biclkt/matrix.hpp"

namespace biclkt {

// A named trainable tensor plus its gradient accumulator and Adam moments.
// Training code owns Params; tapes bind to them per forward pass.
struct Param {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix m, v;  // Adam moments, sized on first optimizer step

  Param() = default;
  Param(std::string n, Matrix val) : name(std::move(n)), value(std::move(val)) {
    grad = Matrix::zeros(value.rows, value.cols);
  }
  void zero_grad() { std::fill(grad.data.begin(), grad.data.end(), 0.0); }
};

struct Var {
  int id = -1;
};

// Reverse-mode autodiff over an explicit operation tape. Nodes are appended
// in forward order; parents always precede children, so backward is a single
// reverse sweep. A tape is consumable exactly once: backward() on a spent
// tape is a contract error, as is backward() from a non-scalar node.
class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(Matrix v);
  Var leaf(Param& p);  // snapshot of p.value; backward adds into p.grad

  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var hadamard(Var a, Var b);
  Var matmul(Var a, Var b);
  Var transpose(Var a);
  Var affine(Var a, double scale, double shift);
  Var sigmoid(Var a);
  Var tanh(Var a);
  Var relu(Var a);
  Var exp(Var a);  // input saturated at 700; saturated entries get zero grad
  Var log(Var a);  // input floored at 1e-300; floored entries get zero grad
  Var softmax_rows(Var a);
  Var normalize_rows(Var a);  // unit L2 rows; zero rows stay zero
  Var sum_all(Var a);         // 1x1
  Var mean_all(Var a);        // 1x1
  Var col_sums(Var a);        // 1 x c
  Var row_sums(Var a);        // r x 1
  Var concat_cols(Var a, Var b);
  Var concat_rows(Var a, Var b);
  Var gather_rows(Var a, std::vector<int> idx);
  Var gather_cols(Var a, std::vector<int> idx);
  Var add_rowvec(Var m, Var v);  // v: 1 x c, added to every row
  Var add_colvec(Var m, Var v);  // v: r x 1, added to every column
  Var mul_colvec(Var m, Var v);  // row i scaled by v[i]
  // elementwise binary cross-entropy against constant targets in [0,1],
  // computed from logits in the overflow-safe form
  Var bce_with_logits(Var z, Matrix targets);

  const Matrix& val(Var v) const;
  // gradient of the loss w.r.t. node v (valid after backward)
  const Matrix& grad(Var v) const;
  bool has_grad(Var v) const;

  void backward(Var loss);
  bool consumed() const { return consumed_; }
  size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    bool grad_ready = false;
    std::function<void(Tape&)> back;
    Param* bound = nullptr;
  };

  int push(Matrix value, bool requires_grad);
  Matrix& gbuf(int id);
  void acc(int id, const Matrix& delta);
  const Matrix& v_(int id) const { return nodes_[id].value; }
  bool rg_(int id) const { return nodes_[id].requires_grad; }

  std::vector<Node> nodes_;
  bool consumed_ = false;
};

// Adam optimizer configuration and shared step counter. Moments live on the
// Params; one call to adam_update advances every listed param by one step.
struct AdamState {
  double lr = 0.001;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  long long step_count = 0;
};

void adam_update(const std::vector<Param*>& params, AdamState& st);

}  // namespace biclkt
