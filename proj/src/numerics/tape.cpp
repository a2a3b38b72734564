#include "biclkt/tape.hpp"

#include <cmath>

#include "biclkt/errors.hpp"
#include "biclkt/kernels.hpp"

namespace biclkt {

int Tape::push(Matrix value, bool requires_grad) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = requires_grad;
  nodes_.push_back(std::move(n));
  return static_cast<int>(nodes_.size()) - 1;
}

Matrix& Tape::gbuf(int id) {
  Node& n = nodes_[id];
  if (!n.grad_ready) {
    n.grad = Matrix::zeros(n.value.rows, n.value.cols);
    n.grad_ready = true;
  }
  return n.grad;
}

void Tape::acc(int id, const Matrix& delta) {
  if (!nodes_[id].requires_grad) return;
  Matrix& g = gbuf(id);
  kern::ops().axpy(g.data.data(), 1.0, delta.data.data(), delta.size());
}

Var Tape::constant(Matrix v) { return {push(std::move(v), false)}; }

Var Tape::leaf(Param& p) {
  int id = push(p.value, true);
  nodes_[id].bound = &p;
  return {id};
}

Var Tape::add(Var a, Var b) {
  int id = push(biclkt::add(v_(a.id), v_(b.id)), rg_(a.id) || rg_(b.id));
  nodes_[id].back = [a, b, id](Tape& t) {
    t.acc(a.id, t.nodes_[id].grad);
    t.acc(b.id, t.nodes_[id].grad);
  };
  return {id};
}

Var Tape::sub(Var a, Var b) {
  int id = push(biclkt::sub(v_(a.id), v_(b.id)), rg_(a.id) || rg_(b.id));
  nodes_[id].back = [a, b, id](Tape& t) {
    const Matrix& g = t.nodes_[id].grad;
    t.acc(a.id, g);
    if (t.rg_(b.id)) {
      Matrix& gb = t.gbuf(b.id);
      kern::ops().axpy(gb.data.data(), -1.0, g.data.data(), g.size());
    }
  };
  return {id};
}

Var Tape::hadamard(Var a, Var b) {
  int id = push(biclkt::hadamard(v_(a.id), v_(b.id)), rg_(a.id) || rg_(b.id));
  nodes_[id].back = [a, b, id](Tape& t) {
    const Matrix& g = t.nodes_[id].grad;
    if (t.rg_(a.id)) t.acc(a.id, biclkt::hadamard(g, t.v_(b.id)));
    if (t.rg_(b.id)) t.acc(b.id, biclkt::hadamard(g, t.v_(a.id)));
  };
  return {id};
}

Var Tape::matmul(Var a, Var b) {
  int id = push(biclkt::matmul(v_(a.id), v_(b.id)), rg_(a.id) || rg_(b.id));
  nodes_[id].back = [a, b, id](Tape& t) {
    const Matrix& g = t.nodes_[id].grad;
    if (t.rg_(a.id)) t.acc(a.id, biclkt::matmul(g, biclkt::transpose(t.v_(b.id))));
    if (t.rg_(b.id)) t.acc(b.id, biclkt::matmul(biclkt::transpose(t.v_(a.id)), g));
  };
  return {id};
}

Var Tape::transpose(Var a) {
  int id = push(biclkt::transpose(v_(a.id)), rg_(a.id));
  nodes_[id].back = [a, id](Tape& t) { t.acc(a.id, biclkt::transpose(t.nodes_[id].grad)); };
  return {id};
}

Var Tape::affine(Var a, double scale, double shift) {
  int id = push(biclkt::affine(v_(a.id), scale, shift), rg_(a.id));
  nodes_[id].back = [a, id, scale](Tape& t) {
    if (!t.rg_(a.id)) return;
    const Matrix& g = t.nodes_[id].grad;
    Matrix& ga = t.gbuf(a.id);
    kern::ops().axpy(ga.data.data(), scale, g.data.data(), g.size());
  };
  return {id};
}

Var Tape::sigmoid(Var a) {
  int id = push(sigmoid_m(v_(a.id)), rg_(a.id));
  nodes_[id].back = [a, id](Tape& t) {
    if (!t.rg_(a.id)) return;
    const Matrix& g = t.nodes_[id].grad;
    const Matrix& y = t.nodes_[id].value;
    Matrix d(y.rows, y.cols);
    for (size_t i = 0; i < d.size(); ++i) d.data[i] = g.data[i] * y.data[i] * (1.0 - y.data[i]);
    t.acc(a.id, d);
  };
  return {id};
}

Var Tape::tanh(Var a) {
  int id = push(tanh_m(v_(a.id)), rg_(a.id));
  nodes_[id].back = [a, id](Tape& t) {
    if (!t.rg_(a.id)) return;
    const Matrix& g = t.nodes_[id].grad;
    const Matrix& y = t.nodes_[id].value;
    Matrix d(y.rows, y.cols);
    for (size_t i = 0; i < d.size(); ++i) d.data[i] = g.data[i] * (1.0 - y.data[i] * y.data[i]);
    t.acc(a.id, d);
  };
  return {id};
}

Var Tape::relu(Var a) {
  int id = push(relu_m(v_(a.id)), rg_(a.id));
  nodes_[id].back = [a, id](Tape& t) {
    if (!t.rg_(a.id)) return;
    const Matrix& g = t.nodes_[id].grad;
    const Matrix& x = t.v_(a.id);
    Matrix& ga = t.gbuf(a.id);
    kern::ops().relu_bwd_acc(ga.data.data(), g.data.data(), x.data.data(), g.size());
  };
  return {id};
}

Var Tape::exp(Var a) {
  int id = push(exp_m(v_(a.id)), rg_(a.id));
  nodes_[id].back = [a, id](Tape& t) {
    if (!t.rg_(a.id)) return;
    const Matrix& g = t.nodes_[id].grad;
    const Matrix& y = t.nodes_[id].value;
    const Matrix& x = t.v_(a.id);
    Matrix d(y.rows, y.cols);
    for (size_t i = 0; i < d.size(); ++i)
      d.data[i] = x.data[i] > 700.0 ? 0.0 : g.data[i] * y.data[i];
    t.acc(a.id, d);
  };
  return {id};
}

Var Tape::log(Var a) {
  int id = push(log_m(v_(a.id)), rg_(a.id));
  nodes_[id].back = [a, id](Tape& t) {
    if (!t.rg_(a.id)) return;
    const Matrix& g = t.nodes_[id].grad;
    const Matrix& x = t.v_(a.id);
    Matrix d(x.rows, x.cols);
    for (size_t i = 0; i < d.size(); ++i)
      d.data[i] = x.data[i] < 1e-300 ? 0.0 : g.data[i] / x.data[i];
    t.acc(a.id, d);
  };
  return {id};
}

Var Tape::softmax_rows(Var a) {
  int id = push(biclkt::softmax_rows(v_(a.id)), rg_(a.id));
  nodes_[id].back = [a, id](Tape& t) {
    if (!t.rg_(a.id)) return;
    const Matrix& g = t.nodes_[id].grad;
    const Matrix& y = t.nodes_[id].value;
    Matrix d(y.rows, y.cols);
    for (int i = 0; i < y.rows; ++i) {
      double s = 0.0;
      for (int j = 0; j < y.cols; ++j) s += g.at(i, j) * y.at(i, j);
      for (int j = 0; j < y.cols; ++j) d.at(i, j) = y.at(i, j) * (g.at(i, j) - s);
    }
    t.acc(a.id, d);
  };
  return {id};
}

Var Tape::normalize_rows(Var a) {
  const Matrix& x = v_(a.id);
  std::vector<double> norms(x.rows, 0.0);
  for (int i = 0; i < x.rows; ++i) {
    double ss = 0.0;
    for (int j = 0; j < x.cols; ++j) ss += x.at(i, j) * x.at(i, j);
    norms[i] = std::sqrt(ss);
  }
  int id = push(biclkt::normalize_rows(x), rg_(a.id));
  nodes_[id].back = [a, id, norms](Tape& t) {
    if (!t.rg_(a.id)) return;
    const Matrix& g = t.nodes_[id].grad;
    const Matrix& y = t.nodes_[id].value;
    Matrix d(y.rows, y.cols);
    for (int i = 0; i < y.rows; ++i) {
      if (norms[i] == 0.0) continue;
      double gy = 0.0;
      for (int j = 0; j < y.cols; ++j) gy += g.at(i, j) * y.at(i, j);
      for (int j = 0; j < y.cols; ++j) d.at(i, j) = (g.at(i, j) - gy * y.at(i, j)) / norms[i];
    }
    t.acc(a.id, d);
  };
  return {id};
}

Var Tape::sum_all(Var a) {
  Matrix s(1, 1);
  s.at(0, 0) = biclkt::sum(v_(a.id));
  int id = push(std::move(s), rg_(a.id));
  nodes_[id].back = [a, id](Tape& t) {
    if (!t.rg_(a.id)) return;
    const double g = t.nodes_[id].grad.at(0, 0);
    const Matrix& x = t.v_(a.id);
    t.acc(a.id, Matrix::full(x.rows, x.cols, g));
  };
  return {id};
}

Var Tape::mean_all(Var a) {
  const size_t n = v_(a.id).size();
  if (n == 0) throw DimensionError("mean_all of empty matrix");
  return affine(sum_all(a), 1.0 / static_cast<double>(n), 0.0);
}

Var Tape::col_sums(Var a) {
  int id = push(biclkt::col_sums(v_(a.id)), rg_(a.id));
  nodes_[id].back = [a, id](Tape& t) {
    if (!t.rg_(a.id)) return;
    const Matrix& g = t.nodes_[id].grad;  // 1 x c
    const Matrix& x = t.v_(a.id);
    Matrix d(x.rows, x.cols);
    for (int i = 0; i < x.rows; ++i)
      for (int j = 0; j < x.cols; ++j) d.at(i, j) = g.at(0, j);
    t.acc(a.id, d);
  };
  return {id};
}

Var Tape::row_sums(Var a) {
  int id = push(biclkt::row_sums(v_(a.id)), rg_(a.id));
  nodes_[id].back = [a, id](Tape& t) {
    if (!t.rg_(a.id)) return;
    const Matrix& g = t.nodes_[id].grad;  // r x 1
    const Matrix& x = t.v_(a.id);
    Matrix d(x.rows, x.cols);
    for (int i = 0; i < x.rows; ++i)
      for (int j = 0; j < x.cols; ++j) d.at(i, j) = g.at(i, 0);
    t.acc(a.id, d);
  };
  return {id};
}

Var Tape::concat_cols(Var a, Var b) {
  const Matrix& x = v_(a.id);
  const Matrix& y = v_(b.id);
  if (x.rows != y.rows) throw DimensionError("concat_cols: row mismatch");
  Matrix o(x.rows, x.cols + y.cols);
  for (int i = 0; i < x.rows; ++i) {
    for (int j = 0; j < x.cols; ++j) o.at(i, j) = x.at(i, j);
    for (int j = 0; j < y.cols; ++j) o.at(i, x.cols + j) = y.at(i, j);
  }
  const int ac = x.cols, bc = y.cols;  // snapshot before push invalidates x, y
  int id = push(std::move(o), rg_(a.id) || rg_(b.id));
  nodes_[id].back = [a, b, id, ac, bc](Tape& t) {
    const Matrix& g = t.nodes_[id].grad;
    if (t.rg_(a.id)) {
      Matrix da(g.rows, ac);
      for (int i = 0; i < g.rows; ++i)
        for (int j = 0; j < ac; ++j) da.at(i, j) = g.at(i, j);
      t.acc(a.id, da);
    }
    if (t.rg_(b.id)) {
      Matrix db(g.rows, bc);
      for (int i = 0; i < g.rows; ++i)
        for (int j = 0; j < bc; ++j) db.at(i, j) = g.at(i, ac + j);
      t.acc(b.id, db);
    }
  };
  return {id};
}

Var Tape::concat_rows(Var a, Var b) {
  const Matrix& x = v_(a.id);
  const Matrix& y = v_(b.id);
  if (x.cols != y.cols) throw DimensionError("concat_rows: column mismatch");
  Matrix o(x.rows + y.rows, x.cols);
  for (int i = 0; i < x.rows; ++i)
    for (int j = 0; j < x.cols; ++j) o.at(i, j) = x.at(i, j);
  for (int i = 0; i < y.rows; ++i)
    for (int j = 0; j < y.cols; ++j) o.at(x.rows + i, j) = y.at(i, j);
  const int ar = x.rows;  // snapshot before push invalidates x, y
  int id = push(std::move(o), rg_(a.id) || rg_(b.id));
  nodes_[id].back = [a, b, id, ar](Tape& t) {
    const Matrix& g = t.nodes_[id].grad;
    if (t.rg_(a.id)) {
      Matrix da(ar, g.cols);
      for (int i = 0; i < ar; ++i)
        for (int j = 0; j < g.cols; ++j) da.at(i, j) = g.at(i, j);
      t.acc(a.id, da);
    }
    if (t.rg_(b.id)) {
      Matrix db(g.rows - ar, g.cols);
      for (int i = 0; i < g.rows - ar; ++i)
        for (int j = 0; j < g.cols; ++j) db.at(i, j) = g.at(ar + i, j);
      t.acc(b.id, db);
    }
  };
  return {id};
}

Var Tape::gather_rows(Var a, std::vector<int> idx) {
  const Matrix& x = v_(a.id);
  Matrix o(static_cast<int>(idx.size()), x.cols);
  for (size_t r = 0; r < idx.size(); ++r) {
    if (idx[r] < 0 || idx[r] >= x.rows) throw DimensionError("gather_rows: index out of range");
    for (int j = 0; j < x.cols; ++j) o.at(static_cast<int>(r), j) = x.at(idx[r], j);
  }
  int id = push(std::move(o), rg_(a.id));
  nodes_[id].back = [a, id, idx](Tape& t) {
    if (!t.rg_(a.id)) return;
    const Matrix& g = t.nodes_[id].grad;
    Matrix& ga = t.gbuf(a.id);
    for (size_t r = 0; r < idx.size(); ++r)
      for (int j = 0; j < g.cols; ++j) ga.at(idx[r], j) += g.at(static_cast<int>(r), j);
  };
  return {id};
}

Var Tape::gather_cols(Var a, std::vector<int> idx) {
  const Matrix& x = v_(a.id);
  Matrix o(x.rows, static_cast<int>(idx.size()));
  for (size_t c = 0; c < idx.size(); ++c) {
    if (idx[c] < 0 || idx[c] >= x.cols) throw DimensionError("gather_cols: index out of range");
    for (int i = 0; i < x.rows; ++i) o.at(i, static_cast<int>(c)) = x.at(i, idx[c]);
  }
  int id = push(std::move(o), rg_(a.id));
  nodes_[id].back = [a, id, idx](Tape& t) {
    if (!t.rg_(a.id)) return;
    const Matrix& g = t.nodes_[id].grad;
    Matrix& ga = t.gbuf(a.id);
    for (size_t c = 0; c < idx.size(); ++c)
      for (int i = 0; i < g.rows; ++i) ga.at(i, idx[c]) += g.at(i, static_cast<int>(c));
  };
  return {id};
}

Var Tape::add_rowvec(Var m, Var v) {
  const Matrix& x = v_(m.id);
  const Matrix& b = v_(v.id);
  if (b.rows != 1 || b.cols != x.cols) throw DimensionError("add_rowvec: need 1 x cols vector");
  Matrix o(x.rows, x.cols);
  for (int i = 0; i < x.rows; ++i)
    for (int j = 0; j < x.cols; ++j) o.at(i, j) = x.at(i, j) + b.at(0, j);
  int id = push(std::move(o), rg_(m.id) || rg_(v.id));
  nodes_[id].back = [m, v, id](Tape& t) {
    const Matrix& g = t.nodes_[id].grad;
    t.acc(m.id, g);
    if (t.rg_(v.id)) t.acc(v.id, biclkt::col_sums(g));
  };
  return {id};
}

Var Tape::add_colvec(Var m, Var v) {
  const Matrix& x = v_(m.id);
  const Matrix& c = v_(v.id);
  if (c.cols != 1 || c.rows != x.rows) throw DimensionError("add_colvec: need rows x 1 vector");
  Matrix o(x.rows, x.cols);
  for (int i = 0; i < x.rows; ++i)
    for (int j = 0; j < x.cols; ++j) o.at(i, j) = x.at(i, j) + c.at(i, 0);
  int id = push(std::move(o), rg_(m.id) || rg_(v.id));
  nodes_[id].back = [m, v, id](Tape& t) {
    const Matrix& g = t.nodes_[id].grad;
    t.acc(m.id, g);
    if (t.rg_(v.id)) t.acc(v.id, biclkt::row_sums(g));
  };
  return {id};
}

Var Tape::mul_colvec(Var m, Var v) {
  const Matrix& x = v_(m.id);
  const Matrix& c = v_(v.id);
  if (c.cols != 1 || c.rows != x.rows) throw DimensionError("mul_colvec: need rows x 1 vector");
  Matrix o(x.rows, x.cols);
  for (int i = 0; i < x.rows; ++i)
    for (int j = 0; j < x.cols; ++j) o.at(i, j) = x.at(i, j) * c.at(i, 0);
  int id = push(std::move(o), rg_(m.id) || rg_(v.id));
  nodes_[id].back = [m, v, id](Tape& t) {
    const Matrix& g = t.nodes_[id].grad;
    const Matrix& x2 = t.v_(m.id);
    const Matrix& c2 = t.v_(v.id);
    if (t.rg_(m.id)) {
      Matrix d(g.rows, g.cols);
      for (int i = 0; i < g.rows; ++i)
        for (int j = 0; j < g.cols; ++j) d.at(i, j) = g.at(i, j) * c2.at(i, 0);
      t.acc(m.id, d);
    }
    if (t.rg_(v.id)) {
      Matrix d(g.rows, 1);
      for (int i = 0; i < g.rows; ++i) {
        double s = 0.0;
        for (int j = 0; j < g.cols; ++j) s += g.at(i, j) * x2.at(i, j);
        d.at(i, 0) = s;
      }
      t.acc(v.id, d);
    }
  };
  return {id};
}

Var Tape::bce_with_logits(Var z, Matrix targets) {
  const Matrix& x = v_(z.id);
  if (!x.same_shape(targets)) throw DimensionError("bce_with_logits: target shape mismatch");
  Matrix o(x.rows, x.cols);
  for (size_t i = 0; i < x.size(); ++i) {
    const double zi = x.data[i];
    const double yi = targets.data[i];
    o.data[i] = (zi > 0.0 ? zi : 0.0) - zi * yi + std::log1p(std::exp(-std::fabs(zi)));
  }
  int id = push(std::move(o), rg_(z.id));
  nodes_[id].back = [z, id, targets](Tape& t) {
    if (!t.rg_(z.id)) return;
    const Matrix& g = t.nodes_[id].grad;
    const Matrix sig = sigmoid_m(t.v_(z.id));
    Matrix d(g.rows, g.cols);
    for (size_t i = 0; i < d.size(); ++i) d.data[i] = g.data[i] * (sig.data[i] - targets.data[i]);
    t.acc(z.id, d);
  };
  return {id};
}

const Matrix& Tape::val(Var v) const {
  if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) throw ContractError("val: bad var");
  return nodes_[v.id].value;
}

const Matrix& Tape::grad(Var v) const {
  if (v.id < 0 || v.id >= static_cast<int>(nodes_.size())) throw ContractError("grad: bad var");
  if (!nodes_[v.id].grad_ready) throw ContractError("grad: not populated; run backward first");
  return nodes_[v.id].grad;
}

bool Tape::has_grad(Var v) const {
  return v.id >= 0 && v.id < static_cast<int>(nodes_.size()) && nodes_[v.id].grad_ready;
}

void Tape::backward(Var loss) {
  if (consumed_) throw ContractError("tape already consumed by a previous backward");
  consumed_ = true;
  if (loss.id < 0 || loss.id >= static_cast<int>(nodes_.size())) throw ContractError("backward: bad var");
  Node& top = nodes_[loss.id];
  if (top.value.rows != 1 || top.value.cols != 1)
    throw ContractError("backward requires a 1x1 loss, got " + top.value.shape_str());
  gbuf(loss.id).at(0, 0) = 1.0;
  for (int i = loss.id; i >= 0; --i) {
    Node& n = nodes_[i];
    if (!n.requires_grad || !n.grad_ready) continue;
    if (n.back) n.back(*this);
    if (n.bound) {
      kern::ops().axpy(n.bound->grad.data.data(), 1.0, n.grad.data.data(), n.grad.size());
    }
  }
}

void adam_update(const std::vector<Param*>& params, AdamState& st) {
  st.step_count += 1;
  const double c1 = 1.0 / (1.0 - std::pow(st.beta1, static_cast<double>(st.step_count)));
  const double c2 = 1.0 / (1.0 - std::pow(st.beta2, static_cast<double>(st.step_count)));
  for (Param* p : params) {
    if (p->m.size() != p->value.size()) {
      p->m = Matrix::zeros(p->value.rows, p->value.cols);
      p->v = Matrix::zeros(p->value.rows, p->value.cols);
    }
    kern::ops().adam_step(p->value.data.data(), p->m.data.data(), p->v.data.data(),
                          p->grad.data.data(), p->value.size(), st.lr, st.beta1, st.beta2, st.eps,
                          c1, c2);
  }
}

}  // namespace biclkt
