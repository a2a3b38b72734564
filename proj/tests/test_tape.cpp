#include <cmath>
#include <vector>

#include "biclkt/errors.hpp"
#include "biclkt/tape.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace biclkt;
using testutil::fd_check;

namespace {

constexpr int kSeeds = 20;
constexpr double kTol = 1e-4;

Param rand_param(const char* name, int r, int c, Rng& rng, double lo = -2.0, double hi = 2.0) {
  Matrix m(r, c);
  for (auto& v : m.data) v = rng.uniform(lo, hi);
  return Param(name, std::move(m));
}

// loss = sum(R .* f(inputs)); R fixed random weights so upstream gradients
// are non-uniform
double weighted_sum_loss(Tape& t, Var out, const Matrix& weights) {
  Var r = t.constant(weights);
  return t.val(t.sum_all(t.hadamard(out, r))).at(0, 0);
}

Matrix rand_mat(int r, int c, Rng& rng, double lo = -2.0, double hi = 2.0) {
  Matrix m(r, c);
  for (auto& v : m.data) v = rng.uniform(lo, hi);
  return m;
}

}  // namespace

TEST_CASE("every tape op passes central finite differences over 20 seeds") {
  for (int seed = 0; seed < kSeeds; ++seed) {
    Rng rng(1000 + seed);
    Param a = rand_param("a", 3, 4, rng);
    Param b = rand_param("b", 3, 4, rng);
    Param w = rand_param("w", 4, 5, rng);
    Param cvec = rand_param("c", 3, 1, rng);
    Param rvec = rand_param("r", 1, 4, rng);
    Matrix r34 = rand_mat(3, 4, rng);
    Matrix r34b = rand_mat(3, 4, rng);
    Matrix r35 = rand_mat(3, 5, rng);
    Matrix r43 = rand_mat(4, 3, rng);
    Matrix r31 = rand_mat(3, 1, rng);
    Matrix r14 = rand_mat(1, 4, rng);
    Matrix r38 = rand_mat(3, 8, rng);
    Matrix r64 = rand_mat(6, 4, rng);
    Matrix r44 = rand_mat(4, 4, rng);
    Matrix r33 = rand_mat(3, 3, rng);
    Matrix targets = rand_mat(3, 4, rng, 0.05, 0.95);

    auto check = [&](const char* what, const std::vector<Param*>& ps,
                     const std::function<double(bool)>& run) {
      auto rep = fd_check(ps, run);
      INFO(what << " seed " << seed << " max_rel " << rep.max_rel);
      CHECK(rep.max_rel < kTol);
    };

    check("add", {&a, &b}, [&](bool g) {
      Tape t;
      double l = weighted_sum_loss(t, t.add(t.leaf(a), t.leaf(b)), r34);
      if (g) t.backward(Var{static_cast<int>(t.size()) - 1});
      return l;
    });
    check("sub", {&a, &b}, [&](bool g) {
      Tape t;
      double l = weighted_sum_loss(t, t.sub(t.leaf(a), t.leaf(b)), r34);
      if (g) t.backward(Var{static_cast<int>(t.size()) - 1});
      return l;
    });
    check("hadamard", {&a, &b}, [&](bool g) {
      Tape t;
      double l = weighted_sum_loss(t, t.hadamard(t.leaf(a), t.leaf(b)), r34);
      if (g) t.backward(Var{static_cast<int>(t.size()) - 1});
      return l;
    });
    check("matmul", {&a, &w}, [&](bool g) {
      Tape t;
      double l = weighted_sum_loss(t, t.matmul(t.leaf(a), t.leaf(w)), r35);
      if (g) t.backward(Var{static_cast<int>(t.size()) - 1});
      return l;
    });
    check("transpose", {&a}, [&](bool g) {
      Tape t;
      double l = weighted_sum_loss(t, t.transpose(t.leaf(a)), r43);
      if (g) t.backward(Var{static_cast<int>(t.size()) - 1});
      return l;
    });
    check("affine", {&a}, [&](bool g) {
      Tape t;
      double l = weighted_sum_loss(t, t.affine(t.leaf(a), -1.7, 0.4), r34);
      if (g) t.backward(Var{static_cast<int>(t.size()) - 1});
      return l;
    });
    check("sigmoid", {&a}, [&](bool g) {
      Tape t;
      double l = weighted_sum_loss(t, t.sigmoid(t.leaf(a)), r34);
      if (g) t.backward(Var{static_cast<int>(t.size()) - 1});
      return l;
    });
    check("tanh", {&a}, [&](bool g) {
      Tape t;
      double l = weighted_sum_loss(t, t.tanh(t.leaf(a)), r34);
      if (g) t.backward(Var{static_cast<int>(t.size()) - 1});
      return l;
    });
    check("relu", {&a}, [&](bool g) {
      Tape t;
      double l = weighted_sum_loss(t, t.relu(t.leaf(a)), r34);
      if (g) t.backward(Var{static_cast<int>(t.size()) - 1});
      return l;
    });
    check("exp", {&a}, [&](bool g) {
      Tape t;
      double l = weighted_sum_loss(t, t.exp(t.leaf(a)), r34);
      if (g) t.backward(Var{static_cast<int>(t.size()) - 1});
      return l;
    });
    check("log", {&a}, [&](bool g) {
      Tape t;
      // shift into the positive domain
      double l = weighted_sum_loss(t, t.log(t.affine(t.leaf(a), 0.2, 3.0)), r34);
      if (g) t.backward(Var{static_cast<int>(t.size()) - 1});
      return l;
    });
    check("softmax_rows", {&a}, [&](bool g) {
      Tape t;
      double l = weighted_sum_loss(t, t.softmax_rows(t.leaf(a)), r34);
      if (g) t.backward(Var{static_cast<int>(t.size()) - 1});
      return l;
    });
    check("normalize_rows", {&a}, [&](bool g) {
      Tape t;
      double l = weighted_sum_loss(t, t.normalize_rows(t.leaf(a)), r34);
      if (g) t.backward(Var{static_cast<int>(t.size()) - 1});
      return l;
    });
    check("sum_all", {&a}, [&](bool g) {
      Tape t;
      Var out = t.affine(t.sum_all(t.leaf(a)), 1.3, 0.0);
      double l = t.val(out).at(0, 0);
      if (g) t.backward(out);
      return l;
    });
    check("mean_all", {&a}, [&](bool g) {
      Tape t;
      Var out = t.mean_all(t.leaf(a));
      double l = t.val(out).at(0, 0);
      if (g) t.backward(out);
      return l;
    });
    check("col_sums", {&a}, [&](bool g) {
      Tape t;
      double l = weighted_sum_loss(t, t.col_sums(t.leaf(a)), r14);
      if (g) t.backward(Var{static_cast<int>(t.size()) - 1});
      return l;
    });
    check("row_sums", {&a}, [&](bool g) {
      Tape t;
      double l = weighted_sum_loss(t, t.row_sums(t.leaf(a)), r31);
      if (g) t.backward(Var{static_cast<int>(t.size()) - 1});
      return l;
    });
    check("concat_cols", {&a, &b}, [&](bool g) {
      Tape t;
      double l = weighted_sum_loss(t, t.concat_cols(t.leaf(a), t.leaf(b)), r38);
      if (g) t.backward(Var{static_cast<int>(t.size()) - 1});
      return l;
    });
    check("concat_rows", {&a, &b}, [&](bool g) {
      Tape t;
      double l = weighted_sum_loss(t, t.concat_rows(t.leaf(a), t.leaf(b)), r64);
      if (g) t.backward(Var{static_cast<int>(t.size()) - 1});
      return l;
    });
    check("gather_rows with a repeated row", {&a}, [&](bool g) {
      Tape t;
      double l = weighted_sum_loss(t, t.gather_rows(t.leaf(a), {2, 0, 2, 1}), r44);
      if (g) t.backward(Var{static_cast<int>(t.size()) - 1});
      return l;
    });
    check("gather_cols", {&a}, [&](bool g) {
      Tape t;
      double l = weighted_sum_loss(t, t.gather_cols(t.leaf(a), {3, 3, 1}), r33);
      if (g) t.backward(Var{static_cast<int>(t.size()) - 1});
      return l;
    });
    check("add_rowvec", {&a, &rvec}, [&](bool g) {
      Tape t;
      double l = weighted_sum_loss(t, t.add_rowvec(t.leaf(a), t.leaf(rvec)), r34);
      if (g) t.backward(Var{static_cast<int>(t.size()) - 1});
      return l;
    });
    check("add_colvec", {&a, &cvec}, [&](bool g) {
      Tape t;
      double l = weighted_sum_loss(t, t.add_colvec(t.leaf(a), t.leaf(cvec)), r34);
      if (g) t.backward(Var{static_cast<int>(t.size()) - 1});
      return l;
    });
    check("mul_colvec", {&a, &cvec}, [&](bool g) {
      Tape t;
      double l = weighted_sum_loss(t, t.mul_colvec(t.leaf(a), t.leaf(cvec)), r34);
      if (g) t.backward(Var{static_cast<int>(t.size()) - 1});
      return l;
    });
    check("bce_with_logits", {&a}, [&](bool g) {
      Tape t;
      double l = weighted_sum_loss(t, t.bce_with_logits(t.leaf(a), targets), r34b);
      if (g) t.backward(Var{static_cast<int>(t.size()) - 1});
      return l;
    });
    check("two-layer composition", {&a, &w, &rvec}, [&](bool g) {
      Tape t;
      Var h = t.tanh(t.add_rowvec(t.leaf(a), t.leaf(rvec)));
      Var o = t.sigmoid(t.matmul(h, t.leaf(w)));
      double l = weighted_sum_loss(t, o, r35);
      if (g) t.backward(Var{static_cast<int>(t.size()) - 1});
      return l;
    });
  }
}

TEST_CASE("gradients accumulate when a leaf is reused") {
  Param x("x", Matrix(1, 1, {1.5}));
  Tape t;
  Var xv = t.leaf(x);
  Var y = t.sum_all(t.add(xv, xv));  // y = 2x
  x.zero_grad();
  t.backward(y);
  CHECK(x.grad.at(0, 0) == 2.0);
}

TEST_CASE("backward adds into existing param gradients") {
  Param x("x", Matrix(1, 1, {2.0}));
  x.grad.at(0, 0) = 10.0;
  Tape t;
  Var y = t.sum_all(t.affine(t.leaf(x), 3.0, 0.0));
  t.backward(y);
  CHECK(x.grad.at(0, 0) == 13.0);
}

TEST_CASE("tape contract violations throw") {
  Param x("x", Matrix(2, 2));
  Tape t;
  Var v = t.leaf(x);
  CHECK_THROWS_AS(t.backward(v), ContractError);  // non-scalar loss

  Tape t2;
  Var s = t2.sum_all(t2.leaf(x));
  t2.backward(s);
  CHECK_THROWS_AS(t2.backward(s), ContractError);  // consumable exactly once
}

TEST_CASE("constants receive no gradient and block propagation") {
  Param x("x", Matrix(1, 2, {1.0, 2.0}));
  Tape t;
  Var c = t.constant(Matrix(1, 2, {4.0, 5.0}));
  Var out = t.sum_all(t.hadamard(t.leaf(x), c));
  x.zero_grad();
  t.backward(out);
  CHECK(x.grad.at(0, 0) == 4.0);
  CHECK(x.grad.at(0, 1) == 5.0);
  CHECK(!t.has_grad(c));
}

TEST_CASE("saturated exp and floored log get zero gradient") {
  Param x("x", Matrix(1, 2, {800.0, -1.0}));
  Tape t;
  Var out = t.sum_all(t.exp(t.leaf(x)));
  x.zero_grad();
  t.backward(out);
  CHECK(t.val(Var{1}).all_finite());
  CHECK(x.grad.at(0, 0) == 0.0);
  CHECK(x.grad.at(0, 1) > 0.0);

  Param y("y", Matrix(1, 1, {0.0}));
  Tape t2;
  Var out2 = t2.sum_all(t2.log(t2.leaf(y)));
  y.zero_grad();
  t2.backward(out2);
  CHECK(std::isfinite(t2.val(out2).at(0, 0)));
  CHECK(y.grad.at(0, 0) == 0.0);
}
