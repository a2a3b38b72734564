#pragma once

#include <cstddef>

namespace biclkt::kern {

// Dense double-precision primitives behind every hot loop. Each entry has a
// scalar reference implementation and, on x86-64 with AVX2, a vectorized
// variant selected at startup. Variants are bit-exact with the reference:
// lane-parallel arithmetic only, no FMA contraction, no reassociated
// reductions. Equivalence is enforced by tests, so dispatch never changes
// results, only speed.
struct KernelOps {
  const char* name;

  // c (m x n) = a (m x k) * b (k x n); c is overwritten
  void (*matmul)(double* c, const double* a, const double* b, size_t m, size_t k, size_t n);

  void (*add)(double* out, const double* a, const double* b, size_t n);
  void (*sub)(double* out, const double* a, const double* b, size_t n);
  void (*mul)(double* out, const double* a, const double* b, size_t n);
  // out = a * s + t
  void (*affine)(double* out, const double* a, double s, double t, size_t n);
  // y += alpha * x
  void (*axpy)(double* y, double alpha, const double* x, size_t n);
  void (*relu)(double* out, const double* a, size_t n);
  // out += g where x > 0
  void (*relu_bwd_acc)(double* out, const double* g, const double* x, size_t n);

  // Fused Adam update. c1, c2 are the precomputed bias corrections
  // 1/(1-beta1^t) and 1/(1-beta2^t).
  void (*adam_step)(double* p, double* m, double* v, const double* g, size_t n,
                    double lr, double beta1, double beta2, double eps, double c1, double c2);
};

const KernelOps& scalar_ops();
// nullptr when the build or the running CPU lacks AVX2
const KernelOps* avx2_ops();

// Active table. Resolution order: forced backend if set, else BICLKT_KERNELS
// env var ("scalar"/"avx2"), else best available.
const KernelOps& ops();

// "scalar", "avx2", or "auto"; throws ConfigError on unknown/unavailable names
void force_backend(const char* name);

}  // namespace biclkt::kern
