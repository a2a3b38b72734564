// AVX2 variants of the kernel table. This translation unit is the only one
// compiled with -mavx2; callers reach it through the dispatch table after a
// runtime CPU check. Every loop mirrors the scalar reference lane-for-lane:
// separate mul and add (no FMA) and untouched accumulation order, so outputs
// are bit-identical to the scalar kernels.

#include "biclkt/kernels.hpp"

#if defined(__x86_64__) || defined(__i386__)

#include <immintrin.h>

#include <cmath>
#include <cstring>

namespace biclkt::kern {
namespace {

void v_matmul(double* c, const double* a, const double* b, size_t m, size_t k, size_t n) {
  std::memset(c, 0, m * n * sizeof(double));
  const size_t n4 = n & ~size_t(3);
  for (size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (size_t p = 0; p < k; ++p) {
      const __m256d aik = _mm256_set1_pd(arow[p]);
      const double* brow = b + p * n;
      size_t j = 0;
      for (; j < n4; j += 4) {
        __m256d cv = _mm256_loadu_pd(crow + j);
        __m256d bv = _mm256_loadu_pd(brow + j);
        cv = _mm256_add_pd(cv, _mm256_mul_pd(aik, bv));
        _mm256_storeu_pd(crow + j, cv);
      }
      for (; j < n; ++j) crow[j] += arow[p] * brow[j];
    }
  }
}

void v_add(double* out, const double* a, const double* b, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] + b[i];
}

void v_sub(double* out, const double* a, const double* b, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] - b[i];
}

void v_mul(double* out, const double* a, const double* b, size_t n) {
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i)));
  for (; i < n; ++i) out[i] = a[i] * b[i];
}

void v_affine(double* out, const double* a, double s, double t, size_t n) {
  const __m256d sv = _mm256_set1_pd(s);
  const __m256d tv = _mm256_set1_pd(t);
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_mul_pd(_mm256_loadu_pd(a + i), sv), tv));
  for (; i < n; ++i) out[i] = a[i] * s + t;
}

void v_axpy(double* y, double alpha, const double* x, size_t n) {
  const __m256d av = _mm256_set1_pd(alpha);
  size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(y + i, _mm256_add_pd(_mm256_loadu_pd(y + i), _mm256_mul_pd(av, _mm256_loadu_pd(x + i))));
  for (; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void v_relu(double* out, const double* a, size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    // a > 0 ? a : 0, including the -0.0 -> 0.0 edge exactly as the scalar branch
    __m256d av = _mm256_loadu_pd(a + i);
    __m256d gt = _mm256_cmp_pd(av, zero, _CMP_GT_OQ);
    _mm256_storeu_pd(out + i, _mm256_and_pd(av, gt));
  }
  for (; i < n; ++i) out[i] = a[i] > 0.0 ? a[i] : 0.0;
}

void v_relu_bwd_acc(double* out, const double* g, const double* x, size_t n) {
  const __m256d zero = _mm256_setzero_pd();
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d mask = _mm256_cmp_pd(_mm256_loadu_pd(x + i), zero, _CMP_GT_OQ);
    __m256d gv = _mm256_and_pd(_mm256_loadu_pd(g + i), mask);
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(out + i), gv));
  }
  for (; i < n; ++i) {
    if (x[i] > 0.0) out[i] = out[i] + g[i];
  }
}

void v_adam_step(double* p, double* m, double* v, const double* g, size_t n,
                 double lr, double beta1, double beta2, double eps, double c1, double c2) {
  const __m256d b1 = _mm256_set1_pd(beta1);
  const __m256d b2 = _mm256_set1_pd(beta2);
  const __m256d ob1 = _mm256_set1_pd(1.0 - beta1);
  const __m256d ob2 = _mm256_set1_pd(1.0 - beta2);
  const __m256d lrv = _mm256_set1_pd(lr);
  const __m256d epsv = _mm256_set1_pd(eps);
  const __m256d c1v = _mm256_set1_pd(c1);
  const __m256d c2v = _mm256_set1_pd(c2);
  size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d gv = _mm256_loadu_pd(g + i);
    __m256d mv = _mm256_add_pd(_mm256_mul_pd(b1, _mm256_loadu_pd(m + i)), _mm256_mul_pd(ob1, gv));
    __m256d vv = _mm256_add_pd(_mm256_mul_pd(b2, _mm256_loadu_pd(v + i)),
                               _mm256_mul_pd(ob2, _mm256_mul_pd(gv, gv)));
    _mm256_storeu_pd(m + i, mv);
    _mm256_storeu_pd(v + i, vv);
    __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(_mm256_mul_pd(vv, c2v)), epsv);
    __m256d step = _mm256_mul_pd(lrv, _mm256_div_pd(_mm256_mul_pd(mv, c1v), denom));
    _mm256_storeu_pd(p + i, _mm256_sub_pd(_mm256_loadu_pd(p + i), step));
  }
  for (; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * (g[i] * g[i]);
    p[i] = p[i] - lr * ((m[i] * c1) / (std::sqrt(v[i] * c2) + eps));
  }
}

const KernelOps kAvx2 = {
    "avx2", v_matmul, v_add, v_sub, v_mul, v_affine, v_axpy, v_relu, v_relu_bwd_acc, v_adam_step,
};

}  // namespace

const KernelOps* avx2_ops() { return &kAvx2; }

}  // namespace biclkt::kern

#else

namespace biclkt::kern {
const KernelOps* avx2_ops() { return nullptr; }
}  // namespace biclkt::kern

#endif
