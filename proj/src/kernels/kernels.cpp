#include "biclkt/kernels.hpp"

#include <atomic>
#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>

#include "biclkt/errors.hpp"

namespace biclkt::kern {

// ============================ scalar reference ============================

namespace {

void s_matmul(double* c, const double* a, const double* b, size_t m, size_t k, size_t n) {
  std::memset(c, 0, m * n * sizeof(double));
  for (size_t i = 0; i < m; ++i) {
    const double* arow = a + i * k;
    double* crow = c + i * n;
    for (size_t p = 0; p < k; ++p) {
      const double aik = arow[p];
      const double* brow = b + p * n;
      for (size_t j = 0; j < n; ++j) crow[j] += aik * brow[j];
    }
  }
}

void s_add(double* out, const double* a, const double* b, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = a[i] + b[i];
}

void s_sub(double* out, const double* a, const double* b, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = a[i] - b[i];
}

void s_mul(double* out, const double* a, const double* b, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

void s_affine(double* out, const double* a, double s, double t, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = a[i] * s + t;
}

void s_axpy(double* y, double alpha, const double* x, size_t n) {
  for (size_t i = 0; i < n; ++i) y[i] = y[i] + alpha * x[i];
}

void s_relu(double* out, const double* a, size_t n) {
  for (size_t i = 0; i < n; ++i) out[i] = a[i] > 0.0 ? a[i] : 0.0;
}

void s_relu_bwd_acc(double* out, const double* g, const double* x, size_t n) {
  for (size_t i = 0; i < n; ++i) {
    if (x[i] > 0.0) out[i] = out[i] + g[i];
  }
}

void s_adam_step(double* p, double* m, double* v, const double* g, size_t n,
                 double lr, double beta1, double beta2, double eps, double c1, double c2) {
  for (size_t i = 0; i < n; ++i) {
    m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
    v[i] = beta2 * v[i] + (1.0 - beta2) * (g[i] * g[i]);
    p[i] = p[i] - lr * ((m[i] * c1) / (std::sqrt(v[i] * c2) + eps));
  }
}

const KernelOps kScalar = {
    "scalar", s_matmul, s_add, s_sub, s_mul, s_affine, s_axpy, s_relu, s_relu_bwd_acc, s_adam_step,
};

}  // namespace

const KernelOps& scalar_ops() { return kScalar; }

// ============================ dispatch ============================

namespace {

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") != 0;
#else
  return false;
#endif
}

const KernelOps* pick_default() {
  if (const char* env = std::getenv("BICLKT_KERNELS")) {
    if (std::strcmp(env, "scalar") == 0) return &kScalar;
    if (std::strcmp(env, "avx2") == 0 && avx2_ops() && cpu_has_avx2()) return avx2_ops();
    // unknown or unavailable value: fall through to auto
  }
  if (avx2_ops() && cpu_has_avx2()) return avx2_ops();
  return &kScalar;
}

std::atomic<const KernelOps*> g_active{nullptr};

}  // namespace

const KernelOps& ops() {
  const KernelOps* t = g_active.load(std::memory_order_acquire);
  if (!t) {
    t = pick_default();
    g_active.store(t, std::memory_order_release);
  }
  return *t;
}

void force_backend(const char* name) {
  std::string s = name ? name : "";
  if (s == "auto") {
    g_active.store(pick_default(), std::memory_order_release);
  } else if (s == "scalar") {
    g_active.store(&kScalar, std::memory_order_release);
  } else if (s == "avx2") {
    if (!avx2_ops() || !cpu_has_avx2()) throw ConfigError("avx2 kernels unavailable on this machine");
    g_active.store(avx2_ops(), std::memory_order_release);
  } else {
    throw ConfigError("unknown kernel backend: " + s);
  }
}

}  // namespace biclkt::kern
