#include "pmotion/kernels.hpp"

#if defined(__aarch64__)

#include <arm_neon.h>

namespace pmotion::kernels {
namespace {

double dot_neon(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_neon(double alpha, const double* x, double* y, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(alpha);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), va, vld1q_f64(x + i)));
  for (; i < n; ++i) y[i] += alpha * x[i];
}

void hadamard_acc_neon(const double* a, const double* b, double* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), vld1q_f64(a + i), vld1q_f64(b + i)));
  for (; i < n; ++i) y[i] += a[i] * b[i];
}

void gemv_neon(const double* A, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_neon(A + r * cols, x, cols);
}

void gemv_t_acc_neon(const double* A, std::size_t rows, std::size_t cols, const double* g, double* y) {
  for (std::size_t r = 0; r < rows; ++r) axpy_neon(g[r], A + r * cols, y, cols);
}

void ger_acc_neon(double* A, std::size_t rows, std::size_t cols, const double* g, const double* x) {
  for (std::size_t r = 0; r < rows; ++r) axpy_neon(g[r], x, A + r * cols, cols);
}

}  // namespace

const KernelTable* neon_table() noexcept {
  static const KernelTable table{Backend::Neon,  "neon",          dot_neon,        axpy_neon,
                                 hadamard_acc_neon, gemv_neon,    gemv_t_acc_neon, ger_acc_neon};
  return &table;
}

}  // namespace pmotion::kernels

#else

namespace pmotion::kernels {
const KernelTable* neon_table() noexcept { return nullptr; }
}  // namespace pmotion::kernels

#endif
