#include "pmotion/kernels.hpp"

namespace pmotion::kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += alpha * x[i];
}

void hadamard_acc_scalar(const double* a, const double* b, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a[i] * b[i];
}

void gemv_scalar(const double* A, std::size_t rows, std::size_t cols, const double* x, double* y) {
  for (std::size_t r = 0; r < rows; ++r) y[r] = dot_scalar(A + r * cols, x, cols);
}

void gemv_t_acc_scalar(const double* A, std::size_t rows, std::size_t cols, const double* g, double* y) {
  for (std::size_t r = 0; r < rows; ++r) axpy_scalar(g[r], A + r * cols, y, cols);
}

void ger_acc_scalar(double* A, std::size_t rows, std::size_t cols, const double* g, const double* x) {
  for (std::size_t r = 0; r < rows; ++r) axpy_scalar(g[r], x, A + r * cols, cols);
}

}  // namespace

const KernelTable& scalar_table() noexcept {
  static const KernelTable table{Backend::Scalar,     "scalar",           dot_scalar,
                                 axpy_scalar,         hadamard_acc_scalar, gemv_scalar,
                                 gemv_t_acc_scalar,   ger_acc_scalar};
  return table;
}

}  // namespace pmotion::kernels
