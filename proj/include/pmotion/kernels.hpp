#pragma once
// Dense double-precision inner loops used by the tape.
//
// Every kernel has a scalar reference implementation; AVX2+FMA (x86-64) and
// NEON (aarch64) variants are compiled separately and chosen once at startup
// from the CPU feature bits. The variants are expected to agree with the
// scalar reference to rounding (see tests/test_kernels.cpp).

#include <cstddef>
#include <string_view>

namespace pmotion::kernels {

enum class Backend { Scalar, Avx2, Neon };

struct KernelTable {
  Backend backend;
  std::string_view name;

  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += alpha * x[i]
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);
  // y[i] += a[i] * b[i]
  void (*hadamard_acc)(const double* a, const double* b, double* y, std::size_t n);
  // y = A x, A is rows x cols row-major
  void (*gemv)(const double* A, std::size_t rows, std::size_t cols, const double* x, double* y);
  // y += A^T g, A is rows x cols row-major, g has `rows` entries, y has `cols`
  void (*gemv_t_acc)(const double* A, std::size_t rows, std::size_t cols, const double* g, double* y);
  // A += g x^T (rank-1 update), A is rows x cols row-major
  void (*ger_acc)(double* A, std::size_t rows, std::size_t cols, const double* g, const double* x);
};

const KernelTable& scalar_table() noexcept;

// nullptr when the variant was not compiled for this target or the CPU lacks
// the required features.
const KernelTable* avx2_table() noexcept;
const KernelTable* neon_table() noexcept;

// The table in use by the library. Defaults to the widest supported variant.
const KernelTable& active() noexcept;

// Forces a backend; returns false (and changes nothing) if it is unavailable.
bool select(Backend backend) noexcept;

}  // namespace pmotion::kernels
