#include <atomic>

#include "pmotion/kernels.hpp"

namespace pmotion::kernels {
namespace {

const KernelTable* detect() noexcept {
  if (const KernelTable* t = avx2_table()) return t;
  if (const KernelTable* t = neon_table()) return t;
  return &scalar_table();
}

std::atomic<const KernelTable*>& slot() noexcept {
  static std::atomic<const KernelTable*> current{detect()};
  return current;
}

}  // namespace

const KernelTable& active() noexcept { return *slot().load(std::memory_order_acquire); }

bool select(Backend backend) noexcept {
  const KernelTable* t = nullptr;
  switch (backend) {
    case Backend::Scalar:
      t = &scalar_table();
      break;
    case Backend::Avx2:
      t = avx2_table();
      break;
    case Backend::Neon:
      t = neon_table();
      break;
  }
  if (t == nullptr) return false;
  slot().store(t, std::memory_order_release);
  return true;
}

}  // namespace pmotion::kernels
