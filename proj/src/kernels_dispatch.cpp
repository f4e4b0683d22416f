#include <cstdlib>
#include <string_view>

#include "drsim/kernels.hpp"

namespace drsim {

#if defined(DRSIM_WITH_AVX2)
const KernelTable& avx2_kernel_table();
#endif

const KernelTable* avx2_kernels() {
#if defined(DRSIM_WITH_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2") != 0;
  return supported ? &avx2_kernel_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable& kernels() {
  static const KernelTable* chosen = [] {
    const char* forced = std::getenv("DRSIM_KERNELS");
    if (forced != nullptr && std::string_view(forced) == "scalar") return &scalar_kernels();
    const KernelTable* fast = avx2_kernels();
    return fast != nullptr ? fast : &scalar_kernels();
  }();
  return *chosen;
}

}  // namespace drsim
