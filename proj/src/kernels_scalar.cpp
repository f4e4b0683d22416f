#include "drsim/kernels.hpp"

#include <bit>

namespace drsim {
namespace {

bool equal_scalar(const std::uint64_t* a, const std::uint64_t* b, std::size_t words) {
  for (std::size_t i = 0; i < words; ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

std::size_t first_difference_scalar(const std::uint64_t* a, const std::uint64_t* b,
                                    std::size_t words) {
  for (std::size_t i = 0; i < words; ++i) {
    const std::uint64_t x = a[i] ^ b[i];
    if (x != 0) return i * 64 + static_cast<std::size_t>(std::countr_zero(x));
  }
  return kNoDifference;
}

void extract_scalar(const std::uint64_t* src, std::size_t src_words, std::size_t offset,
                    std::size_t len, std::uint64_t* dst) {
  const std::size_t out_words = (len + 63) / 64;
  const std::size_t q = offset / 64;
  const unsigned r = static_cast<unsigned>(offset % 64);
  for (std::size_t w = 0; w < out_words; ++w) {
    const std::size_t lo = q + w;
    std::uint64_t v = lo < src_words ? src[lo] >> r : 0;
    if (r != 0 && lo + 1 < src_words) v |= src[lo + 1] << (64 - r);
    dst[w] = v;
  }
  if (len % 64 != 0) dst[out_words - 1] &= (std::uint64_t{1} << (len % 64)) - 1;
}

std::uint64_t popcount_scalar(const std::uint64_t* a, std::size_t words) {
  std::uint64_t total = 0;
  for (std::size_t i = 0; i < words; ++i) total += static_cast<std::uint64_t>(std::popcount(a[i]));
  return total;
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{"scalar", equal_scalar, first_difference_scalar, extract_scalar,
                                 popcount_scalar};
  return table;
}

}  // namespace drsim
