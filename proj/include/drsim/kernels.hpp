#pragma once

#include <cstddef>
#include <cstdint>
#include <string_view>

namespace drsim {

// Word-level bit-string primitives. Bits are little-endian within a word:
// bit b of a string lives in word b/64 at position b%64.
struct KernelTable {
  std::string_view name;
  bool (*equal)(const std::uint64_t* a, const std::uint64_t* b, std::size_t words);
  // Index of the first differing bit, or npos when the ranges match.
  std::size_t (*first_difference)(const std::uint64_t* a, const std::uint64_t* b,
                                  std::size_t words);
  // Copies `len` bits starting at bit `offset` of src into dst (dst holds
  // ceil(len/64) words; bits past len are cleared).
  void (*extract)(const std::uint64_t* src, std::size_t src_words, std::size_t offset,
                  std::size_t len, std::uint64_t* dst);
  std::uint64_t (*popcount)(const std::uint64_t* a, std::size_t words);
};

inline constexpr std::size_t kNoDifference = static_cast<std::size_t>(-1);

const KernelTable& scalar_kernels();
// nullptr when the variant was not compiled in or the CPU lacks support.
const KernelTable* avx2_kernels();
// Selected once per process: AVX2 when available unless DRSIM_KERNELS=scalar.
const KernelTable& kernels();

}  // namespace drsim
