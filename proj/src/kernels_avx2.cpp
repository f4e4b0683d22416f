#include <immintrin.h>

#include <bit>

#include "drsim/kernels.hpp"

namespace drsim {
namespace {

bool equal_avx2(const std::uint64_t* a, const std::uint64_t* b, std::size_t words) {
  std::size_t i = 0;
  for (; i + 4 <= words; i += 4) {
    const __m256i x = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i y = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    const __m256i d = _mm256_xor_si256(x, y);
    if (!_mm256_testz_si256(d, d)) return false;
  }
  for (; i < words; ++i) {
    if (a[i] != b[i]) return false;
  }
  return true;
}

std::size_t first_difference_avx2(const std::uint64_t* a, const std::uint64_t* b,
                                  std::size_t words) {
  std::size_t i = 0;
  for (; i + 4 <= words; i += 4) {
    const __m256i x = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i y = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(b + i));
    const __m256i d = _mm256_xor_si256(x, y);
    if (!_mm256_testz_si256(d, d)) break;
  }
  for (; i < words; ++i) {
    const std::uint64_t x = a[i] ^ b[i];
    if (x != 0) return i * 64 + static_cast<std::size_t>(std::countr_zero(x));
  }
  return kNoDifference;
}

void extract_avx2(const std::uint64_t* src, std::size_t src_words, std::size_t offset,
                  std::size_t len, std::uint64_t* dst) {
  const std::size_t out_words = (len + 63) / 64;
  const std::size_t q = offset / 64;
  const unsigned r = static_cast<unsigned>(offset % 64);
  std::size_t w = 0;
  // Vector body needs src[q+w .. q+w+4] in range (one extra word for the carry).
  if (r == 0) {
    for (; w + 4 <= out_words && q + w + 4 <= src_words; w += 4) {
      _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + w),
                          _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + q + w)));
    }
  } else {
    const __m128i right = _mm_cvtsi32_si128(static_cast<int>(r));
    const __m128i left = _mm_cvtsi32_si128(static_cast<int>(64 - r));
    for (; w + 4 <= out_words && q + w + 5 <= src_words; w += 4) {
      const __m256i lo = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + q + w));
      const __m256i hi = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(src + q + w + 1));
      const __m256i v = _mm256_or_si256(_mm256_srl_epi64(lo, right), _mm256_sll_epi64(hi, left));
      _mm256_storeu_si256(reinterpret_cast<__m256i*>(dst + w), v);
    }
  }
  for (; w < out_words; ++w) {
    const std::size_t lo = q + w;
    std::uint64_t v = lo < src_words ? src[lo] >> r : 0;
    if (r != 0 && lo + 1 < src_words) v |= src[lo + 1] << (64 - r);
    dst[w] = v;
  }
  if (len % 64 != 0) dst[out_words - 1] &= (std::uint64_t{1} << (len % 64)) - 1;
}

std::uint64_t popcount_avx2(const std::uint64_t* a, std::size_t words) {
  const __m256i lookup = _mm256_setr_epi8(0, 1, 1, 2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4, 0, 1, 1,
                                          2, 1, 2, 2, 3, 1, 2, 2, 3, 2, 3, 3, 4);
  const __m256i low_mask = _mm256_set1_epi8(0x0f);
  __m256i acc = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 4 <= words; i += 4) {
    const __m256i v = _mm256_loadu_si256(reinterpret_cast<const __m256i*>(a + i));
    const __m256i lo = _mm256_and_si256(v, low_mask);
    const __m256i hi = _mm256_and_si256(_mm256_srli_epi16(v, 4), low_mask);
    const __m256i cnt =
        _mm256_add_epi8(_mm256_shuffle_epi8(lookup, lo), _mm256_shuffle_epi8(lookup, hi));
    acc = _mm256_add_epi64(acc, _mm256_sad_epu8(cnt, _mm256_setzero_si256()));
  }
  alignas(32) std::uint64_t lanes[4];
  _mm256_store_si256(reinterpret_cast<__m256i*>(lanes), acc);
  std::uint64_t total = lanes[0] + lanes[1] + lanes[2] + lanes[3];
  for (; i < words; ++i) total += static_cast<std::uint64_t>(std::popcount(a[i]));
  return total;
}

}  // namespace

const KernelTable& avx2_kernel_table() {
  static const KernelTable table{"avx2", equal_avx2, first_difference_avx2, extract_avx2,
                                 popcount_avx2};
  return table;
}

}  // namespace drsim
