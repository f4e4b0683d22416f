#include <gtest/gtest.h>

#include <random>
#include <set>

#include "drsim/bits.hpp"
#include "drsim/kernels.hpp"

using namespace drsim;

namespace {

BitString random_bits(std::size_t width, std::mt19937_64& rng) {
  BitString s(width);
  for (std::size_t i = 0; i < width; ++i) s.set(i, rng() & 1);
  return s;
}

// Bit-by-bit references for the kernels.
std::size_t naive_first_difference(const BitString& a, const BitString& b) {
  for (std::size_t i = 0; i < a.width(); ++i) {
    if (a.get(i) != b.get(i)) return i;
  }
  return kNoDifference;
}

std::uint64_t naive_popcount(const BitString& s) {
  std::uint64_t c = 0;
  for (std::size_t i = 0; i < s.width(); ++i) c += s.get(i) ? 1 : 0;
  return c;
}

std::vector<const KernelTable*> variants() {
  std::vector<const KernelTable*> out = {&scalar_kernels()};
  if (const KernelTable* v = avx2_kernels()) out.push_back(v);
  return out;
}

}  // namespace

TEST(BitString, ParseAndPrint) {
  const BitString s = BitString::from_string("10110");
  EXPECT_EQ(s.width(), 5u);
  EXPECT_TRUE(s.get(0));
  EXPECT_FALSE(s.get(1));
  EXPECT_TRUE(s.get(3));
  EXPECT_EQ(s.to_string(), "10110");
  EXPECT_EQ(s.popcount(), 3u);
  EXPECT_THROW(BitString::from_string("10x"), std::invalid_argument);
}

TEST(BitString, SliceAssignComplement) {
  std::mt19937_64 rng(7);
  for (std::size_t width : {1u, 63u, 64u, 65u, 200u, 1031u}) {
    const BitString s = random_bits(width, rng);
    for (std::size_t off = 0; off < width; off += 1 + width / 7) {
      const std::size_t len = (width - off + 1) / 2;
      const BitString part = s.slice(off, len);
      ASSERT_EQ(part.width(), len);
      for (std::size_t i = 0; i < len; ++i) ASSERT_EQ(part.get(i), s.get(off + i));
      BitString t(width);
      t.assign(off, part);
      for (std::size_t i = 0; i < len; ++i) ASSERT_EQ(t.get(off + i), s.get(off + i));
    }
    const BitString c = s.complement();
    EXPECT_EQ(c.popcount() + s.popcount(), width);
    // Tail bits stay clear, so equality and hashing ignore them.
    EXPECT_EQ(c.complement(), s);
    EXPECT_EQ(c.complement().hash(), s.hash());
  }
}

TEST(BitString, OrderingIsTotal) {
  std::set<BitString> seen;
  for (int v = 0; v < 16; ++v) {
    BitString s(4);
    for (int b = 0; b < 4; ++b) s.set(static_cast<std::size_t>(b), (v >> b) & 1);
    seen.insert(s);
  }
  EXPECT_EQ(seen.size(), 16u);
}

TEST(Kernels, DispatchPicksAVariant) {
  const KernelTable& k = kernels();
  EXPECT_FALSE(k.name.empty());
  if (avx2_kernels() == nullptr) EXPECT_EQ(k.name, scalar_kernels().name);
}

TEST(Kernels, VariantsAgreeWithReference) {
  std::mt19937_64 rng(1234);
  for (const KernelTable* kt : variants()) {
    SCOPED_TRACE(std::string(kt->name));
    for (int trial = 0; trial < 400; ++trial) {
      const std::size_t width = 1 + rng() % 2000;
      const BitString a = random_bits(width, rng);
      BitString b = a;
      if (trial % 3 != 0) {
        const std::size_t flip = rng() % width;
        b.set(flip, !b.get(flip));
        if (trial % 5 == 0) b.set(width - 1, !b.get(width - 1));
      }
      const std::size_t want = naive_first_difference(a, b);
      EXPECT_EQ(kt->first_difference(a.data(), b.data(), a.word_count()), want);
      EXPECT_EQ(kt->equal(a.data(), b.data(), a.word_count()), want == kNoDifference);
      EXPECT_EQ(kt->popcount(a.data(), a.word_count()), naive_popcount(a));

      const std::size_t off = rng() % width;
      const std::size_t len = rng() % (width - off + 1);
      std::vector<std::uint64_t> dst((len + 63) / 64 + 1, ~std::uint64_t{0});
      kt->extract(a.data(), a.word_count(), off, len, dst.data());
      for (std::size_t i = 0; i < len; ++i) {
        ASSERT_EQ(((dst[i >> 6] >> (i & 63)) & 1u) != 0, a.get(off + i));
      }
      if (len % 64 != 0) EXPECT_EQ(dst[len / 64] >> (len % 64), 0u);
    }
  }
}

TEST(Kernels, ScalarAndAvx2Identical) {
  const KernelTable* avx = avx2_kernels();
  if (avx == nullptr) GTEST_SKIP() << "AVX2 variant not available";
  const KernelTable& sc = scalar_kernels();
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 2000; ++trial) {
    const std::size_t words = rng() % 40;
    std::vector<std::uint64_t> a(words + 1), b(words + 1);
    for (std::size_t w = 0; w < words; ++w) {
      a[w] = rng();
      b[w] = (rng() % 4 == 0) ? rng() : a[w];
    }
    ASSERT_EQ(sc.equal(a.data(), b.data(), words), avx->equal(a.data(), b.data(), words));
    ASSERT_EQ(sc.first_difference(a.data(), b.data(), words), avx->first_difference(a.data(), b.data(), words));
    ASSERT_EQ(sc.popcount(a.data(), words), avx->popcount(a.data(), words));
    const std::size_t bitsz = words * 64;
    if (bitsz == 0) continue;
    const std::size_t off = rng() % bitsz;
    const std::size_t len = rng() % (bitsz - off + 1);
    std::vector<std::uint64_t> d1((len + 63) / 64 + 1, 0), d2((len + 63) / 64 + 1, 0);
    sc.extract(a.data(), words, off, len, d1.data());
    avx->extract(a.data(), words, off, len, d2.data());
    ASSERT_EQ(std::vector<std::uint64_t>(d1.begin(), d1.begin() + static_cast<long>((len + 63) / 64)),
              std::vector<std::uint64_t>(d2.begin(), d2.begin() + static_cast<long>((len + 63) / 64)));
  }
}

TEST(BitString, FirstDifferenceFreeFunction) {
  const BitString a = BitString::from_string("0000000001");
  const BitString b = BitString::from_string("0000000000");
  EXPECT_EQ(first_difference(a, b), 9u);
  EXPECT_EQ(first_difference(a, a), kNoDifference);
}

TEST(PartialBits, WriteOnce) {
  PartialBits p(4);
  EXPECT_FALSE(p.complete());
  EXPECT_TRUE(p.learn(2, true));
  EXPECT_FALSE(p.learn(2, false));
  EXPECT_TRUE(p.get(2));
  EXPECT_EQ(p.known_count(), 1u);
  for (std::size_t i : {0u, 1u, 3u}) p.learn(i, false);
  EXPECT_TRUE(p.complete());
}
