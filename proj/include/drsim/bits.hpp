#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "drsim/kernels.hpp"

namespace drsim {

// Fixed-width bit string backed by 64-bit words. Indices are 0-based.
// Unused high bits of the last word are always zero.
class BitString {
 public:
  BitString() = default;
  explicit BitString(std::size_t width);

  // Parses a string of '0'/'1' characters; index 0 is the first character.
  static BitString from_string(std::string_view text);

  std::size_t width() const { return width_; }
  std::size_t word_count() const { return words_.size(); }
  const std::uint64_t* data() const { return words_.data(); }
  std::uint64_t* data() { return words_.data(); }

  bool get(std::size_t i) const { return (words_[i >> 6] >> (i & 63)) & 1u; }
  void set(std::size_t i, bool value) {
    const std::uint64_t mask = std::uint64_t{1} << (i & 63);
    if (value) {
      words_[i >> 6] |= mask;
    } else {
      words_[i >> 6] &= ~mask;
    }
  }

  BitString slice(std::size_t offset, std::size_t len) const;
  // Overwrites bits [offset, offset + part.width()) with part.
  void assign(std::size_t offset, const BitString& part);
  BitString complement() const;
  std::uint64_t popcount() const;
  std::uint64_t hash() const;
  std::string to_string() const;

  friend bool operator==(const BitString& a, const BitString& b);
  friend bool operator<(const BitString& a, const BitString& b);

 private:
  void clear_tail();

  std::size_t width_ = 0;
  std::vector<std::uint64_t> words_;
};

// First index where a and b differ, or kNoDifference. Widths must match.
std::size_t first_difference(const BitString& a, const BitString& b);

struct BitStringHash {
  std::size_t operator()(const BitString& s) const { return static_cast<std::size_t>(s.hash()); }
};

// A partially known bit array: `values` holds a bit wherever `known` is set.
struct PartialBits {
  BitString values;
  BitString known;

  PartialBits() = default;
  explicit PartialBits(std::size_t width) : values(width), known(width) {}

  std::size_t width() const { return values.width(); }
  bool has(std::size_t i) const { return known.get(i); }
  bool get(std::size_t i) const { return values.get(i); }
  // Write-once: returns false (and leaves the cell alone) if already set.
  bool learn(std::size_t i, bool value);
  std::size_t known_count() const { return static_cast<std::size_t>(known.popcount()); }
  bool complete() const { return known_count() == width(); }
};

}  // namespace drsim
