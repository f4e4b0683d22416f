#include "drsim/bits.hpp"

#include <algorithm>
#include <stdexcept>

#include "drsim/kernels.hpp"

namespace drsim {

BitString::BitString(std::size_t width) : width_(width), words_((width + 63) / 64, 0) {}

BitString BitString::from_string(std::string_view text) {
  BitString out(text.size());
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '1') {
      out.set(i, true);
    } else if (text[i] != '0') {
      throw std::invalid_argument("bit string may contain only '0' and '1'");
    }
  }
  return out;
}

BitString BitString::slice(std::size_t offset, std::size_t len) const {
  if (offset + len > width_) throw std::out_of_range("slice past end of bit string");
  BitString out(len);
  if (len > 0) kernels().extract(words_.data(), words_.size(), offset, len, out.words_.data());
  return out;
}

void BitString::assign(std::size_t offset, const BitString& part) {
  if (offset + part.width_ > width_) throw std::out_of_range("assign past end of bit string");
  if (offset % 64 == 0) {
    const std::size_t base = offset / 64;
    const std::size_t full = part.width_ / 64;
    std::copy_n(part.words_.begin(), full, words_.begin() + static_cast<std::ptrdiff_t>(base));
    for (std::size_t i = full * 64; i < part.width_; ++i) set(offset + i, part.get(i));
    return;
  }
  for (std::size_t i = 0; i < part.width_; ++i) set(offset + i, part.get(i));
}

BitString BitString::complement() const {
  BitString out(*this);
  for (auto& w : out.words_) w = ~w;
  out.clear_tail();
  return out;
}

std::uint64_t BitString::popcount() const { return kernels().popcount(words_.data(), words_.size()); }

std::uint64_t BitString::hash() const {
  std::uint64_t h = 0x9e3779b97f4a7c15ULL ^ width_;
  for (std::uint64_t w : words_) {
    h ^= w + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h *= 0xff51afd7ed558ccdULL;
    h ^= h >> 33;
  }
  return h;
}

std::string BitString::to_string() const {
  std::string out(width_, '0');
  for (std::size_t i = 0; i < width_; ++i) {
    if (get(i)) out[i] = '1';
  }
  return out;
}

void BitString::clear_tail() {
  if (width_ % 64 != 0 && !words_.empty()) words_.back() &= (std::uint64_t{1} << (width_ % 64)) - 1;
}

bool operator==(const BitString& a, const BitString& b) {
  return a.width_ == b.width_ && kernels().equal(a.words_.data(), b.words_.data(), a.words_.size());
}

bool operator<(const BitString& a, const BitString& b) {
  if (a.width_ != b.width_) return a.width_ < b.width_;
  const std::size_t d = first_difference(a, b);
  return d != kNoDifference && !a.get(d);
}

std::size_t first_difference(const BitString& a, const BitString& b) {
  if (a.width() != b.width()) throw std::invalid_argument("first_difference: width mismatch");
  return kernels().first_difference(a.data(), b.data(), a.word_count());
}

bool PartialBits::learn(std::size_t i, bool value) {
  if (known.get(i)) return false;
  known.set(i, true);
  values.set(i, value);
  return true;
}

}  // namespace drsim
