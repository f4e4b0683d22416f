#pragma once

#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

namespace drsim {

std::uint64_t splitmix64(std::uint64_t& state);
// Stable 64-bit tag for a label (FNV-1a).
std::uint64_t label_tag(std::string_view label);
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag);
std::uint64_t peer_seed(std::uint64_t master, int peer);
std::uint64_t adversary_seed(std::uint64_t master);

// Pseudo-random word stream. Every draw goes through next(), so a tape can
// record the exact words consumed (used to replay a peer's randomness).
class Stream {
 public:
  explicit Stream(std::uint64_t seed = 0) : engine_(seed) {}

  std::uint64_t next() {
    const std::uint64_t w = engine_();
    if (tape_ != nullptr) tape_->push_back(w);
    return w;
  }
  // Uniform integer in [0, bound). bound must be positive.
  std::uint64_t below(std::uint64_t bound);
  // Uniform integer in [lo, hi].
  std::int64_t between(std::int64_t lo, std::int64_t hi);
  // Uniform double in [0, 1) with 53 random bits.
  double unit();

  void record_to(std::vector<std::uint64_t>* tape) { tape_ = tape; }

 private:
  std::mt19937_64 engine_;
  std::vector<std::uint64_t>* tape_ = nullptr;
};

// Source of random words; either a live stream or a replayed tape.
class WordSource {
 public:
  virtual ~WordSource() = default;
  virtual std::uint64_t next() = 0;
};

class StreamSource final : public WordSource {
 public:
  explicit StreamSource(Stream& s) : stream_(s) {}
  std::uint64_t next() override { return stream_.next(); }

 private:
  Stream& stream_;
};

class TapeSource final : public WordSource {
 public:
  explicit TapeSource(const std::vector<std::uint64_t>& tape) : tape_(tape) {}
  std::uint64_t next() override;
  std::size_t consumed() const { return pos_; }

 private:
  const std::vector<std::uint64_t>& tape_;
  std::size_t pos_ = 0;
};

double unit_from_word(std::uint64_t w);
std::uint64_t below_from(WordSource& src, std::uint64_t bound);

// Exact-distribution Binomial(trials, p) sample by inverse CDF from a single
// 53-bit uniform draw. Intended for small means (the loop walks the CDF).
std::uint64_t sample_binomial(WordSource& src, std::uint64_t trials, long double p);

}  // namespace drsim
